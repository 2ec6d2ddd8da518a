#pragma once

#include <cmath>
#include <limits>
#include <utility>

namespace hybridclust {

template <class F, class Next>
LimitEstimate estimate_limit(const std::string& name, std::vector<double> points, Next next, F value_at, double tol,
                             int max_extra) {
    LimitEstimate out;
    std::vector<double> values;
    auto push = [&](double t) {
        const double v = value_at(t);
        values.push_back(v);
        out.trace.push_back({name, t, v});
    };
    for (double t : points) push(t);

    auto decide = [&]() {
        const std::size_t n = values.size();
        if (n >= 2 && std::abs(values[n - 1] - values[n - 2]) < tol) {
            out.kind = LimitEstimate::Kind::converged;
            out.limit = values[n - 1];
            return true;
        }
        if (n >= 4) {
            const double d1 = values[n - 3] - values[n - 4];
            const double d2 = values[n - 2] - values[n - 3];
            const double d3 = values[n - 1] - values[n - 2];
            const bool same_sign = (d1 > 0 && d2 > 0 && d3 > 0) || (d1 < 0 && d2 < 0 && d3 < 0);
            if (same_sign && std::abs(d2) >= 0.5 * std::abs(d1) && std::abs(d3) >= 0.5 * std::abs(d2)) {
                const bool up = d3 > 0;
                out.kind = up ? LimitEstimate::Kind::diverged_up : LimitEstimate::Kind::diverged_down;
                out.limit = up ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
                return true;
            }
        }
        return false;
    };

    double t = points.back();
    for (int extra = 0; !decide(); ++extra) {
        if (extra >= max_extra) {
            out.kind = LimitEstimate::Kind::undecided;
            out.limit = values.back();
            break;
        }
        t = next(t);
        push(t);
    }
    return out;
}

}  // namespace hybridclust
