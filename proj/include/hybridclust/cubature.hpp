#pragma once

// Globally adaptive h-cubature for small vector-valued integrands.
//
// 1-D regions use the 15-point Gauss-Kronrod rule (error |K15 - G7|);
// regions in d >= 2 use the Genz-Malik degree 7/5 pair and are bisected
// along the axis with the largest fourth difference. Every region carries
// an integer tag that is handed back to the integrand, so one run can
// integrate several differently-parametrized pieces under a single global
// error budget.

#include "hybridclust/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

namespace hybridclust::cubature {

template <std::size_t N>
using Values = std::array<double, N>;

struct Box {
    int tag = 0;
    std::vector<double> lo;
    std::vector<double> hi;
};

struct Options {
    double rel_tol = 1e-9;
    double abs_tol = 1e-13;
    std::size_t max_evaluations = 20'000'000;
};

template <std::size_t N>
struct Result {
    Values<N> value{};
    Values<N> error{};
    std::size_t evaluations = 0;
    std::size_t regions = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for kXgk[1], kXgk[3], kXgk[5], kXgk[7].
inline constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                              0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct Region {
    Box box;
    Values<N> value{};
    Values<N> error{};
    int split_axis = 0;
    double priority = 0.0;

    friend bool operator<(const Region& a, const Region& b) { return a.priority < b.priority; }
};

template <std::size_t N>
void add_scaled(Values<N>& acc, const Values<N>& v, double w) {
    for (std::size_t j = 0; j < N; ++j) acc[j] += w * v[j];
}

template <std::size_t N, class F>
void apply_gk15(Region<N>& r, F& f, std::size_t& evals) {
    const double lo = r.box.lo[0];
    const double hi = r.box.hi[0];
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    Values<N> kron{};
    Values<N> gauss{};
    double x[1];
    for (std::size_t i = 0; i < 8; ++i) {
        const int signs = i == 7 ? 1 : 2;
        for (int s = 0; s < signs; ++s) {
            x[0] = c + (s == 0 ? 1.0 : -1.0) * h * kXgk[i];
            const Values<N> v = f(r.box.tag, std::span<const double>(x, 1));
            ++evals;
            add_scaled(kron, v, kWgk[i]);
            if (i % 2 == 1) add_scaled(gauss, v, kWg[i / 2]);
        }
    }
    for (std::size_t j = 0; j < N; ++j) {
        r.value[j] = kron[j] * h;
        r.error[j] = std::abs((kron[j] - gauss[j]) * h);
    }
    r.split_axis = 0;
}

template <std::size_t N, class F>
void apply_genz_malik(Region<N>& r, F& f, std::size_t& evals) {
    const std::size_t d = r.box.lo.size();
    const double dd = static_cast<double>(d);
    const double lambda2 = std::sqrt(9.0 / 70.0);
    const double lambda4 = std::sqrt(9.0 / 10.0);
    const double lambda5 = std::sqrt(9.0 / 19.0);
    const double w1 = (12824.0 - 9120.0 * dd + 400.0 * dd * dd) / 19683.0;
    const double w2 = 980.0 / 6561.0;
    const double w3 = (1820.0 - 400.0 * dd) / 19683.0;
    const double w4 = 200.0 / 19683.0;
    const double w5 = 6859.0 / 19683.0 / std::ldexp(1.0, static_cast<int>(d));
    const double e1 = (729.0 - 950.0 * dd + 50.0 * dd * dd) / 729.0;
    const double e2 = 245.0 / 486.0;
    const double e3 = (265.0 - 100.0 * dd) / 1458.0;
    const double e4 = 25.0 / 729.0;
    const double ratio = (lambda2 * lambda2) / (lambda4 * lambda4);

    std::vector<double> c(d), h(d), x(d);
    double volume = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        c[i] = 0.5 * (r.box.lo[i] + r.box.hi[i]);
        h[i] = 0.5 * (r.box.hi[i] - r.box.lo[i]);
        volume *= 2.0 * h[i];
    }
    auto eval = [&](const std::vector<double>& p) {
        ++evals;
        return f(r.box.tag, std::span<const double>(p.data(), p.size()));
    };

    x = c;
    const Values<N> f1 = eval(x);
    Values<N> f2{}, f3{}, f4{}, f5{};
    double best_diff = -1.0;
    int best_axis = 0;
    for (std::size_t i = 0; i < d; ++i) {
        x[i] = c[i] - lambda2 * h[i];
        const Values<N> a1 = eval(x);
        x[i] = c[i] + lambda2 * h[i];
        const Values<N> a2 = eval(x);
        x[i] = c[i] - lambda4 * h[i];
        const Values<N> b1 = eval(x);
        x[i] = c[i] + lambda4 * h[i];
        const Values<N> b2 = eval(x);
        x[i] = c[i];
        double diff = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            f2[j] += a1[j] + a2[j];
            f3[j] += b1[j] + b2[j];
            diff += std::abs(a1[j] + a2[j] - 2.0 * f1[j] - ratio * (b1[j] + b2[j] - 2.0 * f1[j]));
        }
        if (diff > best_diff) {
            best_diff = diff;
            best_axis = static_cast<int>(i);
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = i + 1; k < d; ++k) {
            for (int si = -1; si <= 1; si += 2) {
                for (int sk = -1; sk <= 1; sk += 2) {
                    x[i] = c[i] + si * lambda4 * h[i];
                    x[k] = c[k] + sk * lambda4 * h[k];
                    add_scaled(f4, eval(x), 1.0);
                }
            }
            x[i] = c[i];
            x[k] = c[k];
        }
    }
    const std::size_t corners = std::size_t{1} << d;
    for (std::size_t m = 0; m < corners; ++m) {
        for (std::size_t i = 0; i < d; ++i) x[i] = c[i] + (((m >> i) & 1U) ? lambda5 : -lambda5) * h[i];
        add_scaled(f5, eval(x), 1.0);
    }
    for (std::size_t j = 0; j < N; ++j) {
        const double i7 = volume * (w1 * f1[j] + w2 * f2[j] + w3 * f3[j] + w4 * f4[j] + w5 * f5[j]);
        const double i5 = volume * (e1 * f1[j] + e2 * f2[j] + e3 * f3[j] + e4 * f4[j]);
        r.value[j] = i7;
        r.error[j] = std::abs(i7 - i5);
    }
    r.split_axis = best_axis;
}

template <std::size_t N, class F>
void apply_rule(Region<N>& r, F& f, std::size_t& evals) {
    if (r.box.lo.size() == 1)
        apply_gk15(r, f, evals);
    else
        apply_genz_malik(r, f, evals);
}

template <std::size_t N>
Values<N> tolerances(const Values<N>& total, const Options& opt) {
    Values<N> tol{};
    for (std::size_t j = 0; j < N; ++j) tol[j] = std::max(opt.abs_tol, opt.rel_tol * std::abs(total[j]));
    return tol;
}

template <std::size_t N>
double priority_of(const Region<N>& r, const Values<N>& tol) {
    double p = 0.0;
    for (std::size_t j = 0; j < N; ++j) p = std::max(p, r.error[j] / tol[j]);
    return p;
}

}  // namespace detail

/// Integrates f over the union of `boxes`. f(tag, z) must return Values<N>.
/// Throws IntegrationError (carrying the partial first component) when the
/// evaluation budget runs out before every component meets its tolerance.
template <std::size_t N, class F>
Result<N> integrate(const std::vector<Box>& boxes, F&& f, const Options& opt) {
    using detail::Region;
    Result<N> out;
    std::size_t evals = 0;

    std::vector<Region<N>> initial;
    initial.reserve(boxes.size());
    Values<N> total{}, total_err{};
    for (const auto& b : boxes) {
        Region<N> r;
        r.box = b;
        detail::apply_rule(r, f, evals);
        detail::add_scaled(total, r.value, 1.0);
        detail::add_scaled(total_err, r.error, 1.0);
        initial.push_back(std::move(r));
    }

    Values<N> tol = detail::tolerances(total, opt);
    std::priority_queue<Region<N>> heap;
    for (auto& r : initial) {
        r.priority = detail::priority_of(r, tol);
        heap.push(std::move(r));
    }

    auto converged = [&]() {
        for (std::size_t j = 0; j < N; ++j) {
            if (total_err[j] > tol[j]) return false;
        }
        return true;
    };

    std::size_t splits = 0;
    while (!converged()) {
        if (evals >= opt.max_evaluations || heap.empty()) {
            throw IntegrationError("cubature: tolerance not reached within the evaluation budget", total[0],
                                   total_err[0]);
        }
        Region<N> worst = heap.top();
        heap.pop();
        const auto axis = static_cast<std::size_t>(worst.split_axis);
        const double mid = 0.5 * (worst.box.lo[axis] + worst.box.hi[axis]);
        Region<N> left, right;
        left.box = worst.box;
        right.box = worst.box;
        left.box.hi[axis] = mid;
        right.box.lo[axis] = mid;
        detail::apply_rule(left, f, evals);
        detail::apply_rule(right, f, evals);
        for (std::size_t j = 0; j < N; ++j) {
            total[j] += left.value[j] + right.value[j] - worst.value[j];
            total_err[j] += left.error[j] + right.error[j] - worst.error[j];
        }
        // Tolerances drift slowly with the total; refresh them periodically
        // and resum from scratch to shed accumulated rounding.
        if (++splits % 256 == 0) {
            std::vector<Region<N>> all;
            all.reserve(heap.size() + 2);
            while (!heap.empty()) {
                all.push_back(heap.top());
                heap.pop();
            }
            all.push_back(std::move(left));
            all.push_back(std::move(right));
            total = {};
            total_err = {};
            for (const auto& r : all) {
                detail::add_scaled(total, r.value, 1.0);
                detail::add_scaled(total_err, r.error, 1.0);
            }
            tol = detail::tolerances(total, opt);
            for (auto& r : all) {
                r.priority = detail::priority_of(r, tol);
                heap.push(std::move(r));
            }
        } else {
            left.priority = detail::priority_of(left, tol);
            right.priority = detail::priority_of(right, tol);
            heap.push(std::move(left));
            heap.push(std::move(right));
        }
        tol = detail::tolerances(total, opt);
    }

    // Final exact resummation.
    out.value = {};
    out.error = {};
    out.regions = heap.size();
    while (!heap.empty()) {
        detail::add_scaled(out.value, heap.top().value, 1.0);
        detail::add_scaled(out.error, heap.top().error, 1.0);
        heap.pop();
    }
    out.evaluations = evals;
    return out;
}

}  // namespace hybridclust::cubature
