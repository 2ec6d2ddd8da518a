#include "hybridclust/dissim.hpp"

#include "hybridclust/errors.hpp"
#include "hybridclust/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace hybridclust {

std::string to_string(Measure m) {
    switch (m) {
        case Measure::se: return "se";
        case Measure::wse: return "wse";
        case Measure::js: return "js";
        case Measure::err: return "err";
        case Measure::bhat: return "bhat";
        case Measure::kldiv: return "kldiv";
        case Measure::klinf: return "klinf";
    }
    return "?";
}

Measure parse_measure(const std::string& name) {
    for (auto m : kAllMeasures) {
        if (to_string(m) == name) return m;
    }
    throw ValidationError("unknown measure '" + name + "' (expected se, wse, js, err, bhat, kldiv or klinf)");
}

MeasureRange analytic_range(Measure m) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (m) {
        case Measure::se:
        case Measure::wse: return {-inf, 0.0};
        case Measure::js: return {0.0, std::numbers::ln2};
        case Measure::err: return {0.5, 1.0};
        case Measure::bhat:
        case Measure::kldiv:
        case Measure::klinf: return {0.0, inf};
    }
    return {-inf, inf};
}

WeightedPair::WeightedPair(double pi_k_, MixtureDensity p_k_, double pi_l_, MixtureDensity p_l_)
    : pi_k(pi_k_), p_k(std::move(p_k_)), pi_l(pi_l_), p_l(std::move(p_l_)) {
    if (!(pi_k > 0.0) || !(pi_l > 0.0) || pi_k > 1.0 || pi_l > 1.0)
        throw ValidationError("weighted pair: weights must lie in (0, 1]");
    if (pi_k + pi_l > 1.0 + 1e-9) throw ValidationError("weighted pair: weights sum above one");
    if (p_k.dim() != p_l.dim()) throw ValidationError("weighted pair: dimension mismatch");
}

namespace {

// -(e^a log(1 + e^(b-a)) + e^b log(1 + e^(a-b))): the pointwise value of
// H(e^a + e^b) - H(e^a) - H(e^b), written without cancellation.
double mixing_entropy_gap(double a, double b) {
    if (a < b) std::swap(a, b);
    const double tail = std::log1p(std::exp(b - a));
    return -(std::exp(a) * tail + std::exp(b) * ((a - b) + tail));
}

double integrate_one(const WeightedPair& pair, const PointwiseIntegrand<1>& h, const IntegrationContext& ctx) {
    const std::array<MixtureDensity, 2> in{pair.p_k, pair.p_l};
    return integrate_pointwise<1>(in, h, ctx)[0].value;
}

std::array<double, 2> kl_both_ways(const WeightedPair& pair, const IntegrationContext& ctx) {
    if (pair.p_k.size() == 1 && pair.p_l.size() == 1) {
        const auto& a = pair.p_k.terms()[0].component;
        const auto& b = pair.p_l.terms()[0].component;
        return {gauss_kl_closed(a, b), gauss_kl_closed(b, a)};
    }
    const std::array<MixtureDensity, 2> in{pair.p_k, pair.p_l};
    const PointwiseIntegrand<2> h = [](std::span<const double> lf) {
        const double diff = lf[0] - lf[1];
        return std::array<double, 2>{std::exp(lf[0]) * diff, -std::exp(lf[1]) * diff};
    };
    const auto r = integrate_pointwise<2>(in, h, ctx);
    return {r[0].value, r[1].value};
}

}  // namespace

double evaluate(Measure m, const WeightedPair& pair, const IntegrationContext& ctx) {
    const double pi_min = std::min(pair.pi_k, pair.pi_l);
    switch (m) {
        case Measure::se: {
            const double la = std::log(pair.pi_k), lb = std::log(pair.pi_l);
            return integrate_one(
                pair, [la, lb](std::span<const double> lf) { return std::array<double, 1>{mixing_entropy_gap(la + lf[0], lb + lf[1])}; },
                ctx);
        }
        case Measure::wse: {
            const double pk = pair.pi_k, pl = pair.pi_l;
            return integrate_one(
                pair,
                [pk, pl](std::span<const double> lf) {
                    const double lp = clamp_log(lf[0]), lq = clamp_log(lf[1]);
                    const double ls = clamp_log(log_sum_exp(lf));
                    return std::array<double, 1>{-(pk + pl) * std::exp(ls) * ls + pk * std::exp(lp) * lp +
                                                 pl * std::exp(lq) * lq};
                },
                ctx);
        }
        case Measure::js: {
            const double wk = pair.w_k(), wl = pair.w_l();
            const double la = std::log(wk), lb = std::log(wl);
            const double binary_entropy = -wk * la - wl * lb;
            return binary_entropy +
                   integrate_one(
                       pair,
                       [la, lb](std::span<const double> lf) {
                           return std::array<double, 1>{mixing_entropy_gap(la + lf[0], lb + lf[1])};
                       },
                       ctx);
        }
        case Measure::err: {
            const double la = std::log(pair.w_k()), lb = std::log(pair.w_l());
            return 1.0 - integrate_one(
                             pair,
                             [la, lb](std::span<const double> lf) {
                                 return std::array<double, 1>{std::exp(std::min(la + lf[0], lb + lf[1]))};
                             },
                             ctx);
        }
        case Measure::bhat: {
            if (pair.p_k.size() == 1 && pair.p_l.size() == 1)
                return pi_min * gauss_bhat_closed(pair.p_k.terms()[0].component, pair.p_l.terms()[0].component);
            return pi_min * bhattacharyya_distance(pair.p_k, pair.p_l, ctx).value;
        }
        case Measure::kldiv: {
            const auto kl = kl_both_ways(pair, ctx);
            return pi_min * (kl[0] + kl[1]);
        }
        case Measure::klinf: {
            const auto kl = kl_both_ways(pair, ctx);
            return pi_min * std::min(kl[0], kl[1]);
        }
    }
    throw ValidationError("evaluate: unknown measure");
}

double evaluate(Measure m, const Subcluster& k, const Subcluster& l, const IntegrationContext& ctx) {
    try {
        return evaluate(m, WeightedPair(k, l), ctx);
    } catch (const IntegrationError& e) {
        std::ostringstream msg;
        msg << to_string(m) << "(" << k.id << ", " << l.id << "): " << e.what();
        throw IntegrationError(msg.str(), e.partial(), e.error_estimate());
    } catch (const NumericalError& e) {
        std::ostringstream msg;
        msg << to_string(m) << "(" << k.id << ", " << l.id << "): " << e.what();
        throw NumericalError(msg.str());
    }
}

Eigen::MatrixXd pairwise_matrix(const ClusterState& state, Measure m, const IntegrationContext& ctx) {
    if (state.size() < 2) throw ValidationError("pairwise_matrix: need at least two subclusters");
    return kernels::pairwise(static_cast<int>(state.size()), [&](int i, int j) {
        return evaluate(m, state.subclusters[static_cast<std::size_t>(i)], state.subclusters[static_cast<std::size_t>(j)], ctx);
    });
}

Eigen::MatrixXd pairwise_matrix_serial(const ClusterState& state, Measure m, const IntegrationContext& ctx) {
    if (state.size() < 2) throw ValidationError("pairwise_matrix: need at least two subclusters");
    return kernels::pairwise_serial(static_cast<int>(state.size()), [&](int i, int j) {
        return evaluate(m, state.subclusters[static_cast<std::size_t>(i)], state.subclusters[static_cast<std::size_t>(j)], ctx);
    });
}

}  // namespace hybridclust
