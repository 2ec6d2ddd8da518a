#pragma once

#include "hybridclust/cluster_state.hpp"
#include "hybridclust/functional.hpp"

#include <array>
#include <limits>
#include <string>

namespace hybridclust {

enum class Measure { se, wse, js, err, bhat, kldiv, klinf };

inline constexpr std::array<Measure, 7> kAllMeasures = {Measure::se,   Measure::wse,   Measure::js,   Measure::err,
                                                        Measure::bhat, Measure::kldiv, Measure::klinf};

std::string to_string(Measure m);
Measure parse_measure(const std::string& name);

/// Analytic extremes of a measure; infinite where the measure is unbounded.
struct MeasureRange {
    double min;
    double max;
};
MeasureRange analytic_range(Measure m);

/// Two weighted densities. The within-pair weights are w_k = pi_k / (pi_k + pi_l)
/// and w_l = pi_l / (pi_k + pi_l).
struct WeightedPair {
    double pi_k;
    MixtureDensity p_k;
    double pi_l;
    MixtureDensity p_l;

    WeightedPair(double pi_k, MixtureDensity p_k, double pi_l, MixtureDensity p_l);
    WeightedPair(const Subcluster& k, const Subcluster& l) : WeightedPair(k.weight, k.density, l.weight, l.density) {}

    double w_k() const noexcept { return pi_k / (pi_k + pi_l); }
    double w_l() const noexcept { return pi_l / (pi_k + pi_l); }
    WeightedPair swapped() const { return WeightedPair(pi_l, p_l, pi_k, p_k); }
};

/// D(k, l) for one measure. Pairs of single Gaussians use closed forms for
/// Bhat, KLdiv and KLinf; everything else is integrated numerically.
double evaluate(Measure m, const WeightedPair& pair, const IntegrationContext& ctx);

/// Same, with integration failures re-raised naming the measure and ids.
double evaluate(Measure m, const Subcluster& k, const Subcluster& l, const IntegrationContext& ctx);

/// Symmetric matrix of D over all unordered pairs of live subclusters, in
/// state order; the diagonal is zero and carries no meaning.
Eigen::MatrixXd pairwise_matrix(const ClusterState& state, Measure m, const IntegrationContext& ctx);
Eigen::MatrixXd pairwise_matrix_serial(const ClusterState& state, Measure m, const IntegrationContext& ctx);

}  // namespace hybridclust
