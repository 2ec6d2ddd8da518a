#pragma once

#include "hybridclust/mixture.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hybridclust {

struct EMConfig {
    int max_iter = 1000;
    int reps = 10;
    /// Stop once |logL_t - logL_{t-1}| < rel_tol * |logL_{t-1}|.
    double rel_tol = 1e-6;
    /// Added to every covariance diagonal at every M-step.
    double ridge = 1e-6;
    /// Empty-component re-seeds allowed per repetition before it is dropped.
    int max_rescues = 3;
};

struct EMResult {
    MixtureDensity mixture;
    double log_likelihood;
    /// Number of M-step updates performed.
    int iterations;
    int rep;
    int rescues;
    /// Log-likelihood after every E-step, in order.
    std::vector<double> trace;
};

/// Best-of-`cfg.reps` EM fit with K full-covariance components. Repetition
/// r draws its starting means with seed + r, so the result does not depend
/// on how repetitions are scheduled.
EMResult em_fit(const DataMatrix& data, int K, std::uint64_t seed, const EMConfig& cfg = {});

/// One repetition; throws NumericalError if it cannot be completed.
EMResult em_fit_once(const DataMatrix& data, int K, std::uint64_t rep_seed, const EMConfig& cfg, int rep = 0);

enum class Criterion { bic, aic };
std::string to_string(Criterion c);
Criterion parse_criterion(const std::string& name);

int count_parameters(int K, int d);
double bic_score(double log_likelihood, int n_params, std::size_t n_obs);
double aic_score(double log_likelihood, int n_params);

struct CriterionScores {
    double log_likelihood;
    double bic;
    double aic;
};

struct FittedModel {
    MixtureDensity mixture;
    double log_likelihood;
    int n_params;
    std::size_t n_obs;
    Criterion criterion = Criterion::bic;
    std::map<int, CriterionScores> criterion_scores;
    std::vector<int> map_labels;

    int K() const noexcept { return static_cast<int>(mixture.size()); }
    int dim() const noexcept { return mixture.dim(); }
    double bic() const { return bic_score(log_likelihood, n_params, n_obs); }
    double aic() const { return aic_score(log_likelihood, n_params); }
};

/// Wraps a single fit (any K) as a FittedModel with MAP labels for `data`.
FittedModel make_model(const EMResult& fit, const DataMatrix& data, Criterion criterion = Criterion::bic);

/// Fits K = k_min..k_max and keeps the model minimizing the criterion
/// (lowest K on ties). Scores for every successful K are retained.
FittedModel select_model(const DataMatrix& data, int k_min, int k_max, Criterion criterion, std::uint64_t seed,
                         const EMConfig& cfg = {});

/// label[i] = argmax_k coef_k N(x_i | k); lowest index wins ties.
std::vector<int> map_assign(const MixtureDensity& mix, const DataMatrix& data);
inline std::vector<int> map_assign(const FittedModel& model, const DataMatrix& data) {
    return map_assign(model.mixture, data);
}

}  // namespace hybridclust
