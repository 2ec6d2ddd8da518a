#pragma once

// Data-parallel inner loops. Every OpenMP kernel has a serial twin with the
// same signature; the tests compare the two and the benchmark times them.
// Reductions are done per item and summed serially afterwards so the
// parallel and serial versions agree bit for bit.

#include "hybridclust/mixture.hpp"

#include <functional>
#include <vector>

namespace hybridclust::kernels {

/// E-step: fills `resp` (n x K, rows sum to one) and returns the
/// per-observation log-likelihood in `row_loglik`.
void e_step(const DataMatrix& data, std::span<const double> log_coefs, std::span<const GaussianComponent> comps,
            Eigen::MatrixXd& resp, Eigen::VectorXd& row_loglik);
void e_step_serial(const DataMatrix& data, std::span<const double> log_coefs,
                   std::span<const GaussianComponent> comps, Eigen::MatrixXd& resp, Eigen::VectorXd& row_loglik);

/// Weighted moments of column k of `resp`: mass, mean and (unregularized,
/// maximum-likelihood) scatter.
struct WeightedMoments {
    double mass = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd scatter;
};
std::vector<WeightedMoments> m_step_moments(const DataMatrix& data, const Eigen::MatrixXd& resp);
std::vector<WeightedMoments> m_step_moments_serial(const DataMatrix& data, const Eigen::MatrixXd& resp);

/// Evaluates f(i, j) for every unordered pair i < j of n items and
/// returns the symmetric matrix (diagonal left at zero). Exceptions thrown
/// by f are rethrown after the loop, lowest pair first.
using PairFunction = std::function<double(int, int)>;
Eigen::MatrixXd pairwise(int n, const PairFunction& f);
Eigen::MatrixXd pairwise_serial(int n, const PairFunction& f);

/// Threads requested through HYBRIDCLUST_THREADS, or 0 when unset.
int thread_cap_from_env();
void apply_thread_cap();

}  // namespace hybridclust::kernels
