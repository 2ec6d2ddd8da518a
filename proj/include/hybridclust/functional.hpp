#pragma once

#include "hybridclust/mixture.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hybridclust {

enum class IntegrationMode {
    automatic,   // quadrature when d <= 2, importance sampling otherwise
    quadrature,
    importance,
};

std::string to_string(IntegrationMode m);
IntegrationMode parse_integration_mode(const std::string& name);

/// Shared Monte Carlo sample drawn from a proposal mixture. Holding one of
/// these in the context makes every functional evaluated with it use the
/// same points (common random numbers). Component log-densities at the
/// points are computed once for the proposal's own components.
class ImportanceSample {
public:
    ImportanceSample(MixtureDensity proposal, std::size_t m, std::uint64_t seed);

    const MixtureDensity& proposal() const noexcept { return proposal_; }
    const DataMatrix& points() const noexcept { return points_; }
    const Eigen::VectorXd& log_proposal() const noexcept { return log_q_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }

    /// log f at every sample point.
    Eigen::VectorXd log_density(const MixtureDensity& f) const;

private:
    Eigen::VectorXd component_log_pdf(const GaussianComponent& c) const;

    MixtureDensity proposal_;
    DataMatrix points_;
    Eigen::VectorXd log_q_;
    std::vector<Eigen::VectorXd> cache_;
};

struct IntegrationContext {
    IntegrationMode mode = IntegrationMode::automatic;
    double quad_rel_tol = 1e-9;
    /// Relative tolerance for d >= 2; the kink of the Err integrand keeps
    /// cubature from reaching 1e-9 there in any reasonable budget.
    double quad_rel_tol_multi = 1e-6;
    double quad_abs_tol = 1e-13;
    double support_sigmas = 12.0;
    std::size_t max_evaluations = 20'000'000;
    std::size_t is_samples = 100'000;
    std::uint64_t seed = 0;
    /// Optional shared sample; when absent each importance-sampling call
    /// draws its own from the equal-weight mixture of its inputs' terms.
    std::shared_ptr<const ImportanceSample> sample;

    void validate() const;
    bool uses_quadrature(int dim) const;
    double rel_tol_for(int dim) const noexcept { return dim <= 1 ? quad_rel_tol : quad_rel_tol_multi; }
};

struct FunctionalEstimate {
    double value = 0.0;
    /// Monte Carlo standard error; zero for quadrature.
    double std_error = 0.0;
    /// Quadrature error estimate; zero for importance sampling.
    double abs_error = 0.0;
    IntegrationMode mode = IntegrationMode::quadrature;
};

/// Integrand that sees only the log-densities of the input mixtures at x,
/// in input order. Each of the N outputs is integrated over R^d. Extra
/// anchors widen the quadrature support to regions the inputs' own
/// components do not cover; they do not change the integrand.
template <std::size_t N>
using PointwiseIntegrand = std::function<std::array<double, N>(std::span<const double> log_dens)>;

template <std::size_t N>
std::array<FunctionalEstimate, N> integrate_pointwise(std::span<const MixtureDensity> inputs,
                                                      const PointwiseIntegrand<N>& h, const IntegrationContext& ctx,
                                                      std::span<const GaussianComponent> extra_anchors = {});

/// Log floor matching kDensityFloor.
inline constexpr double kLogFloor = -690.7755278982137;
inline double clamp_log(double v) noexcept { return v < kLogFloor ? kLogFloor : v; }

/// H(g) = -int g log g for g = scale * mix (g need not integrate to one).
FunctionalEstimate entropy_functional(double scale, const MixtureDensity& mix, const IntegrationContext& ctx);

/// I(p, q) = int p log(p / q).
FunctionalEstimate kl_information(const MixtureDensity& p, const MixtureDensity& q, const IntegrationContext& ctx);

/// rho(p, q) = int sqrt(p q).
FunctionalEstimate bhattacharyya_coeff(const MixtureDensity& p, const MixtureDensity& q,
                                       const IntegrationContext& ctx);

/// -log rho(p, q), computed without forming rho when it is tiny.
FunctionalEstimate bhattacharyya_distance(const MixtureDensity& p, const MixtureDensity& q,
                                          const IntegrationContext& ctx);

/// int min(wp * p, wq * q); the weights must sum to one.
FunctionalEstimate bayes_overlap(double wp, const MixtureDensity& p, double wq, const MixtureDensity& q,
                                 const IntegrationContext& ctx);

/// KL(a || b) between two Gaussians.
double gauss_kl_closed(const GaussianComponent& a, const GaussianComponent& b);

/// Bhattacharyya distance -log rho(a, b) between two Gaussians.
double gauss_bhat_closed(const GaussianComponent& a, const GaussianComponent& b);

}  // namespace hybridclust
