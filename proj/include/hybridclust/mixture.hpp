#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace hybridclust {

/// Observations are stored one per row so a row is a contiguous span.
using DataMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const DataMatrix& m, Eigen::Index i) {
    return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// Floor applied wherever a density value (not its logarithm) is returned.
inline constexpr double kDensityFloor = 1e-300;

/// Multivariate normal with a symmetric positive-definite covariance.
/// Construction validates the matrix and caches the inverse Cholesky
/// factor, so evaluation is a triangular product and a dot product.
class GaussianComponent {
public:
    GaussianComponent(Eigen::VectorXd mean, Eigen::MatrixXd cov);

    /// Scalar convenience for the 1-D scenarios.
    static GaussianComponent univariate(double mean, double variance);

    int dim() const noexcept { return static_cast<int>(mean_.size()); }
    const Eigen::VectorXd& mean() const noexcept { return mean_; }
    const Eigen::MatrixXd& cov() const noexcept { return cov_; }
    /// Lower Cholesky factor L with cov = L L^T.
    const Eigen::MatrixXd& chol() const noexcept { return chol_; }
    const Eigen::MatrixXd& inv_chol() const noexcept { return inv_chol_; }
    double log_det() const noexcept { return log_det_; }

    double log_pdf(std::span<const double> x) const noexcept;
    double log_pdf(const Eigen::VectorXd& x) const noexcept {
        return log_pdf(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    }

    friend bool operator==(const GaussianComponent& a, const GaussianComponent& b) {
        return a.mean_ == b.mean_ && a.cov_ == b.cov_;
    }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd chol_;
    Eigen::MatrixXd inv_chol_;
    double log_det_ = 0.0;
    double log_norm_ = 0.0;
};

struct MixtureTerm {
    double coef;
    GaussianComponent component;
};

/// Probability density made of positive-weight Gaussian terms whose
/// weights sum to one. Unnormalized variants are expressed by the caller
/// as scale * density, never by storing unnormalized coefficients here.
class MixtureDensity {
public:
    explicit MixtureDensity(std::vector<MixtureTerm> terms);
    explicit MixtureDensity(GaussianComponent single);

    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return terms_.size(); }
    const std::vector<MixtureTerm>& terms() const noexcept { return terms_; }
    std::span<const double> log_coefs() const noexcept { return log_coefs_; }

    /// log f(x), evaluated with log-sum-exp; finite for every finite x.
    double log_pdf(std::span<const double> x) const;
    double log_pdf(const Eigen::VectorXd& x) const {
        return log_pdf(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    }
    /// f(x) clamped below at kDensityFloor.
    double pdf(std::span<const double> x) const;
    double pdf(const Eigen::VectorXd& x) const {
        return pdf(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
    }

    /// (wa * a + wb * b) / (wa + wb), represented by concatenating the
    /// rescaled term lists. No refitting takes place.
    static MixtureDensity combine(double wa, const MixtureDensity& a, double wb, const MixtureDensity& b);

    friend bool operator==(const MixtureDensity& a, const MixtureDensity& b);

private:
    std::vector<MixtureTerm> terms_;
    std::vector<double> log_coefs_;
    int dim_ = 0;
};

/// n i.i.d. draws: term index from the coefficients, then mean + L z.
DataMatrix sample(const MixtureDensity& mix, std::size_t n, std::uint64_t seed);

/// Draws with an externally owned engine; also returns the term index of
/// each draw when `which` is non-null.
template <class Engine>
DataMatrix sample_with(const MixtureDensity& mix, std::size_t n, Engine& rng, std::vector<int>* which = nullptr);

double log_sum_exp(std::span<const double> values) noexcept;

}  // namespace hybridclust

#include "hybridclust/detail/sample_impl.hpp"
