#include "hybridclust/mixture.hpp"

#include "hybridclust/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace hybridclust {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kCoefSumTol = 1e-9;

}  // namespace

double log_sum_exp(std::span<const double> values) noexcept {
    double top = -std::numeric_limits<double>::infinity();
    for (double v : values) top = std::max(top, v);
    if (!std::isfinite(top)) return top;
    double acc = 0.0;
    for (double v : values) acc += std::exp(v - top);
    return top + std::log(acc);
}

GaussianComponent::GaussianComponent(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
    const auto d = mean_.size();
    if (d == 0) throw ValidationError("gaussian component: empty mean vector");
    if (cov_.rows() != d || cov_.cols() != d) {
        std::ostringstream msg;
        msg << "gaussian component: covariance is " << cov_.rows() << "x" << cov_.cols() << " but mean has length "
            << d;
        throw ValidationError(msg.str());
    }
    if (!mean_.allFinite() || !cov_.allFinite()) throw ValidationError("gaussian component: non-finite parameter");
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() >= kSymmetryTol) {
        throw ValidationError("gaussian component: covariance is not symmetric");
    }

    Eigen::LLT<Eigen::MatrixXd> llt(cov_);
    if (llt.info() != Eigen::Success) throw NumericalError("gaussian component: covariance is not positive definite");
    chol_ = llt.matrixL();
    const auto diag = chol_.diagonal();
    if ((diag.array() <= 0.0).any() || !diag.allFinite()) {
        throw NumericalError("gaussian component: covariance is not positive definite");
    }
    log_det_ = 2.0 * diag.array().log().sum();
    inv_chol_ = chol_.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(d, d));
    log_norm_ = -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + log_det_);
}

GaussianComponent GaussianComponent::univariate(double mean, double variance) {
    return GaussianComponent(Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, variance));
}

double GaussianComponent::log_pdf(std::span<const double> x) const noexcept {
    const int d = dim();
    const double* li = inv_chol_.data();  // column-major, lower triangular
    double quad = 0.0;
    for (int r = 0; r < d; ++r) {
        double y = 0.0;
        for (int c = 0; c <= r; ++c) y += li[c * d + r] * (x[static_cast<std::size_t>(c)] - mean_[c]);
        quad += y * y;
    }
    return log_norm_ - 0.5 * quad;
}

MixtureDensity::MixtureDensity(std::vector<MixtureTerm> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw ValidationError("mixture density: no terms");
    dim_ = terms_.front().component.dim();
    double total = 0.0;
    log_coefs_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        const auto& t = terms_[i];
        if (!(t.coef > 0.0) || !std::isfinite(t.coef)) {
            std::ostringstream msg;
            msg << "mixture density: term " << i << " has non-positive coefficient " << t.coef;
            throw ValidationError(msg.str());
        }
        if (t.component.dim() != dim_) throw ValidationError("mixture density: terms differ in dimension");
        total += t.coef;
        log_coefs_.push_back(std::log(t.coef));
    }
    if (std::abs(total - 1.0) > kCoefSumTol) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "mixture density: coefficients sum to " << total << ", expected 1";
        throw ValidationError(msg.str());
    }
}

MixtureDensity::MixtureDensity(GaussianComponent single)
    : MixtureDensity(std::vector<MixtureTerm>{{1.0, std::move(single)}}) {}

double MixtureDensity::log_pdf(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) {
        std::ostringstream msg;
        msg << "mixture density: point has dimension " << x.size() << ", density has " << dim_;
        throw ValidationError(msg.str());
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw ValidationError("mixture density: non-finite evaluation point");
    }
    if (terms_.size() == 1) return terms_.front().component.log_pdf(x);

    double top = -std::numeric_limits<double>::infinity();
    // Small mixtures dominate; keep the scratch on the stack when possible.
    constexpr std::size_t kStack = 32;
    double stack_buf[kStack];
    std::vector<double> heap_buf;
    double* buf = stack_buf;
    if (terms_.size() > kStack) {
        heap_buf.resize(terms_.size());
        buf = heap_buf.data();
    }
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        buf[i] = log_coefs_[i] + terms_[i].component.log_pdf(x);
        top = std::max(top, buf[i]);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < terms_.size(); ++i) acc += std::exp(buf[i] - top);
    return top + std::log(acc);
}

double MixtureDensity::pdf(std::span<const double> x) const { return std::max(std::exp(log_pdf(x)), kDensityFloor); }

MixtureDensity MixtureDensity::combine(double wa, const MixtureDensity& a, double wb, const MixtureDensity& b) {
    if (!(wa > 0.0) || !(wb > 0.0)) throw ValidationError("mixture combine: weights must be positive");
    if (a.dim() != b.dim()) throw ValidationError("mixture combine: dimension mismatch");
    const double total = wa + wb;
    std::vector<MixtureTerm> terms;
    terms.reserve(a.size() + b.size());
    for (const auto& t : a.terms()) terms.push_back({t.coef * wa / total, t.component});
    for (const auto& t : b.terms()) terms.push_back({t.coef * wb / total, t.component});
    // Rounding can push the sum a few ulps off one; renormalize exactly.
    double sum = 0.0;
    for (const auto& t : terms) sum += t.coef;
    for (auto& t : terms) t.coef /= sum;
    return MixtureDensity(std::move(terms));
}

bool operator==(const MixtureDensity& a, const MixtureDensity& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.terms_[i].coef != b.terms_[i].coef || !(a.terms_[i].component == b.terms_[i].component)) return false;
    }
    return true;
}

DataMatrix sample(const MixtureDensity& mix, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ValidationError("sample: n must be at least 1");
    std::mt19937_64 rng(seed);
    return sample_with(mix, n, rng);
}

}  // namespace hybridclust
