#include "hybridclust/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <string>

namespace hybridclust::kernels {

namespace {

constexpr Eigen::Index kBlockRows = 256;

// Responsibilities for rows [begin, begin + m), one component at a time so
// the whitening is a small dense product and exp runs over whole columns.
void e_step_block(const DataMatrix& data, Eigen::Index begin, Eigen::Index m, std::span<const double> log_coefs,
                  std::span<const GaussianComponent> comps, Eigen::MatrixXd& resp, Eigen::VectorXd& row_loglik) {
    const auto K = static_cast<Eigen::Index>(comps.size());
    const auto d = data.cols();
    const double log_2pi = std::log(2.0 * 3.14159265358979323846);
    const auto x = data.middleRows(begin, m);
    auto block = resp.middleRows(begin, m);
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto& c = comps[static_cast<std::size_t>(k)];
        const Eigen::MatrixXd z = (x.rowwise() - c.mean().transpose()) * c.inv_chol().transpose();
        const double offset = log_coefs[static_cast<std::size_t>(k)] - 0.5 * (d * log_2pi + c.log_det());
        block.col(k) = (offset - 0.5 * z.rowwise().squaredNorm().array()).matrix();
    }
    const Eigen::VectorXd top = block.rowwise().maxCoeff();
    block = (block.colwise() - top).array().exp().matrix();
    const Eigen::VectorXd acc = block.rowwise().sum();
    block.array().colwise() /= acc.array();
    row_loglik.segment(begin, m) = top.array() + acc.array().log();
}

WeightedMoments moments_for(const DataMatrix& data, const Eigen::MatrixXd& resp, Eigen::Index k) {
    const auto d = data.cols();
    WeightedMoments m;
    m.mass = resp.col(k).sum();
    m.mean = Eigen::VectorXd::Zero(d);
    m.scatter = Eigen::MatrixXd::Zero(d, d);
    if (m.mass <= 0.0) return m;
    m.mean = (data.transpose() * resp.col(k)) / m.mass;
    const Eigen::MatrixXd centered = data.rowwise() - m.mean.transpose();
    const Eigen::MatrixXd weighted = centered.array().colwise() * resp.col(k).array();
    m.scatter.noalias() = centered.transpose() * weighted;
    m.scatter /= m.mass;
    return m;
}

}  // namespace

void e_step(const DataMatrix& data, std::span<const double> log_coefs, std::span<const GaussianComponent> comps,
            Eigen::MatrixXd& resp, Eigen::VectorXd& row_loglik) {
    const auto n = data.rows();
    resp.resize(n, static_cast<Eigen::Index>(comps.size()));
    row_loglik.resize(n);
    const Eigen::Index blocks = (n + kBlockRows - 1) / kBlockRows;
#pragma omp parallel for schedule(static)
    for (Eigen::Index b = 0; b < blocks; ++b) {
        const Eigen::Index begin = b * kBlockRows;
        e_step_block(data, begin, std::min(kBlockRows, n - begin), log_coefs, comps, resp, row_loglik);
    }
}

void e_step_serial(const DataMatrix& data, std::span<const double> log_coefs,
                   std::span<const GaussianComponent> comps, Eigen::MatrixXd& resp, Eigen::VectorXd& row_loglik) {
    const auto n = data.rows();
    resp.resize(n, static_cast<Eigen::Index>(comps.size()));
    row_loglik.resize(n);
    for (Eigen::Index begin = 0; begin < n; begin += kBlockRows)
        e_step_block(data, begin, std::min(kBlockRows, n - begin), log_coefs, comps, resp, row_loglik);
}

std::vector<WeightedMoments> m_step_moments(const DataMatrix& data, const Eigen::MatrixXd& resp) {
    const auto K = resp.cols();
    std::vector<WeightedMoments> out(static_cast<std::size_t>(K));
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index k = 0; k < K; ++k) out[static_cast<std::size_t>(k)] = moments_for(data, resp, k);
    return out;
}

std::vector<WeightedMoments> m_step_moments_serial(const DataMatrix& data, const Eigen::MatrixXd& resp) {
    const auto K = resp.cols();
    std::vector<WeightedMoments> out(static_cast<std::size_t>(K));
    for (Eigen::Index k = 0; k < K; ++k) out[static_cast<std::size_t>(k)] = moments_for(data, resp, k);
    return out;
}

Eigen::MatrixXd pairwise(int n, const PairFunction& f) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    const int pairs = n * (n - 1) / 2;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(pairs));
    std::vector<std::pair<int, int>> index;
    index.reserve(static_cast<std::size_t>(pairs));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) index.emplace_back(i, j);

#pragma omp parallel for schedule(dynamic)
    for (int p = 0; p < pairs; ++p) {
        const auto [i, j] = index[static_cast<std::size_t>(p)];
        try {
            const double v = f(i, j);
            out(i, j) = v;
            out(j, i) = v;
        } catch (...) {
            errors[static_cast<std::size_t>(p)] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

Eigen::MatrixXd pairwise_serial(int n, const PairFunction& f) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double v = f(i, j);
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

int thread_cap_from_env() {
    const char* raw = std::getenv("HYBRIDCLUST_THREADS");
    if (raw == nullptr || *raw == '\0') return 0;
    try {
        const int v = std::stoi(raw);
        return v > 0 ? v : 0;
    } catch (const std::exception&) {
        return 0;
    }
}

void apply_thread_cap() {
    if (const int cap = thread_cap_from_env(); cap > 0) omp_set_num_threads(cap);
}

}  // namespace hybridclust::kernels
