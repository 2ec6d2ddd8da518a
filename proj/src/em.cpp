#include "hybridclust/em.hpp"

#include "hybridclust/errors.hpp"
#include "hybridclust/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

namespace hybridclust {

namespace {

constexpr double kEmptyMass = 1e-10;

Eigen::MatrixXd regularized(const Eigen::MatrixXd& scatter, double ridge) {
    Eigen::MatrixXd cov = 0.5 * (scatter + scatter.transpose());
    cov.diagonal().array() += ridge;
    return cov;
}

Eigen::MatrixXd sample_scatter(const DataMatrix& data) {
    const Eigen::RowVectorXd mean = data.colwise().mean();
    const Eigen::MatrixXd centered = data.rowwise() - mean;
    return (centered.transpose() * centered) / static_cast<double>(data.rows());
}

std::size_t random_index(std::mt19937_64& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

EMResult em_fit_once(const DataMatrix& data, int K, std::uint64_t rep_seed, const EMConfig& cfg, int rep) {
    const auto n = static_cast<std::size_t>(data.rows());
    std::mt19937_64 rng(rep_seed);

    const Eigen::MatrixXd base_cov = regularized(sample_scatter(data), cfg.ridge);

    // Starting means: K distinct observations.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int k = 0; k < K; ++k) {
        const auto j = static_cast<std::size_t>(k) + random_index(rng, n - static_cast<std::size_t>(k));
        std::swap(order[static_cast<std::size_t>(k)], order[j]);
    }

    std::vector<GaussianComponent> comps;
    comps.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        comps.emplace_back(data.row(static_cast<Eigen::Index>(order[static_cast<std::size_t>(k)])).transpose(),
                           base_cov);
    }
    std::vector<double> coefs(static_cast<std::size_t>(K), 1.0 / K);
    std::vector<double> log_coefs(static_cast<std::size_t>(K), std::log(1.0 / K));

    Eigen::MatrixXd resp;
    Eigen::VectorXd row_ll;
    std::vector<double> trace;
    int rescues = 0;
    int updates = 0;
    double loglik = -std::numeric_limits<double>::infinity();

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        kernels::e_step(data, log_coefs, comps, resp, row_ll);
        // Serial sum keeps the total independent of the thread count.
        double total = 0.0;
        for (Eigen::Index i = 0; i < row_ll.size(); ++i) total += row_ll[i];
        if (!std::isfinite(total)) throw NumericalError("em: non-finite log-likelihood");
        const double previous = loglik;
        loglik = total;
        trace.push_back(loglik);
        if (iter > 1 && std::abs(loglik - previous) < cfg.rel_tol * std::abs(previous)) break;
        if (iter == cfg.max_iter) break;

        const auto moments = kernels::m_step_moments(data, resp);
        ++updates;
        bool rescued = false;
        for (int k = 0; k < K; ++k) {
            const auto& m = moments[static_cast<std::size_t>(k)];
            std::optional<GaussianComponent> next;
            if (m.mass >= kEmptyMass) {
                try {
                    next.emplace(m.mean, regularized(m.scatter, cfg.ridge));
                } catch (const NumericalError&) {
                    next.reset();
                }
            }
            if (next) {
                comps[static_cast<std::size_t>(k)] = *next;
                coefs[static_cast<std::size_t>(k)] = m.mass / static_cast<double>(n);
                continue;
            }
            if (++rescues > cfg.max_rescues) {
                std::ostringstream msg;
                msg << "em: repetition " << rep << " exhausted " << cfg.max_rescues << " empty-component rescues";
                throw NumericalError(msg.str());
            }
            rescued = true;
            const auto j = static_cast<Eigen::Index>(random_index(rng, n));
            comps[static_cast<std::size_t>(k)] = GaussianComponent(data.row(j).transpose(), base_cov);
            coefs[static_cast<std::size_t>(k)] = 1.0 / K;
        }
        const double sum = std::accumulate(coefs.begin(), coefs.end(), 0.0);
        for (int k = 0; k < K; ++k) {
            coefs[static_cast<std::size_t>(k)] /= sum;
            log_coefs[static_cast<std::size_t>(k)] = std::log(coefs[static_cast<std::size_t>(k)]);
        }
        // A re-seed restarts the monotone climb; do not compare across it.
        if (rescued) loglik = -std::numeric_limits<double>::infinity();
    }

    std::vector<MixtureTerm> terms;
    terms.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) terms.push_back({coefs[static_cast<std::size_t>(k)], comps[static_cast<std::size_t>(k)]});
    return EMResult{MixtureDensity(std::move(terms)), trace.back(), updates, rep, rescues,
                    std::move(trace)};
}

EMResult em_fit(const DataMatrix& data, int K, std::uint64_t seed, const EMConfig& cfg) {
    if (K < 1) throw ValidationError("em: K must be at least 1");
    if (data.rows() <= K) {
        std::ostringstream msg;
        msg << "em: need more observations (" << data.rows() << ") than components (" << K << ")";
        throw ValidationError(msg.str());
    }
    if (!data.allFinite()) throw ValidationError("em: data contains non-finite values");
    if (cfg.reps < 1 || cfg.max_iter < 1) throw ValidationError("em: reps and max_iter must be positive");

    std::vector<std::optional<EMResult>> results(static_cast<std::size_t>(cfg.reps));
    std::vector<std::string> failures(static_cast<std::size_t>(cfg.reps));
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < cfg.reps; ++r) {
        try {
            results[static_cast<std::size_t>(r)] = em_fit_once(data, K, seed + static_cast<std::uint64_t>(r), cfg, r);
        } catch (const std::exception& e) {
            failures[static_cast<std::size_t>(r)] = e.what();
        }
    }

    const EMResult* best = nullptr;
    for (const auto& r : results) {
        if (r && (best == nullptr || r->log_likelihood > best->log_likelihood)) best = &*r;
    }
    if (best == nullptr) {
        std::ostringstream msg;
        msg << "em: all " << cfg.reps << " repetitions failed for K=" << K << " (first: " << failures.front() << ")";
        throw NumericalError(msg.str());
    }
    return *best;
}

std::string to_string(Criterion c) { return c == Criterion::bic ? "bic" : "aic"; }

Criterion parse_criterion(const std::string& name) {
    if (name == "bic" || name == "BIC") return Criterion::bic;
    if (name == "aic" || name == "AIC") return Criterion::aic;
    throw ValidationError("unknown criterion '" + name + "' (expected bic or aic)");
}

int count_parameters(int K, int d) { return (K - 1) + K * d + K * d * (d + 1) / 2; }

double bic_score(double log_likelihood, int n_params, std::size_t n_obs) {
    return -2.0 * log_likelihood + n_params * std::log(static_cast<double>(n_obs));
}

double aic_score(double log_likelihood, int n_params) { return -2.0 * log_likelihood + 2.0 * n_params; }

FittedModel make_model(const EMResult& fit, const DataMatrix& data, Criterion criterion) {
    const int K = static_cast<int>(fit.mixture.size());
    const int p = count_parameters(K, fit.mixture.dim());
    const auto n = static_cast<std::size_t>(data.rows());
    FittedModel model{fit.mixture, fit.log_likelihood, p, n, criterion, {}, map_assign(fit.mixture, data)};
    model.criterion_scores[K] = {fit.log_likelihood, bic_score(fit.log_likelihood, p, n),
                                 aic_score(fit.log_likelihood, p)};
    return model;
}

FittedModel select_model(const DataMatrix& data, int k_min, int k_max, Criterion criterion, std::uint64_t seed,
                         const EMConfig& cfg) {
    if (k_min < 1 || k_max < k_min) throw ValidationError("select_model: need 1 <= k_min <= k_max");

    std::optional<EMResult> best;
    double best_score = std::numeric_limits<double>::infinity();
    std::map<int, CriterionScores> scores;
    std::ostringstream diagnostics;
    const auto n = static_cast<std::size_t>(data.rows());

    for (int K = k_min; K <= k_max; ++K) {
        if (static_cast<std::size_t>(K) >= n) {
            diagnostics << " K=" << K << ": too few observations;";
            continue;
        }
        try {
            auto fit = em_fit(data, K, seed, cfg);
            const int p = count_parameters(K, static_cast<int>(data.cols()));
            const CriterionScores s{fit.log_likelihood, bic_score(fit.log_likelihood, p, n),
                                    aic_score(fit.log_likelihood, p)};
            scores[K] = s;
            const double score = criterion == Criterion::bic ? s.bic : s.aic;
            if (score < best_score) {
                best_score = score;
                best = std::move(fit);
            }
        } catch (const NumericalError& e) {
            diagnostics << " K=" << K << ": " << e.what() << ";";
        }
    }
    if (!best) throw NumericalError("select_model: every K failed:" + diagnostics.str());

    FittedModel model = make_model(*best, data, criterion);
    model.criterion_scores = std::move(scores);
    return model;
}

std::vector<int> map_assign(const MixtureDensity& mix, const DataMatrix& data) {
    if (data.cols() != mix.dim()) throw ValidationError("map_assign: data dimension does not match the model");
    std::vector<int> labels(static_cast<std::size_t>(data.rows()), 0);
    const auto log_coefs = mix.log_coefs();
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const auto x = row_span(data, i);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < mix.size(); ++k) {
            const double v = log_coefs[k] + mix.terms()[k].component.log_pdf(x);
            if (v > best) {
                best = v;
                labels[static_cast<std::size_t>(i)] = static_cast<int>(k);
            }
        }
    }
    return labels;
}

}  // namespace hybridclust
