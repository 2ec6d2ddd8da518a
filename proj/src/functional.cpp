#include "hybridclust/functional.hpp"

#include "hybridclust/cubature.hpp"
#include "hybridclust/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hybridclust {

std::string to_string(IntegrationMode m) {
    switch (m) {
        case IntegrationMode::automatic: return "auto";
        case IntegrationMode::quadrature: return "quadrature";
        case IntegrationMode::importance: return "importance";
    }
    return "auto";
}

IntegrationMode parse_integration_mode(const std::string& name) {
    if (name == "auto") return IntegrationMode::automatic;
    if (name == "quadrature" || name == "quad") return IntegrationMode::quadrature;
    if (name == "importance" || name == "is") return IntegrationMode::importance;
    throw ValidationError("unknown integration mode '" + name + "' (expected auto, quadrature or importance)");
}

void IntegrationContext::validate() const {
    if (is_samples < 1000) throw ValidationError("integration: is_samples must be at least 1000");
    if (!(support_sigmas >= 6.0)) throw ValidationError("integration: support_sigmas must be at least 6");
    if (!(quad_rel_tol > 0.0) || !(quad_rel_tol_multi > 0.0) || !(quad_abs_tol > 0.0)) throw ValidationError("integration: tolerances must be positive");
}

bool IntegrationContext::uses_quadrature(int dim) const {
    switch (mode) {
        case IntegrationMode::quadrature: return true;
        case IntegrationMode::importance: return false;
        case IntegrationMode::automatic: return dim <= 2;
    }
    return dim <= 2;
}

// ---------------------------------------------------------------------------
// Importance sampling

ImportanceSample::ImportanceSample(MixtureDensity proposal, std::size_t m, std::uint64_t seed)
    : proposal_(std::move(proposal)) {
    if (m < 1) throw ValidationError("importance sample: need at least one point");
    points_ = sample(proposal_, m, seed);
    cache_.reserve(proposal_.size());
    for (const auto& t : proposal_.terms()) cache_.push_back(component_log_pdf(t.component));
    log_q_.resize(static_cast<Eigen::Index>(m));
    const auto log_coefs = proposal_.log_coefs();
    std::vector<double> buf(proposal_.size());
    for (Eigen::Index i = 0; i < log_q_.size(); ++i) {
        for (std::size_t k = 0; k < buf.size(); ++k) buf[k] = log_coefs[k] + cache_[k][i];
        log_q_[i] = log_sum_exp(buf);
    }
}

Eigen::VectorXd ImportanceSample::component_log_pdf(const GaussianComponent& c) const {
    Eigen::VectorXd out(points_.rows());
    for (Eigen::Index i = 0; i < points_.rows(); ++i) out[i] = c.log_pdf(row_span(points_, i));
    return out;
}

Eigen::VectorXd ImportanceSample::log_density(const MixtureDensity& f) const {
    if (f.dim() != proposal_.dim()) throw ValidationError("importance sample: dimension mismatch");
    std::vector<Eigen::VectorXd> owned;
    std::vector<const Eigen::VectorXd*> cols;
    owned.reserve(f.size());
    for (const auto& t : f.terms()) {
        const Eigen::VectorXd* hit = nullptr;
        for (std::size_t k = 0; k < proposal_.size(); ++k) {
            if (proposal_.terms()[k].component == t.component) {
                hit = &cache_[k];
                break;
            }
        }
        if (hit == nullptr) {
            owned.push_back(component_log_pdf(t.component));
            hit = &owned.back();
        }
        cols.push_back(hit);
    }
    const auto log_coefs = f.log_coefs();
    Eigen::VectorXd out(points_.rows());
    std::vector<double> buf(cols.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        for (std::size_t k = 0; k < cols.size(); ++k) buf[k] = log_coefs[k] + (*cols[k])[i];
        out[i] = log_sum_exp(buf);
    }
    return out;
}

namespace {

// Unique components across all inputs; each becomes one piece of the
// partition of unity used by the quadrature.
struct Anchors {
    std::vector<const GaussianComponent*> comps;
    std::vector<double> log_weight;
    std::vector<std::vector<std::pair<double, int>>> input_terms;  // (log coef, anchor index)
};

Anchors collect_anchors(std::span<const MixtureDensity> inputs, std::span<const GaussianComponent> extra = {}) {
    Anchors a;
    std::vector<double> weight;
    for (const auto& mix : inputs) {
        std::vector<std::pair<double, int>> terms;
        const auto log_coefs = mix.log_coefs();
        for (std::size_t k = 0; k < mix.size(); ++k) {
            const auto& c = mix.terms()[k].component;
            int idx = -1;
            for (std::size_t j = 0; j < a.comps.size(); ++j) {
                if (*a.comps[j] == c) {
                    idx = static_cast<int>(j);
                    break;
                }
            }
            if (idx < 0) {
                idx = static_cast<int>(a.comps.size());
                a.comps.push_back(&c);
                weight.push_back(0.0);
            }
            weight[static_cast<std::size_t>(idx)] += mix.terms()[k].coef;
            terms.emplace_back(log_coefs[k], idx);
        }
        a.input_terms.push_back(std::move(terms));
    }
    for (const auto& c : extra) {
        bool seen = false;
        for (const auto* known : a.comps) seen = seen || *known == c;
        if (seen) continue;
        a.comps.push_back(&c);
        weight.push_back(1.0);
    }
    for (double w : weight) a.log_weight.push_back(std::log(w));
    return a;
}

void add_unique_sorted(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v) {
        if (out.empty() || x - out.back() > 1e-9) out.push_back(x);
    }
    v.swap(out);
}

// Initial boxes for every piece in its anchor's whitened frame. The base
// grid is refined wherever another, narrower anchor sits inside the box so
// that its peak cannot fall between rule nodes.
std::vector<cubature::Box> initial_boxes(const Anchors& a, double S) {
    const int d = a.comps.front()->dim();
    std::vector<cubature::Box> boxes;
    for (std::size_t t = 0; t < a.comps.size(); ++t) {
        const auto& anchor = *a.comps[t];
        std::vector<std::vector<double>> lines(static_cast<std::size_t>(d), std::vector<double>{-S, -3.0, 0.0, 3.0, S});
        for (std::size_t j = 0; j < a.comps.size(); ++j) {
            if (j == t) continue;
            const auto& other = *a.comps[j];
            const Eigen::VectorXd center = anchor.inv_chol() * (other.mean() - anchor.mean());
            const Eigen::MatrixXd w = anchor.inv_chol() * other.chol();
            const Eigen::VectorXd spread = w.rowwise().norm();
            if (d == 1) {
                for (double m : {-6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0}) {
                    const double p = center[0] + m * spread[0];
                    if (p > -S && p < S) lines[0].push_back(p);
                }
                continue;
            }
            if (spread.maxCoeff() >= 1.0 || center.cwiseAbs().maxCoeff() >= S) continue;
            for (int i = 0; i < d; ++i) {
                for (double m : {-3.0, 0.0, 3.0}) {
                    const double p = center[i] + m * spread[i];
                    if (p > -S && p < S) lines[static_cast<std::size_t>(i)].push_back(p);
                }
            }
        }
        for (auto& l : lines) add_unique_sorted(l);

        std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
        while (true) {
            cubature::Box b;
            b.tag = static_cast<int>(t);
            for (int i = 0; i < d; ++i) {
                const auto& l = lines[static_cast<std::size_t>(i)];
                b.lo.push_back(l[idx[static_cast<std::size_t>(i)]]);
                b.hi.push_back(l[idx[static_cast<std::size_t>(i)] + 1]);
            }
            boxes.push_back(std::move(b));
            int i = 0;
            for (; i < d; ++i) {
                auto& k = idx[static_cast<std::size_t>(i)];
                if (++k + 1 < lines[static_cast<std::size_t>(i)].size()) break;
                k = 0;
            }
            if (i == d) break;
        }
    }
    return boxes;
}

template <std::size_t N>
std::array<FunctionalEstimate, N> by_quadrature(std::span<const MixtureDensity> inputs, const PointwiseIntegrand<N>& h,
                                                const IntegrationContext& ctx, std::span<const GaussianComponent> extra) {
    const Anchors a = collect_anchors(inputs, extra);
    const int d = inputs.front().dim();
    const std::size_t nc = a.comps.size();
    std::vector<double> log_jacobian(nc);
    for (std::size_t t = 0; t < nc; ++t) log_jacobian[t] = 0.5 * a.comps[t]->log_det();

    std::vector<double> x(static_cast<std::size_t>(d));
    std::vector<double> lphi(nc), buf(nc), lf(inputs.size());

    auto f = [&](int tag, std::span<const double> z) -> cubature::Values<N> {
        const auto t = static_cast<std::size_t>(tag);
        const auto& anchor = *a.comps[t];
        const Eigen::MatrixXd& L = anchor.chol();
        for (int i = 0; i < d; ++i) {
            double v = anchor.mean()[i];
            for (int k = 0; k <= i; ++k) v += L(i, k) * z[static_cast<std::size_t>(k)];
            x[static_cast<std::size_t>(i)] = v;
        }
        for (std::size_t c = 0; c < nc; ++c) {
            lphi[c] = a.comps[c]->log_pdf(std::span<const double>(x));
            buf[c] = a.log_weight[c] + lphi[c];
        }
        const double log_share = buf[t] - log_sum_exp(buf) + log_jacobian[t];
        cubature::Values<N> out{};
        const double share = std::exp(log_share);
        if (share == 0.0) return out;
        for (std::size_t m = 0; m < inputs.size(); ++m) {
            const auto& terms = a.input_terms[m];
            std::size_t k = 0;
            for (const auto& [lc, idx] : terms) buf[k++] = lc + lphi[static_cast<std::size_t>(idx)];
            lf[m] = log_sum_exp(std::span<const double>(buf.data(), terms.size()));
        }
        const auto v = h(lf);
        for (std::size_t j = 0; j < N; ++j) out[j] = v[j] * share;
        return out;
    };

    cubature::Options opt;
    opt.rel_tol = ctx.rel_tol_for(inputs.front().dim());
    opt.abs_tol = ctx.quad_abs_tol;
    opt.max_evaluations = ctx.max_evaluations;
    const auto res = cubature::integrate<N>(initial_boxes(a, ctx.support_sigmas), f, opt);

    std::array<FunctionalEstimate, N> out;
    for (std::size_t j = 0; j < N; ++j) {
        if (!std::isfinite(res.value[j])) throw NumericalError("quadrature: non-finite integral");
        out[j] = FunctionalEstimate{res.value[j], 0.0, res.error[j], IntegrationMode::quadrature};
    }
    return out;
}

MixtureDensity default_proposal(std::span<const MixtureDensity> inputs) {
    const Anchors a = collect_anchors(inputs);
    std::vector<MixtureTerm> terms;
    for (const auto* c : a.comps) terms.push_back({1.0 / static_cast<double>(a.comps.size()), *c});
    return MixtureDensity(std::move(terms));
}

template <std::size_t N>
std::array<FunctionalEstimate, N> by_sampling(std::span<const MixtureDensity> inputs, const PointwiseIntegrand<N>& h,
                                              const IntegrationContext& ctx) {
    std::shared_ptr<const ImportanceSample> is = ctx.sample;
    if (!is) is = std::make_shared<ImportanceSample>(default_proposal(inputs), ctx.is_samples, ctx.seed);
    if (is->proposal().dim() != inputs.front().dim()) throw ValidationError("importance sample: dimension mismatch");

    std::vector<Eigen::VectorXd> lf;
    for (const auto& m : inputs) lf.push_back(is->log_density(m));

    const auto M = static_cast<Eigen::Index>(is->size());
    std::array<double, N> mean{}, m2{};
    std::vector<double> point(inputs.size());
    for (Eigen::Index i = 0; i < M; ++i) {
        for (std::size_t m = 0; m < inputs.size(); ++m) point[m] = lf[m][i];
        const auto v = h(point);
        const double w = std::exp(-is->log_proposal()[i]);
        const double count = static_cast<double>(i + 1);
        for (std::size_t j = 0; j < N; ++j) {
            const double y = v[j] * w;
            const double delta = y - mean[j];
            mean[j] += delta / count;
            m2[j] += delta * (y - mean[j]);
        }
    }
    std::array<FunctionalEstimate, N> out;
    const double md = static_cast<double>(M);
    for (std::size_t j = 0; j < N; ++j) {
        if (!std::isfinite(mean[j])) throw NumericalError("importance sampling: non-finite estimate");
        const double sd = M > 1 ? std::sqrt(m2[j] / (md - 1.0)) : 0.0;
        out[j] = FunctionalEstimate{mean[j], sd / std::sqrt(md), 0.0, IntegrationMode::importance};
    }
    return out;
}

}  // namespace

template <std::size_t N>
std::array<FunctionalEstimate, N> integrate_pointwise(std::span<const MixtureDensity> inputs,
                                                      const PointwiseIntegrand<N>& h, const IntegrationContext& ctx,
                                                      std::span<const GaussianComponent> extra_anchors) {
    ctx.validate();
    if (inputs.empty()) throw ValidationError("integrate: no input densities");
    const int d = inputs.front().dim();
    for (const auto& m : inputs) {
        if (m.dim() != d) throw ValidationError("integrate: input densities differ in dimension");
    }
    for (const auto& c : extra_anchors) {
        if (c.dim() != d) throw ValidationError("integrate: extra anchor differs in dimension");
    }
    return ctx.uses_quadrature(d) ? by_quadrature<N>(inputs, h, ctx, extra_anchors) : by_sampling<N>(inputs, h, ctx);
}

template std::array<FunctionalEstimate, 1> integrate_pointwise<1>(std::span<const MixtureDensity>,
                                                                  const PointwiseIntegrand<1>&,
                                                                  const IntegrationContext&,
                                                                  std::span<const GaussianComponent>);
template std::array<FunctionalEstimate, 2> integrate_pointwise<2>(std::span<const MixtureDensity>,
                                                                  const PointwiseIntegrand<2>&,
                                                                  const IntegrationContext&,
                                                                  std::span<const GaussianComponent>);
template std::array<FunctionalEstimate, 3> integrate_pointwise<3>(std::span<const MixtureDensity>,
                                                                  const PointwiseIntegrand<3>&,
                                                                  const IntegrationContext&,
                                                                  std::span<const GaussianComponent>);

FunctionalEstimate entropy_functional(double scale, const MixtureDensity& mix, const IntegrationContext& ctx) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("entropy: scale must be positive and finite");
    const double log_scale = std::log(scale);
    const PointwiseIntegrand<1> h = [scale, log_scale](std::span<const double> lf) {
        const double lg = clamp_log(log_scale + lf[0]);
        return std::array<double, 1>{-scale * std::exp(lf[0]) * lg};
    };
    return integrate_pointwise<1>(std::span<const MixtureDensity>(&mix, 1), h, ctx)[0];
}

FunctionalEstimate kl_information(const MixtureDensity& p, const MixtureDensity& q, const IntegrationContext& ctx) {
    const std::array<MixtureDensity, 2> in{p, q};
    const PointwiseIntegrand<1> h = [](std::span<const double> lf) {
        return std::array<double, 1>{std::exp(lf[0]) * (lf[0] - lf[1])};
    };
    return integrate_pointwise<1>(in, h, ctx)[0];
}

namespace {

// sqrt(N(a) N(b)) is proportional to a Gaussian; for far-apart pairs its
// mass sits between the two components, outside both of their supports.
GaussianComponent geometric_mean_component(const GaussianComponent& a, const GaussianComponent& b) {
    const Eigen::MatrixXd pa = a.inv_chol().transpose() * a.inv_chol();
    const Eigen::MatrixXd pb = b.inv_chol().transpose() * b.inv_chol();
    const Eigen::MatrixXd precision = 0.5 * (pa + pb);
    Eigen::MatrixXd cov = precision.inverse();
    cov = 0.5 * (cov + cov.transpose()).eval();
    const Eigen::VectorXd mean = cov * (0.5 * (pa * a.mean() + pb * b.mean()));
    return GaussianComponent(mean, cov);
}

double mahalanobis(const GaussianComponent& c, const Eigen::VectorXd& x) {
    return (c.inv_chol() * (x - c.mean())).norm();
}

// Rough log of the peak of sqrt(p q), scanned along the segments joining
// means of p to means of q and at the extra anchors.
double log_peak_geometric_mean(const MixtureDensity& p, const MixtureDensity& q,
                               std::span<const GaussianComponent> extra) {
    double best = -std::numeric_limits<double>::infinity();
    auto probe = [&](const Eigen::VectorXd& x) { best = std::max(best, 0.5 * (p.log_pdf(x) + q.log_pdf(x))); };
    for (const auto& a : p.terms()) {
        for (const auto& b : q.terms()) {
            for (int i = 0; i <= 32; ++i) {
                const double t = i / 32.0;
                probe((1.0 - t) * a.component.mean() + t * b.component.mean());
            }
        }
    }
    for (const auto& c : extra) probe(c.mean());
    return best;
}

}  // namespace

FunctionalEstimate bhattacharyya_distance(const MixtureDensity& p, const MixtureDensity& q,
                                          const IntegrationContext& ctx) {
    if (p.dim() != q.dim()) throw ValidationError("bhattacharyya: dimension mismatch");
    // Integrate rho * exp(-shift) so that tolerances stay meaningful when rho
    // is far below the absolute tolerance.
    std::vector<GaussianComponent> extra;
    for (const auto& a : p.terms()) {
        for (const auto& b : q.terms()) {
            auto g = geometric_mean_component(a.component, b.component);
            const double reach = 0.5 * ctx.support_sigmas;
            if (mahalanobis(a.component, g.mean()) > reach && mahalanobis(b.component, g.mean()) > reach)
                extra.push_back(std::move(g));
        }
    }
    const double shift = log_peak_geometric_mean(p, q, extra);
    const std::array<MixtureDensity, 2> in{p, q};
    const PointwiseIntegrand<1> h = [shift](std::span<const double> lf) {
        return std::array<double, 1>{std::exp(0.5 * (lf[0] + lf[1]) - shift)};
    };
    auto est = integrate_pointwise<1>(in, h, ctx, extra)[0];
    if (!(est.value > 0.0)) throw NumericalError("bhattacharyya: non-positive coefficient estimate");
    const double scaled = est.value;
    est.value = -(shift + std::log(scaled));
    est.std_error /= scaled;
    est.abs_error /= scaled;
    return est;
}

FunctionalEstimate bhattacharyya_coeff(const MixtureDensity& p, const MixtureDensity& q,
                                       const IntegrationContext& ctx) {
    auto est = bhattacharyya_distance(p, q, ctx);
    const double rho = std::exp(-est.value);
    est.value = rho;
    est.std_error *= rho;
    est.abs_error *= rho;
    return est;
}

FunctionalEstimate bayes_overlap(double wp, const MixtureDensity& p, double wq, const MixtureDensity& q,
                                 const IntegrationContext& ctx) {
    if (!(wp > 0.0) || !(wq > 0.0) || std::abs(wp + wq - 1.0) > 1e-12)
        throw ValidationError("bayes_overlap: weights must be positive and sum to one");
    const std::array<MixtureDensity, 2> in{p, q};
    const double lwp = std::log(wp), lwq = std::log(wq);
    const PointwiseIntegrand<1> h = [lwp, lwq](std::span<const double> lf) {
        return std::array<double, 1>{std::exp(std::min(lwp + lf[0], lwq + lf[1]))};
    };
    // Err = 1 - overlap is of order one, so the overlap only needs absolute
    // accuracy at the relative level; tiny overlaps need not be resolved further.
    IntegrationContext local = ctx;
    local.quad_abs_tol = std::max(ctx.quad_abs_tol, ctx.rel_tol_for(p.dim()));
    return integrate_pointwise<1>(in, h, local)[0];
}

double gauss_kl_closed(const GaussianComponent& a, const GaussianComponent& b) {
    if (a.dim() != b.dim()) throw ValidationError("gauss_kl_closed: dimension mismatch");
    const Eigen::MatrixXd w = b.inv_chol() * a.chol();
    const Eigen::VectorXd delta = b.inv_chol() * (b.mean() - a.mean());
    return 0.5 * (w.squaredNorm() + delta.squaredNorm() - a.dim() + b.log_det() - a.log_det());
}

double gauss_bhat_closed(const GaussianComponent& a, const GaussianComponent& b) {
    if (a.dim() != b.dim()) throw ValidationError("gauss_bhat_closed: dimension mismatch");
    const Eigen::MatrixXd avg = 0.5 * (a.cov() + b.cov());
    const Eigen::LLT<Eigen::MatrixXd> llt(avg);
    if (llt.info() != Eigen::Success) throw NumericalError("gauss_bhat_closed: averaged covariance is not SPD");
    const Eigen::VectorXd delta = b.mean() - a.mean();
    const Eigen::VectorXd solved = llt.matrixL().solve(delta);
    const double log_det_avg = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return 0.125 * solved.squaredNorm() + 0.5 * (log_det_avg - 0.5 * (a.log_det() + b.log_det()));
}

}  // namespace hybridclust
