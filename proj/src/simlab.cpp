#include "hybridclust/simlab.hpp"

#include "hybridclust/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace hybridclust {

namespace {

using Row3 = std::array<double, 3>;

constexpr std::array<Row3, 3> kHeavyMeans = {{{0, 0, 0}, {20, 15, 10}, {15, -15, 10}}};
constexpr std::array<Row3, 3> kUniformLo = {{{-5, -5, -5}, {5, 5, 5}, {10, 5, 5}}};
constexpr std::array<Row3, 3> kUniformHi = {{{6, 6, 6}, {10, 10, 10}, {20, 20, 20}}};
constexpr std::array<Row3, 3> kGammaShift = {{{0, 0, 0}, {0, -2, 10}, {10, 10, 10}}};
constexpr std::array<std::array<double, 4>, 3> kGammaShape = {{{1, 2, 4, 4}, {0.5, 1, 2, 2}, {2, 2, 5, 5}}};
constexpr std::array<Row3, 3> kGammaScale = {{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}};
constexpr std::array<Row3, 3> kNoiseMeans = {{{0, 0, 0}, {2, 3, 2}, {5, -2, 10}}};
constexpr std::array<double, 3> kNoiseVar = {1, 2, 2};
constexpr double kNoiseLo = -30.0;
constexpr double kNoiseHi = 40.0;
constexpr std::array<Row3, 3> kLaplaceMeans = {{{0, 0, 0}, {15, -5, 10}, {5, -10, 15}}};
constexpr double kLaplaceGaussVar = 5.0;
constexpr double kLaplaceRate = 0.1;
constexpr double kLaplaceGaussShare = 0.5;

using Engine = std::mt19937_64;

void draw_t(Engine& rng, const Row3& mu, double nu, int d, double* out) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::chi_squared_distribution<double> chi(nu);
    double g[3];
    for (int j = 0; j < d; ++j) g[j] = z(rng);
    const double scale = std::sqrt(nu / chi(rng));
    for (int j = 0; j < d; ++j) out[j] = mu[j] + scale * g[j];
}

void draw_gamma(Engine& rng, int c, int d, double* out) {
    const auto& a = kGammaShape[c];
    std::gamma_distribution<double> common(a[0], 1.0);
    const double x0 = common(rng);
    for (int j = 0; j < d; ++j) {
        std::gamma_distribution<double> own(a[j + 1], 1.0);
        out[j] = kGammaScale[c][j] * (x0 + own(rng)) + kGammaShift[c][j];
    }
}

void draw_laplace_mix(Engine& rng, const Row3& mu, int d, double* out) {
    std::bernoulli_distribution gaussian(kLaplaceGaussShare);
    if (gaussian(rng)) {
        std::normal_distribution<double> z(0.0, std::sqrt(kLaplaceGaussVar));
        for (int j = 0; j < d; ++j) out[j] = mu[j] + z(rng);
    } else {
        std::exponential_distribution<double> e(kLaplaceRate);
        std::bernoulli_distribution sign(0.5);
        for (int j = 0; j < d; ++j) out[j] = mu[j] + (sign(rng) ? e(rng) : -e(rng));
    }
}

// Relabels the distinct values to 0..n-1 in increasing order.
std::vector<int> compact(const std::vector<int>& labels, int& count) {
    std::set<int> distinct(labels.begin(), labels.end());
    std::map<int, int> index;
    for (int v : distinct) index.emplace(v, static_cast<int>(index.size()));
    count = static_cast<int>(index.size());
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = index.at(labels[i]);
    return out;
}

struct Confusion {
    int rows = 0;
    int classes = 0;
    std::vector<std::vector<long>> count;  // count[row][class]
    long total = 0;
};

Confusion confusion(const std::vector<int>& labels, const std::vector<int>& true_labels,
                    const std::vector<bool>& noise_mask) {
    if (labels.size() != true_labels.size() || labels.size() != noise_mask.size())
        throw ValidationError("misclassification: label vectors differ in length");
    std::vector<int> kept_truth;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!noise_mask[i]) kept_truth.push_back(true_labels[i]);
    }
    if (kept_truth.empty()) throw ValidationError("misclassification: no non-noise points");
    Confusion c;
    const auto rows = compact(labels, c.rows);
    const auto truth = compact(kept_truth, c.classes);
    c.count.assign(static_cast<std::size_t>(c.rows), std::vector<long>(static_cast<std::size_t>(c.classes), 0));
    std::size_t t = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (noise_mask[i]) continue;
        ++c.count[static_cast<std::size_t>(rows[i])][static_cast<std::size_t>(truth[t++])];
        ++c.total;
    }
    return c;
}

}  // namespace

std::string to_string(Family f) {
    switch (f) {
        case Family::student_t: return "student_t";
        case Family::cauchy: return "cauchy";
        case Family::uniform: return "uniform";
        case Family::gamma: return "gamma";
        case Family::gauss_noise: return "gauss_noise";
        case Family::gauss_laplace: return "gauss_laplace";
    }
    return "?";
}

Family parse_family(const std::string& name) {
    for (auto f : {Family::student_t, Family::cauchy, Family::uniform, Family::gamma, Family::gauss_noise,
                   Family::gauss_laplace}) {
        if (to_string(f) == name) return f;
    }
    throw ValidationError("unknown distribution '" + name +
                          "' (expected student_t, cauchy, uniform, gamma, gauss_noise or gauss_laplace)");
}

std::string to_string(SampleSize s) { return s == SampleSize::small ? "small" : "large"; }

SampleSize parse_sample_size(const std::string& name) {
    if (name == "small") return SampleSize::small;
    if (name == "large") return SampleSize::large;
    throw ValidationError("unknown size '" + name + "' (expected small or large)");
}

void ScenarioC::validate() const {
    if (dim != 2 && dim != 3) throw ValidationError("scenario: dim must be 2 or 3");
}

std::array<int, 3> ScenarioC::cluster_sizes() const {
    const int f = size == SampleSize::small ? 1 : 10;
    return {f * dim * 100, f * dim * 100, f * dim * 50};
}

int ScenarioC::noise_count() const { return family == Family::gauss_noise ? dim * 50 : 0; }

LabeledSample generate(const ScenarioC& scn, std::uint64_t seed) {
    scn.validate();
    const int d = scn.dim;
    const auto sizes = scn.cluster_sizes();
    const int n_noise = scn.noise_count();
    const int n = sizes[0] + sizes[1] + sizes[2] + n_noise;

    LabeledSample out;
    out.points.resize(n, d);
    out.true_labels.assign(static_cast<std::size_t>(n), -1);
    out.noise_mask.assign(static_cast<std::size_t>(n), false);

    Engine rng(seed);
    int row = 0;
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < sizes[c]; ++i, ++row) {
            double* x = out.points.data() + static_cast<Eigen::Index>(row) * d;
            out.true_labels[static_cast<std::size_t>(row)] = c;
            switch (scn.family) {
                case Family::student_t: draw_t(rng, kHeavyMeans[c], 2.0, d, x); break;
                case Family::cauchy: draw_t(rng, kHeavyMeans[c], 1.0, d, x); break;
                case Family::uniform:
                    for (int j = 0; j < d; ++j) {
                        std::uniform_real_distribution<double> u(kUniformLo[c][j], kUniformHi[c][j]);
                        x[j] = u(rng);
                    }
                    break;
                case Family::gamma: draw_gamma(rng, c, d, x); break;
                case Family::gauss_noise: {
                    std::normal_distribution<double> z(0.0, std::sqrt(kNoiseVar[c]));
                    for (int j = 0; j < d; ++j) x[j] = kNoiseMeans[c][j] + z(rng);
                    break;
                }
                case Family::gauss_laplace: draw_laplace_mix(rng, kLaplaceMeans[c], d, x); break;
            }
        }
    }
    std::uniform_real_distribution<double> background(kNoiseLo, kNoiseHi);
    for (int i = 0; i < n_noise; ++i, ++row) {
        for (int j = 0; j < d; ++j) out.points(row, j) = background(rng);
        out.noise_mask[static_cast<std::size_t>(row)] = true;
    }
    return out;
}

double misclassification_rate(const std::vector<int>& final_labels, const std::vector<int>& true_labels,
                              const std::vector<bool>& noise_mask) {
    const Confusion c = confusion(final_labels, true_labels, noise_mask);
    if (c.rows != c.classes)
        throw ValidationError("misclassification: " + std::to_string(c.rows) + " final labels for " +
                              std::to_string(c.classes) + " true classes");
    if (c.classes > 8) throw ValidationError("misclassification: more than 8 classes");
    std::vector<int> perm(static_cast<std::size_t>(c.classes));
    std::iota(perm.begin(), perm.end(), 0);
    long best = 0;
    do {
        long hit = 0;
        for (int r = 0; r < c.rows; ++r) hit += c.count[static_cast<std::size_t>(r)][static_cast<std::size_t>(perm[r])];
        best = std::max(best, hit);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(c.total - best) / static_cast<double>(c.total);
}

double min_misclassification(const std::vector<int>& map_labels, const std::vector<int>& true_labels,
                             const std::vector<bool>& noise_mask) {
    const Confusion c = confusion(map_labels, true_labels, noise_mask);
    if (c.rows < c.classes)
        throw ValidationError("min misclassification: " + std::to_string(c.rows) + " subclusters for " +
                              std::to_string(c.classes) + " true classes");
    if (c.classes > 16) throw ValidationError("min misclassification: more than 16 classes");
    // Each subcluster goes to one class; every class needs at least one
    // subcluster. best[mask] is the most correctly placed points with the
    // classes in `mask` covered so far.
    const std::size_t full = (std::size_t{1} << c.classes) - 1;
    constexpr long unreachable = -1;
    std::vector<long> best(full + 1, unreachable);
    best[0] = 0;
    for (int r = 0; r < c.rows; ++r) {
        std::vector<long> next(full + 1, unreachable);
        for (std::size_t mask = 0; mask <= full; ++mask) {
            if (best[mask] == unreachable) continue;
            for (int k = 0; k < c.classes; ++k) {
                const std::size_t to = mask | (std::size_t{1} << k);
                const long v = best[mask] + c.count[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)];
                next[to] = std::max(next[to], v);
            }
        }
        best = std::move(next);
    }
    return static_cast<double>(c.total - best[full]) / static_cast<double>(c.total);
}

double min_misclassification_exhaustive(const std::vector<int>& map_labels, const std::vector<int>& true_labels,
                                        const std::vector<bool>& noise_mask) {
    const Confusion c = confusion(map_labels, true_labels, noise_mask);
    if (c.rows < c.classes) throw ValidationError("min misclassification: fewer subclusters than classes");
    if (c.rows > 12) throw ValidationError("exhaustive min misclassification: more than 12 subclusters");
    std::vector<int> assign(static_cast<std::size_t>(c.rows), 0);
    long best = -1;
    while (true) {
        std::vector<bool> covered(static_cast<std::size_t>(c.classes), false);
        long hit = 0;
        for (int r = 0; r < c.rows; ++r) {
            covered[static_cast<std::size_t>(assign[r])] = true;
            hit += c.count[static_cast<std::size_t>(r)][static_cast<std::size_t>(assign[r])];
        }
        if (std::all_of(covered.begin(), covered.end(), [](bool b) { return b; })) best = std::max(best, hit);
        int pos = 0;
        while (pos < c.rows && ++assign[static_cast<std::size_t>(pos)] == c.classes) assign[static_cast<std::size_t>(pos++)] = 0;
        if (pos == c.rows) break;
    }
    return static_cast<double>(c.total - best) / static_cast<double>(c.total);
}

std::vector<int> final_labels(const ClusterState& state, const std::vector<int>& map_labels) {
    std::map<int, int> owner;
    for (std::size_t s = 0; s < state.size(); ++s) {
        for (int m : state.subclusters[s].members) owner[m] = static_cast<int>(s);
    }
    std::vector<int> out(map_labels.size());
    for (std::size_t i = 0; i < map_labels.size(); ++i) {
        const auto it = owner.find(map_labels[i]);
        if (it == owner.end()) throw ValidationError("final labels: component without a cluster");
        out[i] = it->second;
    }
    return out;
}

std::vector<RunSummary> summarize(const ScenarioC& scn, const ExperimentConfig& cfg,
                                  const std::vector<RepResult>& rows) {
    std::vector<RunSummary> out;
    for (auto crit : cfg.criteria) {
        for (auto m : cfg.measures) {
            std::vector<double> ex, mis;
            for (const auto& r : rows) {
                if (r.criterion == crit && r.measure == m) {
                    ex.push_back(r.excess);
                    mis.push_back(r.misclass);
                }
            }
            RunSummary s{crit, m, scn.dim, scn.size, static_cast<int>(ex.size()), 0.0, 0.0, 0.0};
            if (!ex.empty()) {
                const double n = static_cast<double>(ex.size());
                s.mean_excess = std::accumulate(ex.begin(), ex.end(), 0.0) / n;
                s.mean_misclass = std::accumulate(mis.begin(), mis.end(), 0.0) / n;
                if (ex.size() >= 2) {
                    double ss = 0.0;
                    for (double v : ex) ss += (v - s.mean_excess) * (v - s.mean_excess);
                    s.ci_half_width = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
                } else {
                    s.ci_half_width = std::numeric_limits<double>::quiet_NaN();
                }
            }
            out.push_back(s);
        }
    }
    return out;
}

ExperimentResult run_experiment(const ScenarioC& scn, const ExperimentConfig& cfg) {
    scn.validate();
    if (cfg.reps < 2) throw ValidationError("simulate: reps must be at least 2");
    if (cfg.clusters < 1) throw ValidationError("simulate: clusters must be positive");
    if (cfg.measures.empty() || cfg.criteria.empty()) throw ValidationError("simulate: nothing to run");
    cfg.integration.validate();

    std::vector<std::vector<RepResult>> per_rep(static_cast<std::size_t>(cfg.reps));
    std::vector<std::string> failed(static_cast<std::size_t>(cfg.reps));
    std::vector<std::exception_ptr> fatal(static_cast<std::size_t>(cfg.reps));

#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < cfg.reps; ++r) {
        try {
            const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(r);
            const LabeledSample sample = generate(scn, seed);
            for (auto crit : cfg.criteria) {
                const FittedModel model = select_model(sample.points, cfg.k_min, cfg.k_max, crit, seed, cfg.em);
                if (model.K() < cfg.clusters) {
                    throw NumericalError("selected K = " + std::to_string(model.K()) + " is below " +
                                         std::to_string(cfg.clusters) + " clusters");
                }
                const double floor = min_misclassification(model.map_labels, sample.true_labels, sample.noise_mask);
                const ClusterState start = ClusterState::from_mixture(model.mixture);
                IntegrationContext ctx = cfg.integration;
                ctx.seed = seed;
                ctx = merge_context(start, ctx);
                for (auto m : cfg.measures) {
                    const MergeRun run = run_to_c(start, m, cfg.clusters, ctx);
                    const double mis = misclassification_rate(final_labels(run.state, model.map_labels),
                                                              sample.true_labels, sample.noise_mask);
                    per_rep[static_cast<std::size_t>(r)].push_back({r, crit, m, model.K(), mis, floor, mis - floor});
                }
            }
        } catch (const NumericalError& e) {
            per_rep[static_cast<std::size_t>(r)].clear();
            failed[static_cast<std::size_t>(r)] = e.what();
        } catch (...) {
            fatal[static_cast<std::size_t>(r)] = std::current_exception();
        }
    }
    for (const auto& e : fatal) {
        if (e) std::rethrow_exception(e);
    }

    ExperimentResult out;
    out.scenario = scn;
    for (int r = 0; r < cfg.reps; ++r) {
        const auto& rows = per_rep[static_cast<std::size_t>(r)];
        out.rows.insert(out.rows.end(), rows.begin(), rows.end());
        if (!failed[static_cast<std::size_t>(r)].empty()) out.failures.push_back({r, failed[static_cast<std::size_t>(r)]});
    }
    out.summary = summarize(scn, cfg, out.rows);
    return out;
}

}  // namespace hybridclust
