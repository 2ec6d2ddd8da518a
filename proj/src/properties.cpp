#include "hybridclust/properties.hpp"

#include "hybridclust/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <sstream>

namespace hybridclust {

namespace {

constexpr double kExactTol = 1e-6;
constexpr double kLimitRel = 1e-4;
constexpr double kMonotoneSlack = 1e-9;
constexpr double kOrderingMargin = 1e-6;

MixtureDensity normal(double mean, double sd) {
    return MixtureDensity(GaussianComponent::univariate(mean, sd * sd));
}

double checked(Measure m, const WeightedPair& pair, const IntegrationContext& ctx) {
    const double v = evaluate(m, pair, ctx);
    if (!std::isfinite(v)) throw NumericalError(to_string(m) + ": non-finite value");
    return v;
}

std::vector<WeightedPair> equality_probes() {
    std::vector<WeightedPair> out;
    for (double pi : {0.1, 0.25, 0.5}) out.emplace_back(pi, normal(0, 1), pi, normal(0, 1));
    return out;
}

WeightedPair separated(double wk, double wl, double gap) { return WeightedPair(wk, normal(0, 1), wl, normal(gap, 1)); }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

bool monotone(const std::vector<TracePoint>& trace, bool increasing) {
    for (std::size_t i = 1; i < trace.size(); ++i) {
        const double step = trace[i].value - trace[i - 1].value;
        if (increasing ? step < -kMonotoneSlack : step > kMonotoneSlack) return false;
    }
    return true;
}

// Appends a limit trace and tells whether the limit reaches the given end of
// the probe range. Throws when the sequence neither settles nor diverges.
bool reaches(LimitEstimate est, bool toward_sup, bool need_monotone, const ProbeExtremes& ex, PropertyVerdict& v) {
    v.limit_trace.insert(v.limit_trace.end(), est.trace.begin(), est.trace.end());
    const std::string& name = est.trace.front().sequence;
    if (est.kind == LimitEstimate::Kind::undecided) {
        throw NumericalError(name + ": sequence neither settled nor diverged (last value " + fmt(est.limit) + ")");
    }
    if (need_monotone && !monotone(est.trace, toward_sup)) {
        v.detail += name + ": not monotone; ";
        return false;
    }
    const double tol = kLimitRel * ex.range();
    const bool ok = toward_sup ? (est.kind == LimitEstimate::Kind::diverged_up || est.limit >= ex.sup - tol)
                               : (est.kind == LimitEstimate::Kind::diverged_down || est.limit <= ex.inf + tol);
    v.detail += name + ": limit " + fmt(est.limit) + (ok ? " reaches " : " misses ") + (toward_sup ? "sup; " : "inf; ");
    return ok;
}

bool check_symmetry(Measure m, const IntegrationContext& ctx, PropertyVerdict& v) {
    const auto cat = probe_catalog();
    double worst = 0.0;
    for (std::size_t i = 0; i < cat.size(); ++i) {
        const double gap = std::abs(checked(m, cat[i], ctx) - checked(m, cat[i].swapped(), ctx));
        v.limit_trace.push_back({"catalog", static_cast<double>(i), gap});
        worst = std::max(worst, gap);
    }
    v.detail = "max |D(k,l) - D(l,k)| = " + fmt(worst);
    return worst < kExactTol;
}

bool check_equality(Measure m, const ProbeExtremes& ex, const IntegrationContext& ctx, PropertyVerdict& v) {
    bool ok = true;
    for (const auto& probe : equality_probes()) {
        const double d = checked(m, probe, ctx);
        v.limit_trace.push_back({"identical", probe.pi_k, d});
        ok = ok && d <= ex.inf + kExactTol;
    }
    v.detail = ok ? "identical pairs attain the minimum" : "an identical pair lies above the minimum";
    return ok;
}

bool check_orthogonality(Measure m, const ProbeExtremes& ex, const IntegrationContext& ctx, PropertyVerdict& v) {
    const double tol = kLimitRel * ex.range();
    bool ok = true;
    for (auto [wk, wl] : {std::pair{0.5, 0.5}, std::pair{0.8, 0.2}}) {
        const std::string name = "gap@" + fmt(wk) + "/" + fmt(wl);
        auto est = estimate_limit(
            name, {10.0, 20.0, 40.0}, [](double g) { return 2.0 * g; },
            [&](double g) { return checked(m, separated(wk, wl, g), ctx); }, tol);
        ok = reaches(std::move(est), true, true, ex, v) && ok;
    }
    return ok;
}

std::vector<double> decades(int from, int to) {
    std::vector<double> out;
    for (int k = from; k <= to; ++k) out.push_back(std::pow(10.0, -k));
    return out;
}

bool check_outlier(Measure m, const ProbeExtremes& ex, const IntegrationContext& ctx, PropertyVerdict& v) {
    const double tol = kLimitRel * ex.range();
    auto shrink = [](double pi) { return 0.1 * pi; };
    auto dominant = estimate_limit(
        "pi@(1-pi,pi)", decades(1, 6), shrink,
        [&](double pi) { return checked(m, WeightedPair(1.0 - pi, normal(0, 1), pi, normal(1, 1)), ctx); }, tol);
    auto both = estimate_limit(
        "pi@(pi,pi)", decades(1, 6), shrink,
        [&](double pi) { return checked(m, WeightedPair(pi, normal(0, 1), pi, normal(1, 1)), ctx); }, tol);
    const bool a = reaches(std::move(dominant), false, false, ex, v);
    const bool b = reaches(std::move(both), false, false, ex, v);
    return a && b;
}

bool check_noise(Measure m, const ProbeExtremes& ex, const IntegrationContext& ctx, PropertyVerdict& v) {
    const double tol = kLimitRel * ex.range();
    auto est = estimate_limit(
        "sigma", {5.0, 15.0, 50.0, 150.0}, [](double s) { return s * std::sqrt(10.0); },
        [&](double s) { return checked(m, WeightedPair(0.5, normal(0, s), 0.5, normal(0, 1)), ctx); }, tol);
    return reaches(std::move(est), false, false, ex, v);
}

bool check_mode(Measure m, const ProbeExtremes& ex, const IntegrationContext& ctx, PropertyVerdict& v) {
    const double tol = kLimitRel * ex.range();
    auto at = [&](double a) { return checked(m, WeightedPair(0.5, normal(0, 1), 0.5, normal(0, std::sqrt(a))), ctx); };
    auto narrow = estimate_limit(
        "a->0", {0.5, 0.1, 0.01, 0.001}, [](double a) { return 0.1 * a; }, at, tol);
    auto similar = estimate_limit(
        "a->1", {0.9, 0.99, 0.999}, [](double a) { return 1.0 - 0.1 * (1.0 - a); }, at, tol);
    const bool up = reaches(std::move(narrow), true, true, ex, v);
    const bool down = reaches(std::move(similar), false, true, ex, v);

    PropertyVerdict eq{m, PropertyKind::equality, VerdictState::fail, {}, ex.inf, ex.sup, {}};
    PropertyVerdict orth{m, PropertyKind::orthogonality, VerdictState::fail, {}, ex.inf, ex.sup, {}};
    const bool ends = check_equality(m, ex, ctx, eq) && check_orthogonality(m, ex, ctx, orth);
    if (!ends) v.detail += "equality or orthogonality fails; ";
    return up && down && ends;
}

}  // namespace

std::string to_string(PropertyKind p) {
    switch (p) {
        case PropertyKind::symmetry: return "symmetry";
        case PropertyKind::equality: return "equality";
        case PropertyKind::orthogonality: return "orthogonality";
        case PropertyKind::outlier: return "outlier";
        case PropertyKind::noise: return "noise";
        case PropertyKind::mode: return "mode";
    }
    return "?";
}

PropertyKind parse_property(const std::string& name) {
    for (auto p : kTable1Columns) {
        if (to_string(p) == name) return p;
    }
    throw ValidationError("unknown property '" + name + "'");
}

std::string to_string(VerdictState s) {
    switch (s) {
        case VerdictState::pass: return "pass";
        case VerdictState::fail: return "fail";
        case VerdictState::indeterminate: return "indeterminate";
    }
    return "?";
}

GaussianComponent ScenarioB::gaussian(std::size_t i) const {
    const auto& c = components.at(i);
    return GaussianComponent::univariate(c.mean, c.variance());
}

WeightedPair ScenarioB::pair(std::size_t i, std::size_t j) const {
    return WeightedPair(components.at(i).weight, MixtureDensity(gaussian(i)), components.at(j).weight,
                        MixtureDensity(gaussian(j)));
}

const std::vector<ScenarioB>& scenarios_b() {
    static const std::vector<ScenarioB> all = {
        {'a', {{-3, 1, 0.475}, {0, 1, 0.475}, {3.1, 1, 0.05}}},
        {'b', {{-1, 1, 0.505}, {4, 1, 0.490}, {10, 0.5, 0.005}}},
        {'c', {{-1.5, 1, 0.332}, {1.5, 1, 0.332}, {-15, 15, 0.168}, {15, 15, 0.168}}},
        {'d', {{0, 1, 1.0 / 3}, {3, 1, 1.0 / 3}, {3, 0.2, 1.0 / 3}}},
        {'e', {{-2.9, 1, 0.4}, {0, 1, 0.4}, {2.5, 0.24, 0.1}, {2.5, 0.24, 0.1}}},
        {'f', {{-4, 0.75, 2.0 / 3}, {4, 0.75, 1.0 / 9}, {6, 0.75, 1.0 / 9}, {8, 0.75, 1.0 / 9}}},
    };
    return all;
}

std::vector<WeightedPair> probe_catalog() {
    const auto& sc = scenarios_b();
    auto find = [&](char label) -> const ScenarioB& {
        return *std::find_if(sc.begin(), sc.end(), [&](const ScenarioB& s) { return s.label == label; });
    };
    std::vector<WeightedPair> out;
    const std::vector<std::pair<char, std::vector<std::pair<int, int>>>> picks = {
        {'a', {{0, 1}, {1, 2}}}, {'d', {{0, 1}, {1, 2}}}, {'e', {{0, 1}, {2, 3}}}, {'f', {{0, 1}, {1, 2}, {2, 3}}}};
    for (const auto& [label, pairs] : picks) {
        for (auto [i, j] : pairs) out.push_back(find(label).pair(i, j));
    }
    std::mt19937_64 rng(0);
    std::uniform_real_distribution<double> mean(-10.0, 10.0), sd(0.2, 5.0), w(0.05, 0.9);
    for (int r = 0; r < 8; ++r) {
        const double m1 = mean(rng), m2 = mean(rng);
        const double s1 = sd(rng), s2 = sd(rng);
        const double p1 = w(rng);
        std::uniform_real_distribution<double> w2(0.05, std::min(0.9, 1.0 - p1));
        const double p2 = w2(rng);
        out.emplace_back(p1, normal(m1, s1), p2, normal(m2, s2));
    }
    return out;
}

ProbeExtremes probe_extremes(Measure m, const IntegrationContext& ctx) {
    std::vector<WeightedPair> refs = probe_catalog();
    for (auto& p : equality_probes()) refs.push_back(std::move(p));
    for (double gap : {10.0, 20.0, 40.0}) refs.push_back(separated(0.5, 0.5, gap));
    ProbeExtremes ex{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& p : refs) {
        const double v = checked(m, p, ctx);
        ex.inf = std::min(ex.inf, v);
        ex.sup = std::max(ex.sup, v);
    }
    return ex;
}

PropertyVerdict check_property(Measure m, PropertyKind p, const IntegrationContext& ctx) {
    try {
        return check_property(m, p, probe_extremes(m, ctx), ctx);
    } catch (const NumericalError& e) {
        return {m, p, VerdictState::indeterminate, {}, 0.0, 0.0, std::string("probe extremes: ") + e.what()};
    }
}

PropertyVerdict check_property(Measure m, PropertyKind p, const ProbeExtremes& ex, const IntegrationContext& ctx) {
    PropertyVerdict v{m, p, VerdictState::fail, {}, ex.inf, ex.sup, {}};
    try {
        bool ok = false;
        switch (p) {
            case PropertyKind::symmetry: ok = check_symmetry(m, ctx, v); break;
            case PropertyKind::equality: ok = check_equality(m, ex, ctx, v); break;
            case PropertyKind::orthogonality: ok = check_orthogonality(m, ex, ctx, v); break;
            case PropertyKind::outlier: ok = check_outlier(m, ex, ctx, v); break;
            case PropertyKind::noise: ok = check_noise(m, ex, ctx, v); break;
            case PropertyKind::mode: ok = check_mode(m, ex, ctx, v); break;
        }
        v.state = ok ? VerdictState::pass : VerdictState::fail;
    } catch (const NumericalError& e) {
        v.state = VerdictState::indeterminate;
        v.detail += e.what();
    }
    return v;
}

bool Table1::any_indeterminate() const {
    for (const auto& row : verdicts) {
        for (const auto& v : row) {
            if (v.state == VerdictState::indeterminate) return true;
        }
    }
    return false;
}

Table1 table1(const IntegrationContext& ctx, const std::vector<Measure>& measures) {
    Table1 t;
    t.measures = measures.empty() ? std::vector<Measure>(kAllMeasures.begin(), kAllMeasures.end()) : measures;
    const int rows = static_cast<int>(t.measures.size());
    t.verdicts.resize(t.measures.size());

    std::vector<std::optional<ProbeExtremes>> extremes(t.measures.size());
    std::vector<std::string> extreme_errors(t.measures.size());
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(rows) * 6);
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < rows; ++r) {
        try {
            extremes[r] = probe_extremes(t.measures[r], ctx);
        } catch (const NumericalError& e) {
            extreme_errors[r] = e.what();
        } catch (...) {
            errors[static_cast<std::size_t>(r) * 6] = std::current_exception();
        }
    }
#pragma omp parallel for schedule(dynamic)
    for (int cell = 0; cell < rows * 6; ++cell) {
        const int r = cell / 6;
        const int c = cell % 6;
        const Measure m = t.measures[r];
        const PropertyKind p = kTable1Columns[c];
        try {
            if (extremes[r]) {
                t.verdicts[r][c] = check_property(m, p, *extremes[r], ctx);
            } else {
                t.verdicts[r][c] = {m, p, VerdictState::indeterminate, {}, 0.0, 0.0,
                                    "probe extremes: " + extreme_errors[r]};
            }
        } catch (...) {
            errors[cell] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return t;
}

std::array<std::array<bool, 6>, 7> expected_table1() {
    constexpr bool x = true;
    constexpr bool o = false;
    return {{
        {o, x, x, o, o, o},  // se
        {o, o, x, o, o, o},  // wse
        {x, o, x, o, o, o},  // js
        {x, x, x, o, o, x},  // err
        {x, x, x, x, o, x},  // bhat
        {x, x, x, x, o, x},  // kldiv
        {x, x, x, x, x, x},  // klinf
    }};
}

std::vector<OrderingCheck> scenario_orderings(const IntegrationContext& ctx) {
    const auto& sc = scenarios_b();
    std::vector<OrderingCheck> out;
    auto less = [&](std::string label, std::string statement, double lhs, double rhs) {
        out.push_back({std::move(label), std::move(statement), lhs, rhs, rhs - lhs > kOrderingMargin});
    };
    auto greater = [&](std::string label, std::string statement, double lhs, double rhs) {
        out.push_back({std::move(label), std::move(statement), lhs, rhs, lhs - rhs > kOrderingMargin});
    };
    auto sym_kl = [](const GaussianComponent& a, const GaussianComponent& b) {
        return gauss_kl_closed(a, b) + gauss_kl_closed(b, a);
    };

    const auto& a = sc[0];
    less("a:bhat", "Bhat distance(1,2) < Bhat distance(2,3)", gauss_bhat_closed(a.gaussian(0), a.gaussian(1)),
         gauss_bhat_closed(a.gaussian(1), a.gaussian(2)));
    less("a:kl", "symmetric KL(1,2) < symmetric KL(2,3)", sym_kl(a.gaussian(0), a.gaussian(1)),
         sym_kl(a.gaussian(1), a.gaussian(2)));

    const auto& b = sc[1];
    less("b:se", "SE(1,2) < SE(2,3)", evaluate(Measure::se, b.pair(0, 1), ctx),
         evaluate(Measure::se, b.pair(1, 2), ctx));
    less("b:err", "Err(1,2) < Err(2,3)", evaluate(Measure::err, b.pair(0, 1), ctx),
         evaluate(Measure::err, b.pair(1, 2), ctx));

    const auto& c = sc[2];
    const MixtureDensity noise(std::vector<MixtureTerm>{{0.5, c.gaussian(2)}, {0.5, c.gaussian(3)}});
    const WeightedPair with_noise(c.components[0].weight, MixtureDensity(c.gaussian(0)),
                                  c.components[2].weight + c.components[3].weight, noise);
    less("c:bhat", "Bhat(1,2) < Bhat(1,3+4)", evaluate(Measure::bhat, c.pair(0, 1), ctx),
         evaluate(Measure::bhat, with_noise, ctx));

    const auto& d = sc[3];
    less("d:kldiv", "KLdiv(1,2) < KLdiv(2,3)", evaluate(Measure::kldiv, d.pair(0, 1), ctx),
         evaluate(Measure::kldiv, d.pair(1, 2), ctx));
    greater("d:klinf", "KLinf(1,2) > KLinf(2,3)", evaluate(Measure::klinf, d.pair(0, 1), ctx),
            evaluate(Measure::klinf, d.pair(1, 2), ctx));

    const auto& e = sc[4];
    less("e:se", "SE(1,2) < SE(3,4)", evaluate(Measure::se, e.pair(0, 1), ctx),
         evaluate(Measure::se, e.pair(2, 3), ctx));

    const auto& f = sc[5];
    less("f:js", "JS(1,2) < JS(2,3)", evaluate(Measure::js, f.pair(0, 1), ctx),
         evaluate(Measure::js, f.pair(1, 2), ctx));
    return out;
}

MonotoneCheck monotone_likelihood_ratio(const IntegrationContext& ctx) {
    MonotoneCheck out;
    out.holds = true;
    for (double theta : {1.0, 2.0, 3.0, 4.0}) {
        out.theta.push_back(theta);
        out.err.push_back(evaluate(Measure::err, separated(0.5, 0.5, theta), ctx));
        out.bhat_distance.push_back(bhattacharyya_distance(normal(0, 1), normal(theta, 1), ctx).value);
        const std::size_t n = out.err.size();
        if (n > 1 && (out.err[n - 1] < out.err[n - 2] || out.bhat_distance[n - 1] < out.bhat_distance[n - 2]))
            out.holds = false;
    }
    return out;
}

}  // namespace hybridclust
