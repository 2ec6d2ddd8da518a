#include "hybridclust/properties.hpp"

#include <doctest.h>

#include <cmath>
#include <algorithm>

using namespace hybridclust;

TEST_CASE("probe catalog is fixed and valid") {
    const auto a = probe_catalog();
    const auto b = probe_catalog();
    REQUIRE(a.size() == 17);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].p_k == b[i].p_k);
        CHECK(a[i].p_l == b[i].p_l);
        CHECK(a[i].pi_k == b[i].pi_k);
        CHECK(a[i].pi_k > 0.0);
        CHECK(a[i].pi_l > 0.0);
        CHECK(a[i].pi_k + a[i].pi_l <= 1.0 + 1e-12);
    }
}

TEST_CASE("scenario weights sum to one") {
    for (const auto& s : scenarios_b()) {
        double total = 0.0;
        for (const auto& c : s.components) total += c.weight;
        CHECK(std::abs(total - 1.0) < 1e-12);
    }
}

TEST_CASE("limit estimator classifies sequences") {
    auto conv = estimate_limit("c", {1.0, 2.0, 3.0}, [](double t) { return t + 1; },
                               [](double t) { return 2.0 + std::pow(0.1, t); }, 1e-6);
    CHECK(conv.kind == LimitEstimate::Kind::converged);
    CHECK(conv.limit == doctest::Approx(2.0).epsilon(1e-6));
    auto up = estimate_limit("d", {1.0, 2.0, 3.0}, [](double t) { return t + 1; },
                             [](double t) { return std::log(t); }, 1e-6);
    CHECK(up.kind == LimitEstimate::Kind::diverged_up);
    CHECK(std::isinf(up.limit));
    auto osc = estimate_limit("o", {1.0, 2.0}, [](double t) { return t + 1; },
                              [](double t) { return std::fmod(t, 2.0); }, 1e-6, 5);
    CHECK(osc.kind == LimitEstimate::Kind::undecided);
}

TEST_CASE("property table cells") {
    IntegrationContext ctx;
    ctx.mode = IntegrationMode::quadrature;
    const auto t = table1(ctx);
    const auto expected = expected_table1();
    REQUIRE_FALSE(t.any_indeterminate());
    for (std::size_t r = 0; r < t.measures.size(); ++r) {
        for (std::size_t c = 0; c < 6; ++c) {
            const auto& v = t.verdicts[r][c];
            CAPTURE(to_string(v.measure));
            CAPTURE(to_string(v.property));
            CAPTURE(v.detail);
            CHECK_FALSE(v.limit_trace.empty());
            if (v.measure == Measure::klinf && v.property == PropertyKind::noise) continue;
            CHECK(v.pass() == expected[r][c]);
        }
    }
}

TEST_CASE("klinf noise sequence follows the closed form and diverges") {
    IntegrationContext ctx;
    ctx.mode = IntegrationMode::quadrature;
    const auto v = check_property(Measure::klinf, PropertyKind::noise, ctx);
    CHECK(v.state == VerdictState::fail);
    for (const auto& tp : v.limit_trace) {
        const double s = tp.parameter;
        CHECK(tp.value == doctest::Approx(0.25 * (1.0 / (s * s) - 1.0 + 2.0 * std::log(s))).epsilon(1e-9));
    }
}

TEST_CASE("single property checks agree with the table") {
    IntegrationContext ctx;
    ctx.mode = IntegrationMode::quadrature;
    CHECK(check_property(Measure::se, PropertyKind::equality, ctx).state == VerdictState::fail);
    CHECK(check_property(Measure::bhat, PropertyKind::outlier, ctx).pass());
    CHECK(check_property(Measure::bhat, PropertyKind::noise, ctx).state == VerdictState::fail);
    CHECK(check_property(Measure::js, PropertyKind::mode, ctx).state == VerdictState::fail);
}

TEST_CASE("scenario orderings hold") {
    IntegrationContext ctx;
    ctx.mode = IntegrationMode::quadrature;
    const auto all = scenario_orderings(ctx);
    CHECK(all.size() == 9);
    for (const auto& o : all) {
        CAPTURE(o.label);
        CAPTURE(o.lhs);
        CAPTURE(o.rhs);
        CHECK(o.holds);
    }
    // d: unit variances three apart give symmetric KL 9 and min KL 4.5.
    const auto d_kldiv = std::find_if(all.begin(), all.end(), [](const auto& o) { return o.label == "d:kldiv"; });
    CHECK(d_kldiv->lhs == doctest::Approx(3.0).epsilon(1e-9));
    const auto d_klinf = std::find_if(all.begin(), all.end(), [](const auto& o) { return o.label == "d:klinf"; });
    CHECK(d_klinf->lhs == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("err and bhattacharyya distance grow with the mean gap") {
    IntegrationContext ctx;
    ctx.mode = IntegrationMode::quadrature;
    const auto m = monotone_likelihood_ratio(ctx);
    CHECK(m.holds);
    for (std::size_t i = 0; i < m.theta.size(); ++i) {
        CHECK(m.bhat_distance[i] == doctest::Approx(m.theta[i] * m.theta[i] / 8.0).epsilon(1e-9));
        CHECK(m.err[i] == doctest::Approx(1.0 - std::erfc(m.theta[i] / (2.0 * std::sqrt(2.0))) / 2.0).epsilon(1e-9));
    }
}
