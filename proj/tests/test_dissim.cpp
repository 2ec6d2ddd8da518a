#include "doctest.h"

#include "hybridclust/dissim.hpp"
#include "hybridclust/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace hybridclust;

namespace {

MixtureDensity normal(double mu, double var) { return MixtureDensity(GaussianComponent::univariate(mu, var)); }

// Same density as `normal`, but with two terms so the numeric path runs.
MixtureDensity split_normal(double mu, double var) {
    const auto c = GaussianComponent::univariate(mu, var);
    return MixtureDensity(std::vector<MixtureTerm>{{0.5, c}, {0.5, c}});
}

IntegrationContext quad() {
    IntegrationContext ctx;
    ctx.mode = IntegrationMode::quadrature;
    return ctx;
}

MixtureDensity random_mixture(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mu(-6, 6), sd(0.3, 3), w(0.2, 1);
    const int k = 1 + static_cast<int>(rng() % 3);
    std::vector<double> ws;
    double total = 0;
    for (int i = 0; i < k; ++i) total += ws.emplace_back(w(rng));
    std::vector<MixtureTerm> terms;
    for (int i = 0; i < k; ++i) {
        const double s = sd(rng);
        terms.push_back({ws[static_cast<std::size_t>(i)] / total, GaussianComponent::univariate(mu(rng), s * s)});
    }
    return MixtureDensity(std::move(terms));
}

}  // namespace

TEST_CASE("measure names round-trip") {
    for (auto m : kAllMeasures) CHECK(parse_measure(to_string(m)) == m);
    CHECK_THROWS_AS(parse_measure("KLINF"), ValidationError);
    CHECK(analytic_range(Measure::err).min == 0.5);
    CHECK(std::isinf(analytic_range(Measure::se).min));
    CHECK(analytic_range(Measure::js).max == doctest::Approx(std::log(2.0)));
}

TEST_CASE("worked values") {
    const auto ctx = quad();
    CHECK(evaluate(Measure::klinf, WeightedPair(0.3, normal(0, 1), 0.3, normal(0, 1)), ctx) == 0.0);
    CHECK(evaluate(Measure::se, WeightedPair(0.1, normal(0, 1), 0.1, normal(0, 1)), ctx) ==
          doctest::Approx(-2.0 * 0.1 * std::log(2.0)).epsilon(1e-9));
    CHECK(evaluate(Measure::bhat, WeightedPair(0.3, normal(0, 1), 0.3, normal(3, 1)), ctx) ==
          doctest::Approx(0.3375).epsilon(1e-12));
    CHECK(evaluate(Measure::kldiv, WeightedPair(0.5, normal(0, 1), 0.5, normal(3, 1)), ctx) == doctest::Approx(4.5));
    CHECK(evaluate(Measure::klinf, WeightedPair(0.5, normal(0, 1), 0.5, normal(3, 1)), ctx) == doctest::Approx(2.25));
    CHECK(evaluate(Measure::err, WeightedPair(0.4, normal(0, 1), 0.4, normal(0, 1)), ctx) ==
          doctest::Approx(0.5).epsilon(1e-10));
    CHECK(std::abs(evaluate(Measure::js, WeightedPair(0.5, normal(-20, 1), 0.5, normal(20, 1)), ctx) - std::log(2.0)) <
          1e-6);
    CHECK(std::abs(evaluate(Measure::js, WeightedPair(0.2, normal(1, 2), 0.2, normal(1, 2)), ctx)) < 1e-9);
}

TEST_CASE("SE and wSE against separate entropy integrals") {
    const auto ctx = quad();
    const auto p = normal(0, 1);
    const auto q = MixtureDensity(std::vector<MixtureTerm>{{0.3, GaussianComponent::univariate(2, 0.5)},
                                                           {0.7, GaussianComponent::univariate(-1, 2)}});
    const double pk = 0.35, pl = 0.25;
    const auto merged = MixtureDensity::combine(pk, p, pl, q);
    const double se = entropy_functional(pk + pl, merged, ctx).value - entropy_functional(pk, p, ctx).value -
                      entropy_functional(pl, q, ctx).value;
    CHECK(evaluate(Measure::se, WeightedPair(pk, p, pl, q), ctx) == doctest::Approx(se).epsilon(1e-8));
    const auto sum = MixtureDensity::combine(1, p, 1, q);  // (p + q) / 2
    const double wse = (pk + pl) * entropy_functional(2.0, sum, ctx).value - pk * entropy_functional(1, p, ctx).value -
                       pl * entropy_functional(1, q, ctx).value;
    CHECK(evaluate(Measure::wse, WeightedPair(pk, p, pl, q), ctx) == doctest::Approx(wse).epsilon(1e-8));
    const double wk = pk / (pk + pl), wl = pl / (pk + pl);
    const double js = entropy_functional(1, MixtureDensity::combine(wk, p, wl, q), ctx).value -
                      wk * entropy_functional(1, p, ctx).value - wl * entropy_functional(1, q, ctx).value;
    CHECK(evaluate(Measure::js, WeightedPair(pk, p, pl, q), ctx) == doctest::Approx(js).epsilon(1e-8));
}

TEST_CASE("closed-form path equals the numerical path") {
    const auto ctx = quad();
    const std::array<std::array<double, 4>, 4> cases = {{{0, 1, 3, 1}, {0, 1, 0, 0.25}, {-2, 0.5, 4, 3}, {1, 2, 1.5, 0.1}}};
    for (const auto& c : cases) {
        for (auto m : {Measure::bhat, Measure::kldiv, Measure::klinf}) {
            const double closed = evaluate(m, WeightedPair(0.3, normal(c[0], c[1]), 0.2, normal(c[2], c[3])), ctx);
            const double numeric =
                evaluate(m, WeightedPair(0.3, split_normal(c[0], c[1]), 0.2, split_normal(c[2], c[3])), ctx);
            CHECK(std::abs(closed - numeric) < 1e-6);
        }
    }
}

TEST_CASE("symmetry, ranges and the KLinf bound on random pairs") {
    const auto ctx = quad();
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> w(0.05, 0.5);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const WeightedPair pair(w(rng), random_mixture(rng), w(rng), random_mixture(rng));
        std::array<double, 7> v{};
        for (std::size_t m = 0; m < 7; ++m) {
            v[m] = evaluate(kAllMeasures[m], pair, ctx);
            worst = std::max(worst, std::abs(v[m] - evaluate(kAllMeasures[m], pair.swapped(), ctx)));
        }
        CHECK(v[0] <= 1e-6);
        CHECK(v[2] >= -1e-6);
        CHECK(v[2] <= std::log(2.0) + 1e-6);
        CHECK(v[3] >= 0.5 - 1e-6);
        CHECK(v[3] <= 1.0 + 1e-9);
        CHECK(v[4] >= -1e-6);
        CHECK(v[5] >= -1e-6);
        CHECK(v[6] >= -1e-6);
        CHECK(v[6] <= 0.5 * v[5] + 1e-9);
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("pairwise matrices") {
    const auto ctx = quad();
    ClusterState two = ClusterState::from_mixture(MixtureDensity(
        std::vector<MixtureTerm>{{0.5, GaussianComponent::univariate(0, 1)}, {0.5, GaussianComponent::univariate(3, 1)}}));
    const auto d2 = pairwise_matrix(two, Measure::klinf, ctx);
    CHECK(d2(0, 1) == doctest::Approx(2.25));
    CHECK(d2(1, 0) == d2(0, 1));

    const auto g = GaussianComponent::univariate(1, 2);
    const auto same = ClusterState::from_mixture(MixtureDensity(std::vector<MixtureTerm>{{0.25, g}, {0.25, g}, {0.25, g}, {0.25, g}}));
    CHECK(pairwise_matrix(same, Measure::klinf, ctx).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(pairwise_matrix(ClusterState::from_mixture(normal(0, 1)), Measure::se, ctx), ValidationError);

    // Scenario (a) with the equal-weight override.
    const auto a = ClusterState::from_mixture(MixtureDensity(std::vector<MixtureTerm>{
        {1.0 / 3, GaussianComponent::univariate(-3, 1)},
        {1.0 / 3, GaussianComponent::univariate(0, 1)},
        {1.0 / 3, GaussianComponent::univariate(3.1, 1)}}));
    for (auto m : kAllMeasures) {
        const auto d = pairwise_matrix(a, m, ctx);
        if (m == Measure::se || m == Measure::wse) continue;  // not f-divergence based
        CHECK(d(0, 1) < d(1, 2));
    }
    CHECK(pairwise_matrix(a, Measure::err, ctx) == pairwise_matrix_serial(a, Measure::err, ctx));
}

TEST_CASE("importance sampling path in 3-D") {
    IntegrationContext ctx;
    ctx.is_samples = 20000;
    const MixtureDensity p(GaussianComponent(Eigen::Vector3d(0, 0, 0), Eigen::Matrix3d::Identity()));
    const MixtureDensity q(GaussianComponent(Eigen::Vector3d(2, 0, 0), Eigen::Matrix3d::Identity()));
    const double js = evaluate(Measure::js, WeightedPair(0.5, p, 0.5, q), ctx);
    CHECK(js > 0.0);
    CHECK(js < std::log(2.0));
    CHECK(evaluate(Measure::klinf, WeightedPair(0.5, p, 0.5, q), ctx) == doctest::Approx(1.0));
}

namespace {

struct PlainTerm {
    double weight;
    Eigen::Vector2d mean;
    Eigen::Matrix2d cov;
};

double plain_pdf(const std::vector<PlainTerm>& mix, const Eigen::Vector2d& x) {
    double total = 0.0;
    for (const auto& t : mix) {
        const Eigen::Vector2d r = x - t.mean;
        const double q = r.dot(t.cov.inverse() * r);
        total += t.weight * std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(t.cov.determinant()));
    }
    return total;
}

// Mean and standard error of log(p / q) under draws from p.
std::pair<double, double> plain_kl(const std::vector<PlainTerm>& p, const std::vector<PlainTerm>& q, int n,
                                   std::mt19937_64& rng) {
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double pick = u(rng);
        std::size_t k = 0;
        while (k + 1 < p.size() && pick > p[k].weight) pick -= p[k++].weight;
        const Eigen::Matrix2d chol = p[k].cov.llt().matrixL();
        const Eigen::Vector2d x = p[k].mean + chol * Eigen::Vector2d(z(rng), z(rng));
        const double v = std::log(plain_pdf(p, x) / plain_pdf(q, x));
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    return {mean, std::sqrt((sum_sq / n - mean * mean) / n)};
}

MixtureDensity to_mixture(const std::vector<PlainTerm>& mix) {
    std::vector<MixtureTerm> terms;
    for (const auto& t : mix) terms.push_back({t.weight, GaussianComponent(t.mean, t.cov)});
    return MixtureDensity(std::move(terms));
}

}  // namespace

TEST_CASE("KLdiv of 2-D mixtures against plain Monte Carlo") {
    Eigen::Matrix2d tilted;
    tilted << 2.0, 0.5, 0.5, 1.0;
    const std::vector<PlainTerm> p = {{0.6, {0.0, 0.0}, Eigen::Matrix2d::Identity()},
                                      {0.4, {4.0, 1.0}, Eigen::Vector2d(9.0, 4.0).asDiagonal()}};
    const std::vector<PlainTerm> q = {{0.5, {1.0, 0.0}, tilted}, {0.5, {6.0, 6.0}, 16.0 * Eigen::Matrix2d::Identity()}};
    std::mt19937_64 rng(11);
    const auto [pq, se_pq] = plain_kl(p, q, 400000, rng);
    const auto [qp, se_qp] = plain_kl(q, p, 400000, rng);
    const double got = evaluate(Measure::kldiv, WeightedPair(0.3, to_mixture(p), 0.7, to_mixture(q)), quad());
    CHECK(std::abs(got - 0.3 * (pq + qp)) < 5.0 * 0.3 * std::hypot(se_pq, se_qp));
}
