#include "doctest.h"

#include "hybridclust/errors.hpp"
#include "hybridclust/functional.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace hybridclust;

namespace {

MixtureDensity normal(double mu, double var) { return MixtureDensity(GaussianComponent::univariate(mu, var)); }

IntegrationContext quad() {
    IntegrationContext ctx;
    ctx.mode = IntegrationMode::quadrature;
    return ctx;
}

// Independent oracle: composite Simpson on a fine uniform grid.
template <class F>
double simpson(F f, double a, double b, int n = 200000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

double npdf(double x, double mu, double var) {
    return std::exp(-0.5 * (x - mu) * (x - mu) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

}  // namespace

TEST_CASE("entropy of a standard normal and the scaling identity") {
    const auto ctx = quad();
    const double h1 = entropy_functional(1.0, normal(0, 1), ctx).value;
    CHECK(h1 == doctest::Approx(0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e)).epsilon(1e-9));
    CHECK(entropy_functional(0.5, normal(0, 1), ctx).value == doctest::Approx(1.056043).epsilon(1e-6));
    CHECK(entropy_functional(1.0, normal(7.5, 1), ctx).value == doctest::Approx(h1).epsilon(1e-10));

    const MixtureDensity p(std::vector<MixtureTerm>{{0.3, GaussianComponent::univariate(-2, 0.5)}, {0.7, GaussianComponent::univariate(1, 2)}});
    const double hp = entropy_functional(1.0, p, ctx).value;
    for (double c : {0.1, 0.5, 2.0}) {
        CHECK(std::abs(entropy_functional(c, p, ctx).value - (c * hp - c * std::log(c))) < 1e-7);
    }
    const double brute = simpson(
        [](double x) {
            const double f = 0.3 * npdf(x, -2, 0.5) + 0.7 * npdf(x, 1, 2);
            return f > 0 ? -f * std::log(f) : 0.0;
        },
        -25, 25);
    CHECK(hp == doctest::Approx(brute).epsilon(1e-9));
}

TEST_CASE("KL information examples") {
    const auto ctx = quad();
    CHECK(std::abs(kl_information(normal(0, 1), normal(0, 1), ctx).value) < 1e-12);
    CHECK(kl_information(normal(0, 1), normal(3, 1), ctx).value == doctest::Approx(4.5).epsilon(1e-9));
    CHECK(kl_information(normal(0, 1), normal(0, 4), ctx).value == doctest::Approx(0.318147).epsilon(1e-6));
}

TEST_CASE("Bhattacharyya coefficient examples") {
    const auto ctx = quad();
    const auto p = MixtureDensity(std::vector<MixtureTerm>{{0.4, GaussianComponent::univariate(-1, 1)}, {0.6, GaussianComponent::univariate(2, 0.3)}});
    CHECK(bhattacharyya_coeff(p, p, ctx).value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(bhattacharyya_coeff(normal(0, 1), normal(3, 1), ctx).value == doctest::Approx(std::exp(-9.0 / 8.0)).epsilon(1e-9));
    CHECK(bhattacharyya_coeff(normal(0, 1), normal(40, 1), ctx).value < 1e-10);
    const auto q = normal(0.5, 2.0);
    CHECK(bhattacharyya_coeff(p, q, ctx).value == doctest::Approx(bhattacharyya_coeff(q, p, ctx).value).epsilon(1e-9));
}

TEST_CASE("Bayes overlap examples") {
    const auto ctx = quad();
    CHECK(bayes_overlap(0.5, normal(0, 1), 0.5, normal(0, 1), ctx).value == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(bayes_overlap(0.5, normal(0, 1), 0.5, normal(40, 1), ctx).value < 1e-12);
    const double phi = 0.5 * std::erfc(1.5 / std::sqrt(2.0));
    CHECK(bayes_overlap(0.5, normal(0, 1), 0.5, normal(3, 1), ctx).value == doctest::Approx(phi).epsilon(1e-8));
    CHECK(phi == doctest::Approx(0.066807).epsilon(1e-5));
    const double a = bayes_overlap(0.3, normal(0, 1), 0.7, normal(1, 3), ctx).value;
    const double b = bayes_overlap(0.7, normal(1, 3), 0.3, normal(0, 1), ctx).value;
    CHECK(a == doctest::Approx(b).epsilon(1e-9));
    const double brute = simpson([](double x) { return std::min(0.3 * npdf(x, 0, 1), 0.7 * npdf(x, 1, 3)); }, -30, 30);
    CHECK(a == doctest::Approx(brute).epsilon(1e-8));
    CHECK_THROWS_AS(bayes_overlap(0.3, normal(0, 1), 0.6, normal(0, 1), ctx), ValidationError);
}

TEST_CASE("Gaussian closed forms: spot values") {
    const auto a = GaussianComponent::univariate(0, 1);
    CHECK(gauss_kl_closed(a, a) == 0.0);
    CHECK(gauss_kl_closed(a, GaussianComponent::univariate(3, 1)) == doctest::Approx(4.5));
    const auto q = GaussianComponent::univariate(0, 0.25);
    CHECK(gauss_kl_closed(q, a) == doctest::Approx(0.318147).epsilon(1e-6));
    CHECK(gauss_kl_closed(a, q) == doctest::Approx(0.806853).epsilon(1e-6));
    CHECK(gauss_bhat_closed(a, a) == doctest::Approx(0.0));
    CHECK(gauss_bhat_closed(a, GaussianComponent::univariate(3, 1)) == doctest::Approx(1.125));
    CHECK(gauss_bhat_closed(q, a) == doctest::Approx(0.5 * std::log(1.25 / (2.0 * 0.5))).epsilon(1e-9));
    CHECK(gauss_bhat_closed(q, a) == doctest::Approx(0.111572).epsilon(1e-6));
}

TEST_CASE("closed forms agree with quadrature over a 5x5x5 grid") {
    const auto ctx = quad();
    const double gaps[] = {0.0, 0.5, 2.0, 5.0, 10.0};
    const double sds[] = {0.2, 0.5, 1.0, 2.0, 5.0};
    double worst_kl = 0.0, worst_bhat = 0.0;
    for (double g : gaps) {
        for (double sa : sds) {
            for (double sb : sds) {
                const auto a = GaussianComponent::univariate(0, sa * sa);
                const auto b = GaussianComponent::univariate(g, sb * sb);
                const MixtureDensity pa(a), pb(b);
                worst_kl = std::max(worst_kl, std::abs(gauss_kl_closed(a, b) - kl_information(pa, pb, ctx).value));
                worst_bhat = std::max(worst_bhat,
                                      std::abs(gauss_bhat_closed(a, b) - bhattacharyya_distance(pa, pb, ctx).value));
            }
        }
    }
    CHECK(worst_kl < 1e-6);
    CHECK(worst_bhat < 1e-6);
}

TEST_CASE("closed forms agree with quadrature in 2-D") {
    auto ctx = quad();
    ctx.quad_rel_tol_multi = 1e-10;
    Eigen::MatrixXd ca(2, 2), cb(2, 2);
    ca << 1.0, 0.4, 0.4, 0.8;
    cb << 2.5, -0.3, -0.3, 0.5;
    const GaussianComponent a(Eigen::Vector2d(0, 0), ca), b(Eigen::Vector2d(1.5, -1.0), cb);
    CHECK(kl_information(MixtureDensity(a), MixtureDensity(b), ctx).value ==
          doctest::Approx(gauss_kl_closed(a, b)).epsilon(1e-8));
    CHECK(-std::log(bhattacharyya_coeff(MixtureDensity(a), MixtureDensity(b), ctx).value) ==
          doctest::Approx(gauss_bhat_closed(a, b)).epsilon(1e-8));
    CHECK(entropy_functional(1.0, MixtureDensity(a), ctx).value ==
          doctest::Approx(1.0 + std::log(2.0 * std::numbers::pi) + 0.5 * std::log(ca.determinant())).epsilon(1e-9));
}

TEST_CASE("importance sampling is consistent with quadrature in 2-D") {
    Eigen::MatrixXd cov(2, 2);
    cov << 1.0, 0.3, 0.3, 1.5;
    const MixtureDensity p(std::vector<MixtureTerm>{{0.6, GaussianComponent(Eigen::Vector2d(0, 0), cov)},
                            {0.4, GaussianComponent(Eigen::Vector2d(2, 1), Eigen::Matrix2d::Identity())}});
    const MixtureDensity q(GaussianComponent(Eigen::Vector2d(1, -1), 2.0 * Eigen::MatrixXd::Identity(2, 2)));
    const double truth = kl_information(p, q, quad()).value;
    int inside = 0;
    for (int seed = 0; seed < 100; ++seed) {
        IntegrationContext ctx;
        ctx.mode = IntegrationMode::importance;
        ctx.is_samples = 2000;
        ctx.seed = static_cast<std::uint64_t>(seed);
        const auto est = kl_information(p, q, ctx);
        CHECK(est.std_error > 0.0);
        if (std::abs(est.value - truth) <= 4.0 * est.std_error) ++inside;
    }
    CHECK(inside >= 95);
}

TEST_CASE("shared sample gives common random numbers") {
    const MixtureDensity p(GaussianComponent(Eigen::Vector3d(0, 0, 0), Eigen::Matrix3d::Identity()));
    const MixtureDensity q(GaussianComponent(Eigen::Vector3d(1, 0, 0), Eigen::Matrix3d::Identity()));
    IntegrationContext ctx;
    ctx.sample = std::make_shared<ImportanceSample>(MixtureDensity::combine(0.5, p, 0.5, q), 5000, 3);
    const auto a = kl_information(p, q, ctx);
    const auto b = kl_information(p, q, ctx);
    CHECK(a.value == b.value);
    CHECK(a.mode == IntegrationMode::importance);
    CHECK(a.value == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("context validation") {
    IntegrationContext ctx;
    ctx.is_samples = 10;
    CHECK_THROWS_AS(ctx.validate(), ValidationError);
    ctx = IntegrationContext{};
    ctx.support_sigmas = 3;
    CHECK_THROWS_AS(ctx.validate(), ValidationError);
    CHECK(parse_integration_mode("importance") == IntegrationMode::importance);
    CHECK_THROWS_AS(parse_integration_mode("mc"), ValidationError);
    CHECK_THROWS_AS(entropy_functional(0.0, normal(0, 1), quad()), ValidationError);
}
