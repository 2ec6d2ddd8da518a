#include "doctest.h"

#include "hybridclust/errors.hpp"
#include "hybridclust/mixture.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace hybridclust;

namespace {

MixtureDensity mix1d(std::initializer_list<std::array<double, 3>> terms) {
    std::vector<MixtureTerm> t;
    for (const auto& [mu, var, w] : terms) t.push_back({w, GaussianComponent::univariate(mu, var)});
    return MixtureDensity(std::move(t));
}

double normal_pdf(double x, double mu, double var) {
    return std::exp(-0.5 * (x - mu) * (x - mu) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

}  // namespace

TEST_CASE("standard normal peak") {
    const auto m = mix1d({{0.0, 1.0, 1.0}});
    CHECK(m.pdf(Eigen::VectorXd::Zero(1)) == doctest::Approx(0.398942).epsilon(1e-6));
}

TEST_CASE("mixture of identical components equals the component") {
    const auto m = mix1d({{0.0, 1.0, 0.5}, {0.0, 1.0, 0.5}});
    CHECK(m.pdf(Eigen::VectorXd::Zero(1)) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
}

TEST_CASE("scenario (a) density matches term-by-term sum on a grid") {
    const auto m = mix1d({{-3.0, 1.0, 0.475}, {0.0, 1.0, 0.475}, {3.1, 1.0, 0.05}});
    for (int i = 0; i < 50; ++i) {
        const double x = -8.0 + 16.0 * i / 49.0;
        const double brute = 0.475 * normal_pdf(x, -3, 1) + 0.475 * normal_pdf(x, 0, 1) + 0.05 * normal_pdf(x, 3.1, 1);
        CHECK(m.pdf(Eigen::VectorXd::Constant(1, x)) == doctest::Approx(brute).epsilon(1e-12));
    }
}

TEST_CASE("2-D log density matches the explicit formula") {
    Eigen::MatrixXd cov(2, 2);
    cov << 2.0, 0.6, 0.6, 1.0;
    const GaussianComponent g(Eigen::Vector2d(1.0, -1.0), cov);
    const Eigen::Vector2d x(0.3, 0.7);
    const Eigen::Vector2d diff = x - Eigen::Vector2d(1.0, -1.0);
    const double expect = -0.5 * diff.dot(cov.inverse() * diff) - std::log(2.0 * std::numbers::pi) -
                          0.5 * std::log(cov.determinant());
    CHECK(g.log_pdf(Eigen::VectorXd(x)) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("pdf is clamped, log_pdf stays finite far out") {
    const auto m = mix1d({{0.0, 1.0, 1.0}});
    const Eigen::VectorXd far = Eigen::VectorXd::Constant(1, 1e4);
    CHECK(m.pdf(far) == kDensityFloor);
    CHECK(std::isfinite(m.log_pdf(far)));
}

TEST_CASE("validation errors") {
    const auto m = mix1d({{0.0, 1.0, 1.0}});
    CHECK_THROWS_AS(m.pdf(Eigen::VectorXd::Zero(2)), ValidationError);
    CHECK_THROWS_AS(m.pdf(Eigen::VectorXd::Constant(1, std::nan(""))), ValidationError);
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.1, 0.2, 1.0;
    CHECK_THROWS_AS(GaussianComponent(Eigen::Vector2d::Zero(), asym), ValidationError);
    Eigen::MatrixXd indefinite(2, 2);
    indefinite << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(GaussianComponent(Eigen::Vector2d::Zero(), indefinite), NumericalError);
    CHECK_THROWS_AS(mix1d({{0.0, 1.0, 0.5}}), ValidationError);
    CHECK_THROWS_AS(mix1d({{0.0, 1.0, 1.2}, {0.0, 1.0, -0.2}}), ValidationError);
}

TEST_CASE("sample mean of N(0, I2)") {
    const MixtureDensity m(GaussianComponent(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()));
    const auto x = sample(m, 100000, 1);
    CHECK(x.rows() == 100000);
    CHECK(std::abs(x.col(0).mean()) < 0.02);
    CHECK(std::abs(x.col(1).mean()) < 0.02);
}

TEST_CASE("sample component fractions follow the coefficients") {
    const auto m = mix1d({{-5.0, 1.0, 0.9}, {5.0, 1.0, 0.1}});
    std::mt19937_64 rng(7);
    std::vector<int> which;
    const auto x = sample_with(m, 100000, rng, &which);
    const double frac = static_cast<double>(std::count(which.begin(), which.end(), 0)) / 1e5;
    CHECK(std::abs(frac - 0.9) < 0.01);
}

TEST_CASE("single draw and determinism") {
    const auto m = mix1d({{0.0, 1.0, 1.0}});
    const auto a = sample(m, 1, 42);
    CHECK(a.rows() == 1);
    CHECK(std::isfinite(a(0, 0)));
    CHECK(sample(m, 50, 3) == sample(m, 50, 3));
    CHECK_THROWS_AS(sample(m, 0, 1), ValidationError);
}

TEST_CASE("combine concatenates rescaled terms") {
    const auto a = mix1d({{0.0, 1.0, 1.0}});
    const auto b = mix1d({{3.0, 2.0, 0.5}, {-1.0, 0.5, 0.5}});
    const auto c = MixtureDensity::combine(0.3, a, 0.2, b);
    REQUIRE(c.size() == 3);
    for (double x : {-2.0, 0.0, 1.5, 4.0}) {
        const Eigen::VectorXd v = Eigen::VectorXd::Constant(1, x);
        CHECK(c.pdf(v) == doctest::Approx(0.6 * a.pdf(v) + 0.4 * b.pdf(v)).epsilon(1e-12));
    }
}
