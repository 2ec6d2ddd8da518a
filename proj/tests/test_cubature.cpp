#include "doctest.h"

#include "hybridclust/cubature.hpp"

#include <cmath>
#include <numbers>

using namespace hybridclust;
using cubature::Box;
using cubature::Values;

namespace {

Box box(std::vector<double> lo, std::vector<double> hi) { return Box{0, std::move(lo), std::move(hi)}; }

}  // namespace

TEST_CASE("Gauss-Kronrod is exact for low-degree polynomials") {
    cubature::Options opt;
    auto f = [](int, std::span<const double> x) { return Values<1>{std::pow(x[0], 9) - 2.0 * x[0] * x[0] + 1.0}; };
    const auto r = cubature::integrate<1>({box({-1.0}, {2.0})}, f, opt);
    const double expect = (std::pow(2.0, 10) - 1.0) / 10.0 - 2.0 * (8.0 + 1.0) / 3.0 + 3.0;
    CHECK(r.value[0] == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("Genz-Malik is exact for degree-7 monomials") {
    cubature::Options opt;
    opt.rel_tol = 1.0;  // accept the single-region estimate
    for (int d : {2, 3}) {
        std::vector<double> lo(static_cast<std::size_t>(d), 0.0), hi(static_cast<std::size_t>(d), 1.0);
        auto f = [](int, std::span<const double> x) {
            return Values<1>{std::pow(x[0], 4) * std::pow(x[1], 3) + x[1] * x[1]};
        };
        const auto r = cubature::integrate<1>({box(lo, hi)}, f, opt);
        CHECK(r.value[0] == doctest::Approx(1.0 / 20.0 + 1.0 / 3.0).epsilon(1e-13));
    }
}

TEST_CASE("Gaussian mass over boxes against the error function") {
    cubature::Options opt;
    opt.rel_tol = 1e-10;
    auto f1 = [](int, std::span<const double> x) {
        return Values<2>{std::exp(-0.5 * x[0] * x[0]) / std::sqrt(2.0 * std::numbers::pi),
                         x[0] * x[0] * std::exp(-0.5 * x[0] * x[0]) / std::sqrt(2.0 * std::numbers::pi)};
    };
    const auto r1 = cubature::integrate<2>({box({-1.0}, {0.5}), box({0.5}, {2.0})}, f1, opt);
    const double mass = 0.5 * (std::erf(2.0 / std::sqrt(2.0)) + std::erf(1.0 / std::sqrt(2.0)));
    CHECK(r1.value[0] == doctest::Approx(mass).epsilon(1e-10));
    CHECK(r1.value[1] > 0.0);

    auto f2 = [](int, std::span<const double> x) {
        return Values<1>{std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1])) / (2.0 * std::numbers::pi)};
    };
    const auto r2 = cubature::integrate<1>({box({-8.0, -8.0}, {8.0, 8.0})}, f2, opt);
    CHECK(r2.value[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("kink in the integrand is resolved by refinement") {
    cubature::Options opt;
    auto f = [](int, std::span<const double> x) { return Values<1>{std::abs(x[0] - 0.3)}; };
    const auto r = cubature::integrate<1>({box({0.0}, {1.0})}, f, opt);
    CHECK(r.value[0] == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-9));
}

TEST_CASE("tags reach the integrand") {
    cubature::Options opt;
    auto f = [](int tag, std::span<const double>) { return Values<1>{tag == 0 ? 1.0 : 10.0}; };
    const auto r = cubature::integrate<1>({Box{0, {0.0}, {1.0}}, Box{1, {0.0}, {1.0}}}, f, opt);
    CHECK(r.value[0] == doctest::Approx(11.0));
}

TEST_CASE("exhausted budget raises with the partial estimate") {
    cubature::Options opt;
    opt.max_evaluations = 100;
    opt.rel_tol = 1e-14;
    auto f = [](int, std::span<const double> x) { return Values<1>{1.0 / std::sqrt(std::abs(x[0]) + 1e-12)}; };
    try {
        cubature::integrate<1>({box({-1.0}, {1.0})}, f, opt);
        FAIL("expected IntegrationError");
    } catch (const IntegrationError& e) {
        CHECK(e.partial() > 0.0);
        CHECK(e.error_estimate() > 0.0);
    }
}
