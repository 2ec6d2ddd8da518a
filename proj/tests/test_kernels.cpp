#include "doctest.h"

#include "hybridclust/kernels.hpp"
#include "hybridclust/mixture.hpp"

#include <stdexcept>

using namespace hybridclust;

namespace {

struct Fixture {
    DataMatrix data;
    std::vector<GaussianComponent> comps;
    std::vector<double> log_coefs;

    Fixture() {
        Eigen::MatrixXd cov(2, 2);
        cov << 1.0, 0.3, 0.3, 2.0;
        comps = {GaussianComponent(Eigen::Vector2d(0, 0), cov),
                 GaussianComponent(Eigen::Vector2d(3, 1), Eigen::Matrix2d::Identity()),
                 GaussianComponent(Eigen::Vector2d(-2, 4), 0.5 * cov)};
        log_coefs = {std::log(0.5), std::log(0.3), std::log(0.2)};
        std::vector<MixtureTerm> terms;
        for (std::size_t k = 0; k < 3; ++k) terms.push_back({std::exp(log_coefs[k]), comps[k]});
        data = sample(MixtureDensity(terms), 2000, 4);
    }
};

}  // namespace

TEST_CASE("parallel E-step equals the serial reference") {
    Fixture f;
    Eigen::MatrixXd r1, r2;
    Eigen::VectorXd l1, l2;
    kernels::e_step(f.data, f.log_coefs, f.comps, r1, l1);
    kernels::e_step_serial(f.data, f.log_coefs, f.comps, r2, l2);
    CHECK(r1 == r2);
    CHECK(l1 == l2);
    CHECK((r1.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("parallel M-step moments equal the serial reference") {
    Fixture f;
    Eigen::MatrixXd r;
    Eigen::VectorXd l;
    kernels::e_step_serial(f.data, f.log_coefs, f.comps, r, l);
    const auto a = kernels::m_step_moments(f.data, r);
    const auto b = kernels::m_step_moments_serial(f.data, r);
    REQUIRE(a.size() == b.size());
    double mass = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].mass == b[k].mass);
        CHECK(a[k].mean == b[k].mean);
        CHECK(a[k].scatter == b[k].scatter);
        mass += a[k].mass;
    }
    CHECK(mass == doctest::Approx(2000.0));
}

TEST_CASE("pairwise kernels agree and propagate errors") {
    auto f = [](int i, int j) { return static_cast<double>(i * 10 + j); };
    const auto a = kernels::pairwise(7, f);
    const auto b = kernels::pairwise_serial(7, f);
    CHECK(a == b);
    CHECK(a(2, 5) == 25.0);
    CHECK(a(5, 2) == 25.0);
    CHECK(a(3, 3) == 0.0);
    auto bad = [](int i, int j) -> double {
        if (i == 1 && j == 3) throw std::runtime_error("pair 1,3");
        return 0.0;
    };
    CHECK_THROWS_WITH(kernels::pairwise(5, bad), "pair 1,3");
}
