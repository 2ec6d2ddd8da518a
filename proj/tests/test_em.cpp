#include "doctest.h"

#include "hybridclust/em.hpp"
#include "hybridclust/errors.hpp"

#include <cmath>
#include <random>

using namespace hybridclust;

namespace {

DataMatrix two_clusters_1d(double gap, int per, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    DataMatrix x(2 * per, 1);
    for (int i = 0; i < per; ++i) {
        x(i, 0) = -gap + z(rng);
        x(per + i, 0) = gap + z(rng);
    }
    return x;
}

}  // namespace

TEST_CASE("EM recovers two separated clusters") {
    const auto x = two_clusters_1d(5.0, 200, 11);
    const auto fit = em_fit(x, 2, 3);
    std::vector<double> means;
    for (const auto& t : fit.mixture.terms()) {
        means.push_back(t.component.mean()[0]);
        CHECK(std::abs(t.coef - 0.5) < 0.1);
    }
    std::sort(means.begin(), means.end());
    CHECK(std::abs(means[0] + 5.0) < 0.3);
    CHECK(std::abs(means[1] - 5.0) < 0.3);
}

TEST_CASE("K=1 converges to sample moments in at most two iterations") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z(0.0, 1.0);
    DataMatrix x(300, 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) << z(rng), z(rng);
    const auto fit = em_fit(x, 1, 0);
    CHECK(fit.iterations <= 2);
    const Eigen::VectorXd mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() * centered / 300.0;
    cov.diagonal().array() += 1e-6;
    const auto& c = fit.mixture.terms()[0].component;
    CHECK((c.mean() - mean).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((c.cov() - cov).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(mean.cwiseAbs().maxCoeff() < 0.2);
    CHECK((cov - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.2);
}

TEST_CASE("log-likelihood never decreases") {
    const auto x = two_clusters_1d(1.5, 150, 2);
    for (int rep = 0; rep < 5; ++rep) {
        const auto r = em_fit_once(x, 3, 100 + rep, EMConfig{});
        for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] >= r.trace[i - 1] - 1e-8);
    }
}

TEST_CASE("BIC selects two components for clusters at +-10") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> z(0.0, 1.0);
    DataMatrix x(300, 2);
    for (Eigen::Index i = 0; i < 300; ++i) {
        const double c = i < 150 ? -10.0 : 10.0;
        x.row(i) << c + z(rng), c + z(rng);
    }
    const auto model = select_model(x, 1, 5, Criterion::bic, 0);
    CHECK(model.K() == 2);
    CHECK(model.criterion_scores.at(2).bic < model.criterion_scores.at(1).bic);
    CHECK(model.criterion_scores.at(2).bic < model.criterion_scores.at(3).bic);
    CHECK(model.n_params == count_parameters(2, 2));
    CHECK(count_parameters(2, 2) == 11);

    const auto again = select_model(x, 1, 5, Criterion::bic, 0);
    CHECK(again.log_likelihood == model.log_likelihood);
    CHECK(again.map_labels == model.map_labels);
}

TEST_CASE("criterion formulas") {
    CHECK(bic_score(-100.0, 5, 100) == doctest::Approx(200.0 + 5.0 * std::log(100.0)));
    CHECK(aic_score(-100.0, 5) == doctest::Approx(210.0));
    CHECK(parse_criterion("aic") == Criterion::aic);
    CHECK_THROWS_AS(parse_criterion("icl"), ValidationError);
}

TEST_CASE("MAP assignment and tie rule") {
    const MixtureDensity m(std::vector<MixtureTerm>{{0.5, GaussianComponent::univariate(-5.0, 1.0)},
                            {0.5, GaussianComponent::univariate(5.0, 1.0)}});
    DataMatrix x(2, 1);
    x << -5.0, 5.0;
    CHECK(map_assign(m, x) == std::vector<int>{0, 1});

    const MixtureDensity same(std::vector<MixtureTerm>{{0.5, GaussianComponent::univariate(0.0, 1.0)},
                               {0.5, GaussianComponent::univariate(0.0, 1.0)}});
    DataMatrix zero(1, 1);
    zero << 0.0;
    CHECK(map_assign(same, zero) == std::vector<int>{0});
    CHECK_THROWS_AS(map_assign(m, DataMatrix::Zero(1, 2)), ValidationError);
}

TEST_CASE("MAP equals argmax of normalized responsibilities") {
    const MixtureDensity m(std::vector<MixtureTerm>{{0.2, GaussianComponent::univariate(-1.0, 0.5)},
                            {0.5, GaussianComponent::univariate(0.5, 2.0)},
                            {0.3, GaussianComponent::univariate(2.0, 0.3)}});
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    DataMatrix x(100, 1);
    for (Eigen::Index i = 0; i < 100; ++i) x(i, 0) = u(rng);
    const auto labels = map_assign(m, x);
    for (Eigen::Index i = 0; i < 100; ++i) {
        const Eigen::VectorXd xi = x.row(i).transpose();
        std::vector<double> r;
        double total = 0.0;
        for (const auto& t : m.terms()) {
            r.push_back(t.coef * std::exp(t.component.log_pdf(xi)));
            total += r.back();
        }
        for (auto& v : r) v /= total;
        const auto best = std::max_element(r.begin(), r.end()) - r.begin();
        CHECK(labels[static_cast<std::size_t>(i)] == best);
    }
}

TEST_CASE("MAP invariant under scaling every coefficient") {
    // Scaling all coefficients by c shifts every log-score by log c.
    const MixtureDensity m(std::vector<MixtureTerm>{{0.3, GaussianComponent::univariate(-1.0, 1.0)},
                            {0.7, GaussianComponent::univariate(1.0, 1.0)}});
    DataMatrix x(5, 1);
    x << -2.0, -0.5, 0.0, 0.4, 3.0;
    const auto base = map_assign(m, x);
    for (Eigen::Index i = 0; i < 5; ++i) {
        const Eigen::VectorXd xi = x.row(i).transpose();
        const double s0 = std::log(0.3 * 4.0) + m.terms()[0].component.log_pdf(xi);
        const double s1 = std::log(0.7 * 4.0) + m.terms()[1].component.log_pdf(xi);
        CHECK(base[static_cast<std::size_t>(i)] == (s1 > s0 ? 1 : 0));
    }
}

TEST_CASE("fit preconditions") {
    DataMatrix x(2, 1);
    x << 0.0, 1.0;
    CHECK_THROWS_AS(em_fit(x, 2, 0), ValidationError);
    CHECK_THROWS_AS(em_fit(x, 0, 0), ValidationError);
    CHECK_THROWS_AS(select_model(x, 3, 2, Criterion::bic, 0), ValidationError);
}
