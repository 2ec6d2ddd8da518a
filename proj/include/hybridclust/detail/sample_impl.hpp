#pragma once

#include <random>

namespace hybridclust {

template <class Engine>
DataMatrix sample_with(const MixtureDensity& mix, std::size_t n, Engine& rng, std::vector<int>* which) {
    const int d = mix.dim();
    std::vector<double> coefs;
    coefs.reserve(mix.size());
    for (const auto& t : mix.terms()) coefs.push_back(t.coef);
    std::discrete_distribution<int> pick(coefs.begin(), coefs.end());
    std::normal_distribution<double> normal(0.0, 1.0);

    DataMatrix out(static_cast<Eigen::Index>(n), d);
    Eigen::VectorXd z(d);
    if (which) which->assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const int k = pick(rng);
        if (which) (*which)[i] = k;
        for (int j = 0; j < d; ++j) z[j] = normal(rng);
        const auto& comp = mix.terms()[static_cast<std::size_t>(k)].component;
        out.row(static_cast<Eigen::Index>(i)) = (comp.mean() + comp.chol().triangularView<Eigen::Lower>() * z).transpose();
    }
    return out;
}

}  // namespace hybridclust
