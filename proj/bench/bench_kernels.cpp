#include "hybridclust/functional.hpp"
#include "hybridclust/kernels.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

using namespace hybridclust;

namespace {

struct Problem {
    DataMatrix data;
    std::vector<GaussianComponent> comps;
    std::vector<double> log_coefs;
};

Problem make_problem(int n, int d, int K) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> z;
    Problem p;
    p.data.resize(n, d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) p.data(i, j) = 3.0 * z(rng);
    }
    for (int k = 0; k < K; ++k) {
        Eigen::VectorXd mean(d);
        for (int j = 0; j < d; ++j) mean(j) = 3.0 * z(rng);
        Eigen::MatrixXd a = Eigen::MatrixXd::Random(d, d);
        p.comps.emplace_back(mean, a * a.transpose() + Eigen::MatrixXd::Identity(d, d));
        p.log_coefs.push_back(-std::log(static_cast<double>(K)));
    }
    return p;
}

template <bool Parallel>
void bm_e_step(benchmark::State& state) {
    const auto p = make_problem(static_cast<int>(state.range(0)), 2, static_cast<int>(state.range(1)));
    Eigen::MatrixXd resp;
    Eigen::VectorXd ll;
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::e_step(p.data, p.log_coefs, p.comps, resp, ll);
        } else {
            kernels::e_step_serial(p.data, p.log_coefs, p.comps, resp, ll);
        }
        benchmark::DoNotOptimize(resp.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}

template <bool Parallel>
void bm_m_step(benchmark::State& state) {
    const auto p = make_problem(static_cast<int>(state.range(0)), 2, static_cast<int>(state.range(1)));
    Eigen::MatrixXd resp;
    Eigen::VectorXd ll;
    kernels::e_step_serial(p.data, p.log_coefs, p.comps, resp, ll);
    for (auto _ : state) {
        auto m = Parallel ? kernels::m_step_moments(p.data, resp) : kernels::m_step_moments_serial(p.data, resp);
        benchmark::DoNotOptimize(m.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}

template <bool Parallel>
void bm_pairwise(benchmark::State& state) {
    const int K = static_cast<int>(state.range(0));
    const auto p = make_problem(1, 2, K);
    const kernels::PairFunction f = [&](int i, int j) { return gauss_bhat_closed(p.comps[i], p.comps[j]); };
    for (auto _ : state) {
        auto m = Parallel ? kernels::pairwise(K, f) : kernels::pairwise_serial(K, f);
        benchmark::DoNotOptimize(m.data());
    }
    state.SetItemsProcessed(state.iterations() * K * (K - 1) / 2);
}

}  // namespace

BENCHMARK(bm_e_step<true>)->Args({500, 10})->Args({5000, 25});
BENCHMARK(bm_e_step<false>)->Args({500, 10})->Args({5000, 25});
BENCHMARK(bm_m_step<true>)->Args({500, 10})->Args({5000, 25});
BENCHMARK(bm_m_step<false>)->Args({500, 10})->Args({5000, 25});
BENCHMARK(bm_pairwise<true>)->Arg(25)->Arg(100);
BENCHMARK(bm_pairwise<false>)->Arg(25)->Arg(100);

BENCHMARK_MAIN();
