#include "hybridclust/merge.hpp"

#include "hybridclust/errors.hpp"
#include "hybridclust/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <memory>

namespace hybridclust {

ClusterState merge_pair(const ClusterState& state, int id_i, int id_j) {
    if (id_i == id_j) throw ValidationError("merge_pair: cannot merge a subcluster with itself");
    std::size_t a = state.index_of(id_i);
    std::size_t b = state.index_of(id_j);
    if (a > b) std::swap(a, b);
    const auto& sa = state.subclusters[a];
    const auto& sb = state.subclusters[b];

    Subcluster merged{state.next_id, sa.weight + sb.weight,
                      MixtureDensity::combine(sa.weight, sa.density, sb.weight, sb.density), sa.members};
    merged.members.insert(merged.members.end(), sb.members.begin(), sb.members.end());
    std::sort(merged.members.begin(), merged.members.end());

    ClusterState next;
    next.step = state.step + 1;
    next.next_id = state.next_id + 1;
    next.subclusters.reserve(state.size() - 1);
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (i == a)
            next.subclusters.push_back(merged);
        else if (i != b)
            next.subclusters.push_back(state.subclusters[i]);
    }
    return next;
}

std::pair<int, int> argmin_pair(const Eigen::MatrixXd& d) {
    const auto n = static_cast<int>(d.rows());
    if (n < 2) throw ValidationError("argmin_pair: need at least two items");
    std::pair<int, int> best{0, 1};
    double value = std::numeric_limits<double>::infinity();
    bool found = false;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double v = d(i, j);
            if (!found || v < value) {
                value = v;
                best = {i, j};
                found = true;
            }
        }
    }
    return best;
}

IntegrationContext merge_context(const ClusterState& state, const IntegrationContext& ctx) {
    ctx.validate();
    IntegrationContext out = ctx;
    if (state.size() > 0 && !ctx.uses_quadrature(state.subclusters.front().density.dim()) && !ctx.sample) {
        out.sample = std::make_shared<ImportanceSample>(state.overall_density(), ctx.is_samples, ctx.seed);
    }
    return out;
}

MergeStep merge_step(const ClusterState& state, Measure m, const IntegrationContext& ctx) {
    if (state.size() < 2) throw ValidationError("merge_step: need at least two subclusters");
    const auto local = merge_context(state, ctx);
    const Eigen::MatrixXd d = pairwise_matrix(state, m, local);
    const auto [i, j] = argmin_pair(d);
    const int id_i = state.subclusters[static_cast<std::size_t>(i)].id;
    const int id_j = state.subclusters[static_cast<std::size_t>(j)].id;
    MergeStep out{merge_pair(state, id_i, id_j), {}};
    out.record = MergeRecord{out.state.step, id_i, id_j, out.state.next_id - 1, d(i, j), static_cast<int>(out.state.size())};
    return out;
}

MergeRun run_to_c(const ClusterState& state, Measure m, int C, const IntegrationContext& ctx) {
    if (C < 1 || static_cast<std::size_t>(C) > state.size())
        throw ValidationError("run_to_c: C must lie between 1 and the current number of subclusters");
    MergeRun run{state, Dendrogram{m, {}}};
    if (static_cast<std::size_t>(C) == state.size()) return run;

    const auto local = merge_context(state, ctx);
    std::map<std::pair<int, int>, double> cache;  // keyed by (smaller id, larger id)
    auto key = [](int a, int b) { return a < b ? std::make_pair(a, b) : std::make_pair(b, a); };

    {
        const Eigen::MatrixXd d = pairwise_matrix(run.state, m, local);
        for (std::size_t i = 0; i < run.state.size(); ++i)
            for (std::size_t j = i + 1; j < run.state.size(); ++j)
                cache[key(run.state.subclusters[i].id, run.state.subclusters[j].id)] = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    while (run.state.size() > static_cast<std::size_t>(C)) {
        const auto n = static_cast<Eigen::Index>(run.state.size());
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double v = cache.at(key(run.state.subclusters[static_cast<std::size_t>(i)].id,
                                              run.state.subclusters[static_cast<std::size_t>(j)].id));
                d(i, j) = v;
                d(j, i) = v;
            }
        }
        const auto [i, j] = argmin_pair(d);
        const int id_i = run.state.subclusters[static_cast<std::size_t>(i)].id;
        const int id_j = run.state.subclusters[static_cast<std::size_t>(j)].id;
        run.state = merge_pair(run.state, id_i, id_j);
        const int new_id = run.state.next_id - 1;
        run.dendrogram.records.push_back(MergeRecord{run.state.step, id_i, id_j, new_id, d(i, j), static_cast<int>(run.state.size())});
        if (run.state.size() <= static_cast<std::size_t>(C)) break;

        // Only pairs with the new subcluster need evaluating.
        const std::size_t pos = run.state.index_of(new_id);
        std::vector<std::size_t> others;
        for (std::size_t k = 0; k < run.state.size(); ++k)
            if (k != pos) others.push_back(k);
        std::vector<double> values(others.size());
        std::vector<std::exception_ptr> errors(others.size());
#pragma omp parallel for schedule(dynamic)
        for (std::size_t q = 0; q < others.size(); ++q) {
            try {
                const auto& a = run.state.subclusters[std::min(pos, others[q])];
                const auto& b = run.state.subclusters[std::max(pos, others[q])];
                values[q] = evaluate(m, a, b, local);
            } catch (...) {
                errors[q] = std::current_exception();
            }
        }
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
        for (std::size_t q = 0; q < others.size(); ++q)
            cache[key(new_id, run.state.subclusters[others[q]].id)] = values[q];
    }
    return run;
}

std::vector<std::pair<int, double>> elbow_curve(const Dendrogram& dendrogram) {
    if (dendrogram.records.empty()) throw ValidationError("elbow_curve: empty dendrogram");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& r : dendrogram.records) {
        if (!std::isfinite(r.value)) continue;
        lo = std::min(lo, r.value);
        hi = std::max(hi, r.value);
    }
    std::vector<std::pair<int, double>> out;
    for (const auto& r : dendrogram.records) {
        double v = std::numeric_limits<double>::quiet_NaN();
        if (std::isfinite(r.value)) v = hi > lo ? (r.value - lo) / (hi - lo) : 1.0;
        out.emplace_back(r.remaining, v);
    }
    return out;
}

}  // namespace hybridclust
