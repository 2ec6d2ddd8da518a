#include "hybridclust/cluster_state.hpp"

#include "hybridclust/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace hybridclust {

ClusterState ClusterState::from_mixture(const MixtureDensity& mix) {
    ClusterState s;
    for (std::size_t k = 0; k < mix.size(); ++k) {
        const auto& t = mix.terms()[k];
        s.subclusters.push_back(Subcluster{static_cast<int>(k), t.coef, MixtureDensity(t.component), {static_cast<int>(k)}});
    }
    s.next_id = static_cast<int>(mix.size());
    return s;
}

std::size_t ClusterState::index_of(int id) const {
    for (std::size_t i = 0; i < subclusters.size(); ++i) {
        if (subclusters[i].id == id) return i;
    }
    throw ValidationError("cluster state: unknown subcluster id " + std::to_string(id));
}

MixtureDensity ClusterState::overall_density() const {
    if (subclusters.empty()) throw ValidationError("cluster state: no subclusters");
    std::vector<MixtureTerm> terms;
    double total = 0.0;
    for (const auto& s : subclusters) total += s.weight;
    for (const auto& s : subclusters) {
        for (const auto& t : s.density.terms()) terms.push_back({s.weight / total * t.coef, t.component});
    }
    return MixtureDensity(std::move(terms));
}

void ClusterState::validate(int original_count) const {
    double total = 0.0;
    std::set<int> ids;
    std::vector<int> seen;
    for (const auto& s : subclusters) {
        if (!(s.weight > 0.0) || s.weight > 1.0 + 1e-12) throw ValidationError("cluster state: weight outside (0, 1]");
        if (s.members.empty()) throw ValidationError("cluster state: subcluster without members");
        if (!ids.insert(s.id).second) throw ValidationError("cluster state: duplicate id");
        total += s.weight;
        seen.insert(seen.end(), s.members.begin(), s.members.end());
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("cluster state: weights do not sum to one");
    std::sort(seen.begin(), seen.end());
    bool partition = static_cast<int>(seen.size()) == original_count;
    for (std::size_t i = 0; partition && i < seen.size(); ++i) partition = seen[i] == static_cast<int>(i);
    if (!partition) throw ValidationError("cluster state: members do not partition the original components");
}

}  // namespace hybridclust
