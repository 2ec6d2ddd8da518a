#pragma once

#include "hybridclust/mixture.hpp"

#include <vector>

namespace hybridclust {

/// A weighted density produced by the partitional step, or by merging such
/// subclusters. `members` lists the original component indices it absorbs.
struct Subcluster {
    int id = 0;
    double weight = 0.0;
    MixtureDensity density;
    std::vector<int> members;
};

/// The subclusters alive at some point of the hierarchical merge.
struct ClusterState {
    std::vector<Subcluster> subclusters;
    int step = 0;
    int next_id = 0;

    /// One subcluster per mixture term, ids 0..K-1.
    static ClusterState from_mixture(const MixtureDensity& mix);

    std::size_t size() const noexcept { return subclusters.size(); }
    /// Position of the subcluster with this id; throws ValidationError.
    std::size_t index_of(int id) const;
    /// Weight-proportional mixture of every live subcluster.
    MixtureDensity overall_density() const;
    /// Checks weights, id uniqueness and that members partition 0..K-1.
    void validate(int original_count) const;
};

}  // namespace hybridclust
