#pragma once

#include "hybridclust/cluster_state.hpp"
#include "hybridclust/dissim.hpp"

#include <utility>
#include <vector>

namespace hybridclust {

struct MergeRecord {
    int step = 0;
    int id_i = 0;
    int id_j = 0;
    int new_id = 0;
    double value = 0.0;
    int remaining = 0;
};

struct Dendrogram {
    Measure measure = Measure::klinf;
    std::vector<MergeRecord> records;
};

/// Replaces subclusters i and j (ids) by their weight-proportional mixture.
/// The new subcluster takes the position of whichever of the two comes
/// first and receives the next unused id.
ClusterState merge_pair(const ClusterState& state, int id_i, int id_j);

/// Position pair (i < j) of the smallest off-diagonal entry; ties go to
/// the lexicographically smallest pair.
std::pair<int, int> argmin_pair(const Eigen::MatrixXd& d);

struct MergeStep {
    ClusterState state;
    MergeRecord record;
};

/// One merge of the pair with the lowest dissimilarity.
MergeStep merge_step(const ClusterState& state, Measure m, const IntegrationContext& ctx);

struct MergeRun {
    ClusterState state;
    Dendrogram dendrogram;
};

/// Merges until C subclusters remain. Pair values are cached across steps,
/// so only pairs involving the newest subcluster are evaluated after the
/// first step.
MergeRun run_to_c(const ClusterState& state, Measure m, int C, const IntegrationContext& ctx);

/// Context used for a merge on `state`: when sampling is in effect and no
/// sample is attached, one is drawn from the overall density so every pair
/// at every step shares the same points.
IntegrationContext merge_context(const ClusterState& state, const IntegrationContext& ctx);

/// (remaining clusters, min-max normalized value) per record; a single
/// record, or a constant curve, maps to 1.
std::vector<std::pair<int, double>> elbow_curve(const Dendrogram& dendrogram);

}  // namespace hybridclust
