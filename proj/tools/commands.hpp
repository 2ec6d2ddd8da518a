#pragma once

#include "hybridclust/io.hpp"
#include "hybridclust/properties.hpp"

#include <filesystem>
#include <string>

namespace hybridclust::app {

/// Location of the bundled data directory, fixed at build time.
std::filesystem::path data_dir();

/// (previous eruption, eruption) for every consecutive pair.
DataMatrix lagged_pairs(const Eigen::VectorXd& series);

struct FaithfulDemo {
    DataMatrix points;
    FittedModel model;
    MergeRecord se_first;
    MergeRecord bhat_first;

    bool merges_differ() const {
        return std::minmax(se_first.id_i, se_first.id_j) != std::minmax(bhat_first.id_i, bhat_first.id_j);
    }
};

/// Fits K = 4 to the lagged eruption pairs and takes the first merge under
/// SE and under Bhat.
FaithfulDemo faithful_demo(const std::filesystem::path& csv, std::uint64_t seed, const IntegrationContext& ctx);

/// Aligned text table with one row per measure.
std::string table1_text(const Table1& t, bool with_trace);
nlohmann::json table1_json(const Table1& t, bool with_trace);

std::string orderings_text(const std::vector<OrderingCheck>& all);

nlohmann::json integration_json(const IntegrationContext& ctx);

}  // namespace hybridclust::app
