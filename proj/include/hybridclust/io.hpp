#pragma once

#include "hybridclust/em.hpp"
#include "hybridclust/merge.hpp"
#include "hybridclust/simlab.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hybridclust::io {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Numeric table with a header row. A last column named `label` is read
/// as integer class labels instead of a feature.
struct CsvData {
    std::vector<std::string> columns;
    DataMatrix points;
    std::optional<std::vector<int>> labels;
};

/// Throws ValidationError naming the row and column of the first bad cell.
CsvData read_csv(const std::filesystem::path& path);
CsvData parse_csv(const std::string& text, const std::string& source = "<string>");

/// Keeps the named columns, in the given order.
CsvData select_columns(const CsvData& data, const std::vector<std::string>& names);

/// The UCI breast cancer (diagnostic) file: id, diagnosis (M/B), then 30
/// features, no header. Columns are named f1..f30; labels are M = 1, B = 0.
CsvData read_wdbc(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

nlohmann::json mixture_to_json(const MixtureDensity& mix);
MixtureDensity mixture_from_json(const nlohmann::json& j);

/// {schema, d, K, coefs, means, covs, logL, bic, aic, criterion_scores, metadata}
nlohmann::json model_to_json(const FittedModel& model, const nlohmann::json& metadata);

struct LoadedModel {
    MixtureDensity mixture;
    double log_likelihood;
    nlohmann::json metadata;
};
LoadedModel model_from_json(const nlohmann::json& j);

nlohmann::json dendrogram_to_json(const Dendrogram& d, const nlohmann::json& metadata);
/// step,i,j,value,remaining
std::string dendrogram_to_csv(const Dendrogram& d);
/// remaining,normalized_value
std::string elbow_to_csv(const Dendrogram& d);

/// rep,criterion,measure,K_selected,misclass,min_misclass,excess
std::string results_to_csv(const std::vector<RepResult>& rows);
nlohmann::json summary_to_json(const ExperimentResult& result, const nlohmann::json& metadata);

/// Shortest text that reads back to the same double.
std::string format_double(double v);

}  // namespace hybridclust::io
