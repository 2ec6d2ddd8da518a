#include "hybridclust/io.hpp"

#include "hybridclust/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hybridclust::io {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

bool parse_number(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    const char* first = cell.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), out);
    return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    while (!out.empty() && trim(out.back()).empty()) out.pop_back();
    return out;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, int d) {
    if (!j.is_array() || static_cast<int>(j.size()) != d) throw ValidationError("model: covariance must be d x d");
    Eigen::MatrixXd m(d, d);
    for (int r = 0; r < d; ++r) {
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != d)
            throw ValidationError("model: covariance must be d x d");
        for (int c = 0; c < d; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

CsvData parse_csv(const std::string& text, const std::string& source) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw ValidationError(source + ": empty file");
    CsvData out;
    out.columns = split(lines[0]);
    for (std::size_t c = 0; c < out.columns.size(); ++c) {
        if (out.columns[c].empty())
            throw ValidationError(source + ": header column " + std::to_string(c + 1) + " has no name");
    }
    const bool labelled = out.columns.size() >= 2 && out.columns.back() == "label";
    const std::size_t width = out.columns.size();
    const std::size_t features = labelled ? width - 1 : width;
    if (lines.size() < 2) throw ValidationError(source + ": no data rows");

    out.points.resize(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(features));
    if (labelled) out.labels.emplace(lines.size() - 1, 0);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split(lines[r]);
        const std::string where = source + ": row " + std::to_string(r + 1);
        if (cells.size() != width) {
            throw ValidationError(where + ": expected " + std::to_string(width) + " cells, found " +
                                  std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < width; ++c) {
            double v = 0.0;
            if (!parse_number(cells[c], v)) {
                throw ValidationError(where + ", column " + std::to_string(c + 1) + " (" + out.columns[c] + "): '" +
                                      cells[c] + "' is not a number");
            }
            if (c < features) {
                out.points(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) = v;
            } else {
                if (v != std::floor(v))
                    throw ValidationError(where + ", column " + std::to_string(c + 1) + ": label must be an integer");
                (*out.labels)[r - 1] = static_cast<int>(v);
            }
        }
    }
    if (labelled) out.columns.pop_back();
    return out;
}

CsvData read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path), path.string()); }

CsvData select_columns(const CsvData& data, const std::vector<std::string>& names) {
    CsvData out;
    out.labels = data.labels;
    out.points.resize(data.points.rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto it = std::find(data.columns.begin(), data.columns.end(), names[k]);
        if (it == data.columns.end()) throw ValidationError("unknown column '" + names[k] + "'");
        out.points.col(static_cast<Eigen::Index>(k)) = data.points.col(it - data.columns.begin());
        out.columns.push_back(names[k]);
    }
    return out;
}

CsvData read_wdbc(const std::filesystem::path& path) {
    const auto lines = lines_of(read_file(path));
    if (lines.empty()) throw ValidationError(path.string() + ": empty file");
    CsvData out;
    for (int f = 1; f <= 30; ++f) out.columns.push_back("f" + std::to_string(f));
    out.points.resize(static_cast<Eigen::Index>(lines.size()), 30);
    out.labels.emplace(lines.size(), 0);
    for (std::size_t r = 0; r < lines.size(); ++r) {
        const auto cells = split(lines[r]);
        const std::string where = path.string() + ": row " + std::to_string(r + 1);
        if (cells.size() != 32) throw ValidationError(where + ": expected 32 cells, found " + std::to_string(cells.size()));
        if (cells[1] != "M" && cells[1] != "B") throw ValidationError(where + ", column 2: diagnosis must be M or B");
        (*out.labels)[r] = cells[1] == "M" ? 1 : 0;
        for (int c = 0; c < 30; ++c) {
            double v = 0.0;
            if (!parse_number(cells[static_cast<std::size_t>(c + 2)], v))
                throw ValidationError(where + ", column " + std::to_string(c + 3) + ": not a number");
            out.points(static_cast<Eigen::Index>(r), c) = v;
        }
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw ValidationError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json mixture_to_json(const MixtureDensity& mix) {
    nlohmann::json coefs = nlohmann::json::array(), means = nlohmann::json::array(), covs = nlohmann::json::array();
    for (const auto& t : mix.terms()) {
        coefs.push_back(t.coef);
        means.push_back(std::vector<double>(t.component.mean().data(), t.component.mean().data() + mix.dim()));
        nlohmann::json cov = nlohmann::json::array();
        for (int r = 0; r < mix.dim(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < mix.dim(); ++c) row.push_back(t.component.cov()(r, c));
            cov.push_back(row);
        }
        covs.push_back(cov);
    }
    return {{"d", mix.dim()}, {"K", mix.size()}, {"coefs", coefs}, {"means", means}, {"covs", covs}};
}

MixtureDensity mixture_from_json(const nlohmann::json& j) {
    try {
        const int d = j.at("d").get<int>();
        const int K = j.at("K").get<int>();
        const auto& coefs = j.at("coefs");
        const auto& means = j.at("means");
        const auto& covs = j.at("covs");
        if (d < 1 || K < 1) throw ValidationError("model: d and K must be positive");
        if (static_cast<int>(coefs.size()) != K || static_cast<int>(means.size()) != K ||
            static_cast<int>(covs.size()) != K)
            throw ValidationError("model: coefs, means and covs must have K entries");
        std::vector<MixtureTerm> terms;
        for (int k = 0; k < K; ++k) {
            const auto mean = means[k].get<std::vector<double>>();
            if (static_cast<int>(mean.size()) != d) throw ValidationError("model: mean must have d entries");
            terms.push_back({coefs[k].get<double>(),
                             GaussianComponent(Eigen::Map<const Eigen::VectorXd>(mean.data(), d), matrix_from_json(covs[k], d))});
        }
        return MixtureDensity(std::move(terms));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("model: ") + e.what());
    }
}

nlohmann::json model_to_json(const FittedModel& model, const nlohmann::json& metadata) {
    nlohmann::json j = mixture_to_json(model.mixture);
    j["schema"] = kSchemaVersion;
    j["logL"] = model.log_likelihood;
    j["bic"] = model.bic();
    j["aic"] = model.aic();
    j["n"] = model.n_obs;
    j["criterion"] = to_string(model.criterion);
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& [K, s] : model.criterion_scores)
        scores.push_back({{"K", K}, {"logL", s.log_likelihood}, {"bic", s.bic}, {"aic", s.aic}});
    j["criterion_scores"] = scores;
    j["metadata"] = metadata;
    return j;
}

LoadedModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("model: expected a JSON object");
    if (j.contains("schema") && j["schema"] != kSchemaVersion) throw ValidationError("model: unsupported schema");
    return {mixture_from_json(j), j.value("logL", std::numeric_limits<double>::quiet_NaN()),
            j.value("metadata", nlohmann::json::object())};
}

nlohmann::json dendrogram_to_json(const Dendrogram& d, const nlohmann::json& metadata) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : d.records) {
        records.push_back({{"step", r.step},
                           {"i", r.id_i},
                           {"j", r.id_j},
                           {"new_id", r.new_id},
                           {"value", r.value},
                           {"remaining", r.remaining}});
    }
    nlohmann::json elbow = nlohmann::json::array();
    for (const auto& [remaining, v] : elbow_curve(d)) elbow.push_back({{"remaining", remaining}, {"value", v}});
    return {{"schema", kSchemaVersion},
            {"measure", to_string(d.measure)},
            {"records", records},
            {"elbow", elbow},
            {"metadata", metadata}};
}

std::string dendrogram_to_csv(const Dendrogram& d) {
    std::string out = "step,i,j,value,remaining\n";
    for (const auto& r : d.records) {
        out += std::to_string(r.step) + ',' + std::to_string(r.id_i) + ',' + std::to_string(r.id_j) + ',' +
               format_double(r.value) + ',' + std::to_string(r.remaining) + '\n';
    }
    return out;
}

std::string elbow_to_csv(const Dendrogram& d) {
    std::string out = "remaining,normalized_value\n";
    for (const auto& [remaining, v] : elbow_curve(d)) out += std::to_string(remaining) + ',' + format_double(v) + '\n';
    return out;
}

std::string results_to_csv(const std::vector<RepResult>& rows) {
    std::string out = "rep,criterion,measure,K_selected,misclass,min_misclass,excess\n";
    for (const auto& r : rows) {
        out += std::to_string(r.rep) + ',' + to_string(r.criterion) + ',' + to_string(r.measure) + ',' +
               std::to_string(r.k_selected) + ',' + format_double(r.misclass) + ',' + format_double(r.min_misclass) +
               ',' + format_double(r.excess) + '\n';
    }
    return out;
}

nlohmann::json summary_to_json(const ExperimentResult& result, const nlohmann::json& metadata) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& s : result.summary) {
        rows.push_back({{"criterion", to_string(s.criterion)},
                        {"measure", to_string(s.measure)},
                        {"reps", s.reps},
                        {"mean_excess", s.mean_excess},
                        {"ci_half_width", std::isfinite(s.ci_half_width) ? nlohmann::json(s.ci_half_width) : nullptr},
                        {"mean_misclass", s.mean_misclass}});
    }
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : result.failures) failures.push_back({{"rep", f.rep}, {"message", f.message}});
    return {{"schema", kSchemaVersion},
            {"distribution", to_string(result.scenario.family)},
            {"dim", result.scenario.dim},
            {"size", to_string(result.scenario.size)},
            {"summary", rows},
            {"failures", failures},
            {"metadata", metadata}};
}

}  // namespace hybridclust::io
