#include "commands.hpp"

#include "hybridclust/errors.hpp"

#include <cstdio>
#include <sstream>

namespace hybridclust::app {

std::filesystem::path data_dir() { return HC_DATA_DIR; }

DataMatrix lagged_pairs(const Eigen::VectorXd& series) {
    if (series.size() < 2) throw ValidationError("lagged pairs: need at least two observations");
    DataMatrix out(series.size() - 1, 2);
    for (Eigen::Index i = 1; i < series.size(); ++i) {
        out(i - 1, 0) = series[i - 1];
        out(i - 1, 1) = series[i];
    }
    return out;
}

FaithfulDemo faithful_demo(const std::filesystem::path& csv, std::uint64_t seed, const IntegrationContext& ctx) {
    const auto data = io::select_columns(io::read_csv(csv), {"eruptions"});
    DataMatrix points = lagged_pairs(data.points.col(0));
    FittedModel model = make_model(em_fit(points, 4, seed), points);
    const ClusterState start = ClusterState::from_mixture(model.mixture);
    const MergeRecord se = merge_step(start, Measure::se, ctx).record;
    const MergeRecord bhat = merge_step(start, Measure::bhat, ctx).record;
    return {std::move(points), std::move(model), se, bhat};
}

std::string table1_text(const Table1& t, bool with_trace) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-7s", "measure");
    os << buf;
    for (auto p : kTable1Columns) {
        std::snprintf(buf, sizeof buf, " %-14s", to_string(p).c_str());
        os << buf;
    }
    os << '\n';
    for (std::size_t r = 0; r < t.measures.size(); ++r) {
        std::snprintf(buf, sizeof buf, "%-7s", to_string(t.measures[r]).c_str());
        os << buf;
        for (const auto& v : t.verdicts[r]) {
            const char* mark = v.state == VerdictState::pass ? "x" : v.state == VerdictState::fail ? "-" : "?";
            std::snprintf(buf, sizeof buf, " %-14s", mark);
            os << buf;
        }
        os << '\n';
    }
    if (with_trace) {
        for (std::size_t r = 0; r < t.measures.size(); ++r) {
            for (const auto& v : t.verdicts[r]) {
                os << '\n' << to_string(v.measure) << ' ' << to_string(v.property) << ": " << to_string(v.state)
                   << " (inf " << io::format_double(v.probe_inf) << ", sup " << io::format_double(v.probe_sup) << ")\n";
                if (!v.detail.empty()) os << "  " << v.detail << '\n';
                for (const auto& tp : v.limit_trace) {
                    os << "  " << tp.sequence << ' ' << io::format_double(tp.parameter) << ' '
                       << io::format_double(tp.value) << '\n';
                }
            }
        }
    }
    return os.str();
}

nlohmann::json table1_json(const Table1& t, bool with_trace) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < t.measures.size(); ++r) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& v : t.verdicts[r]) {
            nlohmann::json cell = {{"property", to_string(v.property)},
                                   {"state", to_string(v.state)},
                                   {"pass", v.pass()},
                                   {"probe_inf", v.probe_inf},
                                   {"probe_sup", v.probe_sup},
                                   {"detail", v.detail}};
            if (with_trace) {
                nlohmann::json trace = nlohmann::json::array();
                for (const auto& tp : v.limit_trace)
                    trace.push_back({{"sequence", tp.sequence}, {"parameter", tp.parameter}, {"value", tp.value}});
                cell["limit_trace"] = trace;
            }
            cells.push_back(cell);
        }
        rows.push_back({{"measure", to_string(t.measures[r])}, {"verdicts", cells}});
    }
    return {{"schema", io::kSchemaVersion}, {"rows", rows}};
}

std::string orderings_text(const std::vector<OrderingCheck>& all) {
    std::ostringstream os;
    for (const auto& o : all) {
        os << o.label << ": " << o.statement << "  [" << io::format_double(o.lhs) << " vs " << io::format_double(o.rhs)
           << "] " << (o.holds ? "holds" : "does not hold") << '\n';
    }
    return os.str();
}

nlohmann::json integration_json(const IntegrationContext& ctx) {
    return {{"mode", to_string(ctx.mode)},
            {"quad_rel_tol", ctx.quad_rel_tol},
            {"quad_rel_tol_multi", ctx.quad_rel_tol_multi},
            {"quad_abs_tol", ctx.quad_abs_tol},
            {"support_sigmas", ctx.support_sigmas},
            {"is_samples", ctx.is_samples},
            {"seed", ctx.seed}};
}

}  // namespace hybridclust::app
