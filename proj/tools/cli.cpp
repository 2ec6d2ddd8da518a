#include "commands.hpp"

#include "hybridclust/errors.hpp"
#include "hybridclust/kernels.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <set>

using namespace hybridclust;

namespace {

struct Common {
    std::uint64_t seed = 0;
    std::string integration = "auto";
    std::size_t is_samples = 100'000;

    IntegrationContext context() const {
        IntegrationContext ctx;
        ctx.mode = parse_integration_mode(integration);
        ctx.is_samples = is_samples;
        ctx.seed = seed;
        ctx.validate();
        return ctx;
    }
};

void add_common(CLI::App* cmd, Common& c, bool integration) {
    cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    if (integration) {
        cmd->add_option("--integration", c.integration, "auto, quadrature or importance")->capture_default_str();
        cmd->add_option("--is-samples", c.is_samples, "Importance-sampling draws")->capture_default_str();
    }
}

nlohmann::json metadata(const std::string& command, const Common& c, nlohmann::json settings) {
    settings["seed"] = c.seed;
    return {{"tool", "hybridclust"}, {"version", io::kToolVersion}, {"command", command}, {"settings", settings}};
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t comma = s.find(',', start);
        const std::string item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

DataMatrix load_points(const std::string& path, const std::string& format, const std::string& columns,
                       std::optional<std::vector<int>>* labels) {
    if (format != "csv" && format != "wdbc") throw ValidationError("unknown format '" + format + "'");
    io::CsvData data = format == "wdbc" ? io::read_wdbc(path) : io::read_csv(path);
    if (!columns.empty()) data = io::select_columns(data, split_list(columns));
    if (labels) *labels = data.labels;
    return data.points;
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
    } else {
        io::write_file_atomic(path, content);
    }
}

}  // namespace

int main(int argc, char** argv) {
    kernels::apply_thread_cap();
    CLI::App app{"Model-based hybrid clustering: Gaussian mixtures merged by density dissimilarities"};
    app.require_subcommand(1);

    // fit
    Common fit_c;
    std::string fit_input, fit_out, fit_columns, fit_criterion = "bic", fit_format = "csv";
    int kmin = 1, kmax = 25, fixed_k = 0;
    auto* fit = app.add_subcommand("fit", "Fit a Gaussian mixture, choosing K by BIC or AIC");
    fit->add_option("--input", fit_input, "CSV with a header row")->required();
    fit->add_option("--columns,--features", fit_columns, "Comma-separated columns to use");
    fit->add_option("--format", fit_format, "csv, or wdbc for the UCI breast cancer layout")->capture_default_str();
    fit->add_option("--kmin", kmin)->capture_default_str();
    fit->add_option("--kmax", kmax)->capture_default_str();
    fit->add_option("--k", fixed_k, "Fit exactly this many components");
    fit->add_option("--criterion", fit_criterion, "bic or aic")->capture_default_str();
    fit->add_option("--out", fit_out, "Model JSON path (stdout if omitted)");
    add_common(fit, fit_c, false);

    // merge
    Common merge_c;
    std::string merge_model, merge_measure = "klinf", merge_json, merge_csv, merge_elbow;
    int merge_clusters = 1;
    auto* merge = app.add_subcommand("merge", "Merge mixture components down to C clusters");
    merge->add_option("--model", merge_model, "Model JSON from fit")->required();
    merge->add_option("--measure", merge_measure)->capture_default_str();
    merge->add_option("--clusters", merge_clusters)->capture_default_str();
    merge->add_option("--out", merge_json, "Dendrogram JSON path (stdout if omitted)");
    merge->add_option("--csv", merge_csv, "Dendrogram CSV path");
    merge->add_option("--elbow", merge_elbow, "Elbow curve CSV path");
    add_common(merge, merge_c, true);

    // properties
    std::string prop_measure, prop_json;
    bool prop_trace = false;
    auto* props = app.add_subcommand("properties", "Check the six properties for every measure");
    props->add_option("--measure", prop_measure, "Only this measure");
    props->add_flag("--trace", prop_trace, "Include limit traces");
    props->add_option("--json", prop_json, "Also write the report as JSON");

    // simulate
    Common sim_c;
    std::string sim_dist = "student_t", sim_size = "small", sim_criteria = "bic", sim_measures, sim_out = "results.csv";
    int sim_dim = 2, sim_reps = 20, sim_clusters = 3, sim_kmin = 1, sim_kmax = 25;
    auto* sim = app.add_subcommand("simulate", "Repeated fit-and-merge runs on a simulated scenario");
    sim->add_option("--dist", sim_dist, "student_t, cauchy, uniform, gamma, gauss_noise, gauss_laplace")
        ->capture_default_str();
    sim->add_option("--dim", sim_dim)->capture_default_str();
    sim->add_option("--size", sim_size, "small or large")->capture_default_str();
    sim->add_option("--reps", sim_reps)->capture_default_str();
    sim->add_option("--criteria", sim_criteria, "Comma-separated: bic,aic")->capture_default_str();
    sim->add_option("--measures", sim_measures, "Comma-separated measures (all if omitted)");
    sim->add_option("--clusters", sim_clusters)->capture_default_str();
    sim->add_option("--kmin", sim_kmin)->capture_default_str();
    sim->add_option("--kmax", sim_kmax)->capture_default_str();
    sim->add_option("--out", sim_out, "Per-rep CSV; the summary goes next to it as .summary.json")
        ->capture_default_str();
    add_common(sim, sim_c, true);

    // eval
    Common eval_c;
    std::string eval_model, eval_input, eval_columns, eval_measure, eval_out, eval_format = "csv";
    int eval_clusters = 0;
    auto* eval = app.add_subcommand("eval", "Misclassification of a model against labelled data");
    eval->add_option("--model", eval_model)->required();
    eval->add_option("--input", eval_input, "CSV whose last column is `label`, or a wdbc file")->required();
    eval->add_option("--columns,--features", eval_columns, "Comma-separated feature columns");
    eval->add_option("--format", eval_format, "csv, or wdbc for the UCI breast cancer layout")->capture_default_str();
    eval->add_option("--measure", eval_measure, "Merge with this measure before scoring");
    eval->add_option("--clusters", eval_clusters, "Clusters to merge down to (default: number of classes)");
    eval->add_option("--out", eval_out, "Report JSON path (stdout if omitted)");
    add_common(eval, eval_c, true);

    // demo-faithful
    Common demo_c;
    std::string demo_data = (app::data_dir() / "faithful.csv").string(), demo_out;
    auto* demo = app.add_subcommand("demo-faithful", "K = 4 fit of lagged Old Faithful eruptions; SE vs Bhat");
    demo->add_option("--data", demo_data)->capture_default_str();
    demo->add_option("--out-dir", demo_out, "Write the lagged points and the model here");
    add_common(demo, demo_c, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*fit) {
            const DataMatrix x = load_points(fit_input, fit_format, fit_columns, nullptr);
            const Criterion crit = parse_criterion(fit_criterion);
            const FittedModel model = fixed_k > 0 ? make_model(em_fit(x, fixed_k, fit_c.seed), x, crit)
                                                  : select_model(x, kmin, kmax, crit, fit_c.seed);
            const auto meta = metadata("fit", fit_c,
                                       {{"input", fit_input}, {"kmin", kmin}, {"kmax", kmax}, {"k", fixed_k},
                                        {"criterion", fit_criterion}, {"columns", fit_columns}});
            emit(fit_out, io::model_to_json(model, meta).dump(2) + "\n");
            std::cerr << "K = " << model.K() << ", logL = " << model.log_likelihood << ", BIC = " << model.bic()
                      << ", AIC = " << model.aic() << '\n';
        } else if (*merge) {
            const auto model = io::model_from_json(nlohmann::json::parse(io::read_file(merge_model)));
            const Measure m = parse_measure(merge_measure);
            const ClusterState start = ClusterState::from_mixture(model.mixture);
            const auto ctx = merge_c.context();
            const MergeRun run = run_to_c(start, m, merge_clusters, ctx);
            const auto meta = metadata("merge", merge_c,
                                       {{"model", merge_model}, {"measure", merge_measure},
                                        {"clusters", merge_clusters}, {"integration", app::integration_json(ctx)}});
            emit(merge_json, io::dendrogram_to_json(run.dendrogram, meta).dump(2) + "\n");
            if (!merge_csv.empty()) io::write_file_atomic(merge_csv, io::dendrogram_to_csv(run.dendrogram));
            if (!merge_elbow.empty()) io::write_file_atomic(merge_elbow, io::elbow_to_csv(run.dendrogram));
        } else if (*props) {
            IntegrationContext ctx;
            ctx.mode = IntegrationMode::quadrature;
            std::vector<Measure> ms;
            if (!prop_measure.empty()) ms.push_back(parse_measure(prop_measure));
            const Table1 t = table1(ctx, ms);
            std::cout << app::table1_text(t, prop_trace);
            if (!prop_json.empty()) io::write_file_atomic(prop_json, app::table1_json(t, prop_trace).dump(2) + "\n");
            if (t.any_indeterminate()) {
                std::cerr << "error: at least one property could not be decided (marked ?)\n";
                return 2;
            }
        } else if (*sim) {
            ScenarioC scn{parse_family(sim_dist), sim_dim, parse_sample_size(sim_size)};
            ExperimentConfig cfg;
            cfg.criteria.clear();
            for (const auto& c : split_list(sim_criteria)) cfg.criteria.push_back(parse_criterion(c));
            if (!sim_measures.empty()) {
                cfg.measures.clear();
                for (const auto& m : split_list(sim_measures)) cfg.measures.push_back(parse_measure(m));
            }
            cfg.reps = sim_reps;
            cfg.clusters = sim_clusters;
            cfg.base_seed = sim_c.seed;
            cfg.k_min = sim_kmin;
            cfg.k_max = sim_kmax;
            cfg.integration = sim_c.context();
            const ExperimentResult res = run_experiment(scn, cfg);
            const auto meta = metadata("simulate", sim_c,
                                       {{"dist", sim_dist}, {"dim", sim_dim}, {"size", sim_size}, {"reps", sim_reps},
                                        {"criteria", sim_criteria}, {"measures", sim_measures},
                                        {"clusters", sim_clusters}, {"kmin", sim_kmin}, {"kmax", sim_kmax},
                                        {"integration", app::integration_json(cfg.integration)}});
            io::write_file_atomic(sim_out, io::results_to_csv(res.rows));
            std::filesystem::path summary = sim_out;
            summary.replace_extension(".summary.json");
            io::write_file_atomic(summary, io::summary_to_json(res, meta).dump(2) + "\n");
            for (const auto& s : res.summary) {
                std::cout << to_string(s.criterion) << ' ' << to_string(s.measure) << ": excess "
                          << s.mean_excess << " +/- " << s.ci_half_width << " (" << s.reps << " reps)\n";
            }
            if (!res.failures.empty()) std::cerr << res.failures.size() << " rep(s) failed; see the summary\n";
        } else if (*eval) {
            const auto model = io::model_from_json(nlohmann::json::parse(io::read_file(eval_model)));
            std::optional<std::vector<int>> labels;
            const DataMatrix x = load_points(eval_input, eval_format, eval_columns, &labels);
            if (!labels) throw ValidationError("eval: the input needs a trailing `label` column");
            const std::vector<bool> mask(labels->size(), false);
            const auto map = map_assign(model.mixture, x);
            nlohmann::json report = {{"K", model.mixture.size()},
                                     {"min_misclass", min_misclassification(map, *labels, mask)}};
            if (!eval_measure.empty()) {
                const int classes = static_cast<int>(std::set<int>(labels->begin(), labels->end()).size());
                const int C = eval_clusters > 0 ? eval_clusters : classes;
                const ClusterState start = ClusterState::from_mixture(model.mixture);
                const MergeRun run = run_to_c(start, parse_measure(eval_measure), C, eval_c.context());
                const double mis = misclassification_rate(final_labels(run.state, map), *labels, mask);
                report["measure"] = eval_measure;
                report["clusters"] = C;
                report["misclass"] = mis;
                report["excess"] = mis - report["min_misclass"].get<double>();
            }
            report["metadata"] = metadata("eval", eval_c, {{"model", eval_model}, {"input", eval_input}});
            emit(eval_out, report.dump(2) + "\n");
        } else if (*demo) {
            IntegrationContext ctx;
            const auto d = app::faithful_demo(demo_data, demo_c.seed, ctx);
            std::cout << "lagged pairs: " << d.points.rows() << ", K = " << d.model.K()
                      << ", BIC = " << d.model.bic() << '\n';
            std::cout << "first merge under SE:   " << d.se_first.id_i << " + " << d.se_first.id_j << " (value "
                      << d.se_first.value << ")\n";
            std::cout << "first merge under Bhat: " << d.bhat_first.id_i << " + " << d.bhat_first.id_j << " (value "
                      << d.bhat_first.value << ")\n";
            std::cout << (d.merges_differ() ? "the two measures merge different pairs\n"
                                            : "both measures merge the same pair\n");
            if (!demo_out.empty()) {
                const std::filesystem::path dir = demo_out;
                std::string csv = "previous,current\n";
                for (Eigen::Index i = 0; i < d.points.rows(); ++i)
                    csv += io::format_double(d.points(i, 0)) + ',' + io::format_double(d.points(i, 1)) + '\n';
                io::write_file_atomic(dir / "faithful_lagged.csv", csv);
                const auto meta = metadata("demo-faithful", demo_c, {{"data", demo_data}, {"k", 4}});
                io::write_file_atomic(dir / "faithful_k4.json", io::model_to_json(d.model, meta).dump(2) + "\n");
            }
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
