#pragma once

#include "hybridclust/dissim.hpp"
#include "hybridclust/em.hpp"
#include "hybridclust/merge.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hybridclust {

enum class Family { student_t, cauchy, uniform, gamma, gauss_noise, gauss_laplace };
std::string to_string(Family f);
Family parse_family(const std::string& name);

enum class SampleSize { small, large };
std::string to_string(SampleSize s);
SampleSize parse_sample_size(const std::string& name);

struct ScenarioC {
    Family family = Family::student_t;
    int dim = 2;
    SampleSize size = SampleSize::small;

    void validate() const;
    /// Points drawn for each of the three clusters.
    std::array<int, 3> cluster_sizes() const;
    /// Uniform background points (gauss_noise only).
    int noise_count() const;
};

/// Points in cluster order followed by any noise points. Noise points carry
/// label -1 and a set mask entry.
struct LabeledSample {
    DataMatrix points;
    std::vector<int> true_labels;
    std::vector<bool> noise_mask;
};

LabeledSample generate(const ScenarioC& scn, std::uint64_t seed);

/// Fraction of non-noise points wrongly clustered under the best bijection
/// between final labels and true classes.
double misclassification_rate(const std::vector<int>& final_labels, const std::vector<int>& true_labels,
                              const std::vector<bool>& noise_mask);

/// Best achievable misclassification over every way of grouping the
/// subclusters into one cluster per true class.
double min_misclassification(const std::vector<int>& map_labels, const std::vector<int>& true_labels,
                             const std::vector<bool>& noise_mask);

/// Same quantity by enumerating every assignment; for testing, K <= 12.
double min_misclassification_exhaustive(const std::vector<int>& map_labels, const std::vector<int>& true_labels,
                                        const std::vector<bool>& noise_mask);

/// Final cluster (position in `state`) of every point, given the index of
/// the original component each point was assigned to.
std::vector<int> final_labels(const ClusterState& state, const std::vector<int>& map_labels);

struct ExperimentConfig {
    std::vector<Measure> measures{kAllMeasures.begin(), kAllMeasures.end()};
    std::vector<Criterion> criteria{Criterion::bic};
    int reps = 20;
    int clusters = 3;
    std::uint64_t base_seed = 0;
    int k_min = 1;
    int k_max = 25;
    EMConfig em;
    IntegrationContext integration;
};

struct RepResult {
    int rep = 0;
    Criterion criterion = Criterion::bic;
    Measure measure = Measure::klinf;
    int k_selected = 0;
    double misclass = 0.0;
    double min_misclass = 0.0;
    double excess = 0.0;
};

struct RepFailure {
    int rep = 0;
    std::string message;
};

struct RunSummary {
    Criterion criterion = Criterion::bic;
    Measure measure = Measure::klinf;
    int dim = 2;
    SampleSize size = SampleSize::small;
    int reps = 0;
    double mean_excess = 0.0;
    /// 1.96 * sd / sqrt(reps).
    double ci_half_width = 0.0;
    double mean_misclass = 0.0;
};

struct ExperimentResult {
    ScenarioC scenario;
    std::vector<RepResult> rows;
    std::vector<RepFailure> failures;
    std::vector<RunSummary> summary;
};

/// Rep r uses seed base_seed + r for both generation and fitting, so the
/// result does not depend on how reps are scheduled across threads.
ExperimentResult run_experiment(const ScenarioC& scn, const ExperimentConfig& cfg);

/// Mean excess and interval per (criterion, measure) from per-rep rows.
std::vector<RunSummary> summarize(const ScenarioC& scn, const ExperimentConfig& cfg,
                                  const std::vector<RepResult>& rows);

}  // namespace hybridclust
