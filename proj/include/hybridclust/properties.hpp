#pragma once

#include "hybridclust/dissim.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace hybridclust {

enum class PropertyKind { symmetry, equality, orthogonality, outlier, noise, mode };

/// Column order of the published property table.
inline constexpr std::array<PropertyKind, 6> kTable1Columns = {PropertyKind::equality, PropertyKind::orthogonality,
                                                               PropertyKind::symmetry, PropertyKind::outlier,
                                                               PropertyKind::noise,    PropertyKind::mode};

std::string to_string(PropertyKind p);
PropertyKind parse_property(const std::string& name);

enum class VerdictState { pass, fail, indeterminate };
std::string to_string(VerdictState s);

struct TracePoint {
    std::string sequence;
    double parameter = 0.0;
    double value = 0.0;
};

struct PropertyVerdict {
    Measure measure = Measure::klinf;
    PropertyKind property = PropertyKind::symmetry;
    VerdictState state = VerdictState::indeterminate;
    std::vector<TracePoint> limit_trace;
    double probe_inf = 0.0;
    double probe_sup = 0.0;
    std::string detail;

    bool pass() const noexcept { return state == VerdictState::pass; }
};

/// One printed scenario of weighted univariate Gaussians.
struct ScenarioB {
    struct Component {
        double mean;
        double sd;
        double weight;
        double variance() const noexcept { return sd * sd; }
    };
    char label;
    std::vector<Component> components;

    GaussianComponent gaussian(std::size_t i) const;
    /// The weighted pair made of components i and j.
    WeightedPair pair(std::size_t i, std::size_t j) const;
};

/// Scenarios a..f.
const std::vector<ScenarioB>& scenarios_b();

/// Fixed catalog: nine scenario pairs followed by eight seeded random pairs.
std::vector<WeightedPair> probe_catalog();

/// Smallest and largest value of a measure over the reference probes: the
/// catalog, the identical-pair probes and the equal-weight separated probes.
struct ProbeExtremes {
    double inf = 0.0;
    double sup = 0.0;
    double range() const noexcept { return sup - inf; }
};
ProbeExtremes probe_extremes(Measure m, const IntegrationContext& ctx);

/// Outcome of following a one-parameter sequence until its value settles
/// or runs away.
struct LimitEstimate {
    enum class Kind { converged, diverged_up, diverged_down, undecided };
    Kind kind = Kind::undecided;
    double limit = 0.0;
    std::vector<TracePoint> trace;
};

/// Evaluates `points`, then keeps extending the parameter with `next` (at
/// most `max_extra` times) until successive values differ by less than
/// `tol` or the increments stop shrinking.
template <class F, class Next>
LimitEstimate estimate_limit(const std::string& name, std::vector<double> points, Next next, F value_at, double tol,
                             int max_extra = 12);

PropertyVerdict check_property(Measure m, PropertyKind p, const IntegrationContext& ctx);
PropertyVerdict check_property(Measure m, PropertyKind p, const ProbeExtremes& extremes,
                               const IntegrationContext& ctx);

struct Table1 {
    std::vector<Measure> measures;
    /// verdicts[row][col] with columns in kTable1Columns order.
    std::vector<std::array<PropertyVerdict, 6>> verdicts;

    bool any_indeterminate() const;
};

/// Runs every property for the given measures (all seven by default).
Table1 table1(const IntegrationContext& ctx, const std::vector<Measure>& measures = {});

/// The published table as booleans, rows in kAllMeasures order.
std::array<std::array<bool, 6>, 7> expected_table1();

struct OrderingCheck {
    std::string label;
    std::string statement;
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// The stated inequality of every scenario, each required to hold with a
/// margin above 1e-6.
std::vector<OrderingCheck> scenario_orderings(const IntegrationContext& ctx);

/// Err (equal weights) and the Bhattacharyya distance between N(0,1) and
/// N(theta,1) for theta in {1,2,3,4}; both must be nondecreasing.
struct MonotoneCheck {
    std::vector<double> theta;
    std::vector<double> err;
    std::vector<double> bhat_distance;
    bool holds = false;
};
MonotoneCheck monotone_likelihood_ratio(const IntegrationContext& ctx);

}  // namespace hybridclust

#include "hybridclust/detail/limit_impl.hpp"
