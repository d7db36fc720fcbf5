#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lcdur/extract.hpp"
#include "lcdur/types.hpp"

namespace lcdur {

/// Two-sided significance level used for every accept/reject decision.
inline constexpr double kAlpha = 0.05;

struct DescriptiveStats {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  std::optional<double> std_dev;  // sample (n-1) standard deviation; empty for n < 2
  double min = 0.0;
  double max = 0.0;
};

/// Throws EmptySample for an empty input. Even-length medians average the
/// two central order statistics.
DescriptiveStats describe(std::span<const double> values);

// ---------------------------------------------------------------------------
// Grouping

enum class DirectionFilter { Left, Right, Any };

std::string_view to_string(DirectionFilter d);

/// Speed bins are left-closed, right-open intervals between consecutive
/// edges. `bin` is empty for the "all speeds" group.
struct GroupKey {
  VehicleClass vehicle_class = VehicleClass::Car;
  DirectionFilter direction = DirectionFilter::Any;
  std::optional<std::size_t> bin;

  auto operator<=>(const GroupKey&) const = default;
};

struct BinEdges {
  std::vector<double> car{0, 20, 25, 30, 35, 45};
  std::vector<double> truck{0, 20, 25, 30, 35};

  const std::vector<double>& for_class(VehicleClass c) const {
    return c == VehicleClass::Car ? car : truck;
  }
};

/// Throws InvalidArgument unless each edge list has >= 2 strictly
/// increasing values.
void validate(const BinEdges& edges);

/// "[20,25)" style label of bin i.
std::string bin_label(const std::vector<double>& edges, std::size_t i);

std::optional<std::size_t> find_bin(const std::vector<double>& edges, double speed);

struct BinAssignment {
  /// Keys cover (class, left/right, bin) for every bin of the class's edges,
  /// including empty ones.
  std::map<GroupKey, std::vector<double>> durations;
  std::vector<std::string> warnings;  // one per excluded event
  std::size_t excluded = 0;
};

BinAssignment assign_bins(std::span<const LaneChangeEvent> events, const BinEdges& edges);

// ---------------------------------------------------------------------------
// Mann-Whitney U

enum class TestMode { Auto, Exact, Approx };
enum class TestMethod { Exact, NormalApprox };

std::string_view to_string(TestMode m);
std::string_view to_string(TestMethod m);
std::optional<TestMode> parse_test_mode(std::string_view s);

/// Exact mode refuses samples with C(n_a + n_b, n_a) above this count; the
/// null distribution is accumulated in doubles, which are exact below 2^53.
inline constexpr double kExactModeMaxAssignments = 9007199254740992.0;  // 2^53

/// Exact mode also refuses when the (subset size x rank sum) table would
/// exceed this many cells.
inline constexpr double kExactModeMaxCells = 2.0e8;

/// Auto mode uses the exact distribution when both samples are at most this
/// size.
inline constexpr std::size_t kAutoExactMaxSize = 8;

struct MwuResult {
  double u_statistic = 0.0;       // for sample A
  std::optional<double> z_value;  // normal approximation only
  double p_two_sided = 1.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  TestMethod method = TestMethod::Exact;
  bool tie_corrected = false;

  bool reject() const { return p_two_sided < kAlpha; }
};

/// "Reject H0" / "Accept H0".
std::string_view decision(const MwuResult& r);

/// Two-sided Mann-Whitney U test on mid-ranks. Exact mode builds the full
/// permutation distribution of the mid-rank sum (ties included) and reports
/// min(1, 2 min(P[U <= u], P[U >= u])). Approx mode uses the tie-corrected
/// normal approximation with a 0.5 continuity correction.
MwuResult mwu_test(std::span<const double> a, std::span<const double> b,
                   TestMode mode = TestMode::Auto);

/// Upper-triangular matrix of test results; entry [i][j] is set for i < j.
using MwuMatrix = std::vector<std::vector<std::optional<MwuResult>>>;
MwuMatrix pairwise_mwu_matrix(const std::vector<std::vector<double>>& groups,
                              TestMode mode = TestMode::Auto);

struct StageTest {
  VehicleClass vehicle_class = VehicleClass::Car;
  std::string hypothesis;  // e.g. "Left T1 vs Left T2"
  MwuResult result;
};

/// Per class: left T1 vs left T2, right T1 vs right T2, left T1 vs right T1,
/// left T2 vs right T2. Throws EmptySample if a class/direction is missing.
std::vector<StageTest> stage_tests(std::span<const LaneChangeEvent> events,
                                   TestMode mode = TestMode::Auto);

// ---------------------------------------------------------------------------
// Empirical CDF

struct CdfPoint {
  double value = 0.0;
  double cumulative_probability = 0.0;
};

/// One point per distinct value: the fraction of observations <= value.
std::vector<CdfPoint> empirical_cdf(std::span<const double> values);

}  // namespace lcdur
