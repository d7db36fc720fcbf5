#include "lcdur/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lcdur/error.hpp"
#include "text.hpp"

namespace lcdur {

DescriptiveStats describe(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptySample, "describe: empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  DescriptiveStats s;
  s.n = n;
  s.min = v.front();
  s.max = v.back();
  s.median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  // Two-pass mean/variance.
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(n);
  if (n >= 2) {
    double ss = 0.0, comp = 0.0;
    for (double x : v) {
      ss += (x - s.mean) * (x - s.mean);
      comp += x - s.mean;
    }
    const double var = (ss - comp * comp / static_cast<double>(n)) / static_cast<double>(n - 1);
    s.std_dev = std::sqrt(std::max(0.0, var));
  }
  // Guard the invariant against last-bit rounding of the mean.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

std::string_view to_string(DirectionFilter d) {
  switch (d) {
    case DirectionFilter::Left: return "left";
    case DirectionFilter::Right: return "right";
    case DirectionFilter::Any: return "any";
  }
  return "any";
}

void validate(const BinEdges& edges) {
  for (const auto* e : {&edges.car, &edges.truck}) {
    if (e->size() < 2) throw Error(ErrorCode::InvalidArgument, "bin edges need at least two values");
    for (std::size_t i = 1; i < e->size(); ++i) {
      if (!((*e)[i] > (*e)[i - 1])) {
        throw Error(ErrorCode::InvalidArgument, "bin edges must be strictly increasing");
      }
    }
  }
}

std::string bin_label(const std::vector<double>& edges, std::size_t i) {
  return "[" + text::format_shortest(edges.at(i)) + "," + text::format_shortest(edges.at(i + 1)) + ")";
}

std::optional<std::size_t> find_bin(const std::vector<double>& edges, double speed) {
  if (edges.size() < 2 || speed < edges.front() || !(speed < edges.back())) return std::nullopt;
  const auto it = std::upper_bound(edges.begin(), edges.end(), speed);
  return static_cast<std::size_t>(it - edges.begin()) - 1;
}

BinAssignment assign_bins(std::span<const LaneChangeEvent> events, const BinEdges& edges) {
  validate(edges);
  BinAssignment out;
  for (auto cls : {VehicleClass::Car, VehicleClass::Truck}) {
    const auto& e = edges.for_class(cls);
    for (auto dir : {DirectionFilter::Left, DirectionFilter::Right}) {
      for (std::size_t b = 0; b + 1 < e.size(); ++b) out.durations[{cls, dir, b}];
    }
  }
  for (const auto& ev : events) {
    const auto& e = edges.for_class(ev.vehicle_class);
    const auto bin = find_bin(e, ev.nav_speed_mps);
    if (!bin) {
      ++out.excluded;
      out.warnings.push_back("recording " + std::to_string(ev.recording_id) + " track " +
                             std::to_string(ev.track_id) + ": " +
                             std::string(to_string(ev.vehicle_class)) + " navigation speed " +
                             text::format_fixed(ev.nav_speed_mps, 3) + " m/s outside [" +
                             text::format_shortest(e.front()) + "," +
                             text::format_shortest(e.back()) + ")");
      continue;
    }
    const auto dir = ev.direction == LaneChangeDirection::Left ? DirectionFilter::Left
                                                                : DirectionFilter::Right;
    out.durations[{ev.vehicle_class, dir, *bin}].push_back(ev.duration_s);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(TestMode m) {
  switch (m) {
    case TestMode::Auto: return "auto";
    case TestMode::Exact: return "exact";
    case TestMode::Approx: return "approx";
  }
  return "auto";
}

std::string_view to_string(TestMethod m) {
  return m == TestMethod::Exact ? "exact" : "normal_approx";
}

std::optional<TestMode> parse_test_mode(std::string_view s) {
  if (s == "auto") return TestMode::Auto;
  if (s == "exact") return TestMode::Exact;
  if (s == "approx") return TestMode::Approx;
  return std::nullopt;
}

std::string_view decision(const MwuResult& r) {
  return r.reject() ? "Reject H0" : "Accept H0";
}

namespace {

struct Ranked {
  std::vector<std::int64_t> doubled_ranks;  // 2 x mid-rank, per pooled item
  std::int64_t doubled_rank_sum_a = 0;
  double tie_term = 0.0;                    // sum over tie groups of t^3 - t
};

// Pooled mid-ranks; items [0, n_a) belong to sample A.
Ranked rank_pooled(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size() + b.size();
  std::vector<std::pair<double, std::size_t>> pooled;
  pooled.reserve(n);
  for (std::size_t i = 0; i < a.size(); ++i) pooled.emplace_back(a[i], i);
  for (std::size_t i = 0; i < b.size(); ++i) pooled.emplace_back(b[i], a.size() + i);
  std::sort(pooled.begin(), pooled.end());
  Ranked r;
  r.doubled_ranks.assign(n, 0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[j + 1].first == pooled[i].first) ++j;
    // Positions i..j (0-based) share the mid-rank ((i+1)+(j+1))/2.
    const auto doubled = static_cast<std::int64_t>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) r.doubled_ranks[pooled[k].second] = doubled;
    const double t = static_cast<double>(j - i + 1);
    r.tie_term += t * t * t - t;
    i = j + 1;
  }
  for (std::size_t k = 0; k < a.size(); ++k) r.doubled_rank_sum_a += r.doubled_ranks[k];
  return r;
}

double binomial(std::size_t n, std::size_t k) {
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(c);
}

// Tail probabilities of the doubled rank sum of a random size-n_a subset.
std::pair<double, double> exact_tails(const std::vector<std::int64_t>& doubled_ranks,
                                      std::size_t n_a, std::int64_t observed) {
  const auto total_sum = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), std::int64_t{0});
  const auto width = static_cast<std::size_t>(total_sum) + 1;
  // ways[k * width + s]: subsets of size k with doubled sum s.
  std::vector<double> ways((n_a + 1) * width, 0.0);
  ways[0] = 1.0;
  std::size_t seen = 0;
  for (const auto r : doubled_ranks) {
    ++seen;
    const auto step = static_cast<std::size_t>(r);
    for (std::size_t k = std::min(seen, n_a); k >= 1; --k) {
      double* dst = &ways[k * width];
      const double* src = &ways[(k - 1) * width];
      for (std::size_t s = width; s-- > step;) dst[s] += src[s - step];
    }
  }
  const double* dist = &ways[n_a * width];
  double le = 0.0, ge = 0.0, total = 0.0;
  for (std::size_t s = 0; s < width; ++s) {
    total += dist[s];
    if (static_cast<std::int64_t>(s) <= observed) le += dist[s];
    if (static_cast<std::int64_t>(s) >= observed) ge += dist[s];
  }
  return {le / total, ge / total};
}

void check_sample(std::span<const double> x, const char* name) {
  if (x.empty()) throw Error(ErrorCode::EmptySample, std::string("mwu_test: sample ") + name + " is empty");
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, std::string("mwu_test: non-finite value in sample ") + name);
    }
  }
}

}  // namespace

MwuResult mwu_test(std::span<const double> a, std::span<const double> b, TestMode mode) {
  check_sample(a, "A");
  check_sample(b, "B");
  MwuResult res;
  res.n_a = a.size();
  res.n_b = b.size();
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  const auto ranked = rank_pooled(a, b);
  res.u_statistic = 0.5 * static_cast<double>(ranked.doubled_rank_sum_a) - na * (na + 1.0) / 2.0;
  res.tie_corrected = ranked.tie_term > 0.0;

  const bool exact = mode == TestMode::Exact ||
                     (mode == TestMode::Auto && a.size() <= kAutoExactMaxSize &&
                      b.size() <= kAutoExactMaxSize);
  if (exact) {
    const double assignments = binomial(a.size() + b.size(), a.size());
    if (assignments > kExactModeMaxAssignments) {
      throw Error(ErrorCode::ExactModeTooLarge,
                  "mwu_test: exact mode needs C(" + std::to_string(a.size() + b.size()) + "," +
                      std::to_string(a.size()) + ") assignments, above the 2^53 cap");
    }
    // Enumerate subsets of the smaller side; the other sum is the complement.
    const bool swap = b.size() < a.size();
    const std::size_t k = swap ? b.size() : a.size();
    const auto total = static_cast<std::int64_t>(a.size() + b.size()) *
                       static_cast<std::int64_t>(a.size() + b.size() + 1);
    if (static_cast<double>(k + 1) * static_cast<double>(total + 1) > kExactModeMaxCells) {
      throw Error(ErrorCode::ExactModeTooLarge,
                  "mwu_test: exact mode table for n_a=" + std::to_string(a.size()) +
                      ", n_b=" + std::to_string(b.size()) + " exceeds the size cap");
    }
    std::vector<std::int64_t> ordered;
    ordered.reserve(ranked.doubled_ranks.size());
    ordered.insert(ordered.end(), ranked.doubled_ranks.begin() + static_cast<std::ptrdiff_t>(swap ? a.size() : 0),
                   ranked.doubled_ranks.end());
    ordered.insert(ordered.end(), ranked.doubled_ranks.begin(),
                   ranked.doubled_ranks.begin() + static_cast<std::ptrdiff_t>(swap ? a.size() : 0));
    const auto observed = swap ? total - ranked.doubled_rank_sum_a : ranked.doubled_rank_sum_a;
    auto [le, ge] = exact_tails(ordered, k, observed);
    if (swap) std::swap(le, ge);
    res.method = TestMethod::Exact;
    res.p_two_sided = std::min(1.0, 2.0 * std::min(le, ge));
    return res;
  }

  res.method = TestMethod::NormalApprox;
  const double n = na + nb;
  const double mean = na * nb / 2.0;
  const double var = na * nb / 12.0 * ((n + 1.0) - ranked.tie_term / (n * (n - 1.0)));
  const double diff = res.u_statistic - mean;
  const double corrected = std::max(0.0, std::abs(diff) - 0.5);
  if (!(var > 0.0) || corrected == 0.0) {
    res.z_value = 0.0;
    res.p_two_sided = 1.0;
    return res;
  }
  const double z = corrected / std::sqrt(var);
  res.z_value = diff < 0.0 ? -z : z;
  res.p_two_sided = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return res;
}

MwuMatrix pairwise_mwu_matrix(const std::vector<std::vector<double>>& groups, TestMode mode) {
  if (groups.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "pairwise_mwu_matrix: need at least two groups");
  }
  MwuMatrix m(groups.size(), std::vector<std::optional<MwuResult>>(groups.size()));
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) m[i][j] = mwu_test(groups[i], groups[j], mode);
  }
  return m;
}

std::vector<StageTest> stage_tests(std::span<const LaneChangeEvent> events, TestMode mode) {
  std::vector<StageTest> out;
  for (auto cls : {VehicleClass::Car, VehicleClass::Truck}) {
    std::vector<double> lt1, lt2, rt1, rt2;
    for (const auto& e : events) {
      if (e.vehicle_class != cls) continue;
      auto& t1 = e.direction == LaneChangeDirection::Left ? lt1 : rt1;
      auto& t2 = e.direction == LaneChangeDirection::Left ? lt2 : rt2;
      t1.push_back(e.t1_s);
      t2.push_back(e.t2_s);
    }
    const std::string prefix = std::string(to_string(cls)) + " ";
    auto run = [&](const char* hyp, const std::vector<double>& x, const std::vector<double>& y) {
      if (x.empty() || y.empty()) {
        throw Error(ErrorCode::EmptySample, "stage_tests: no " + prefix + "events for '" + hyp + "'");
      }
      out.push_back({cls, hyp, mwu_test(x, y, mode)});
    };
    run("Left T1 vs Left T2", lt1, lt2);
    run("Right T1 vs Right T2", rt1, rt2);
    run("Left T1 vs Right T1", lt1, rt1);
    run("Left T2 vs Right T2", lt2, rt2);
  }
  return out;
}

std::vector<CdfPoint> empirical_cdf(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptySample, "empirical_cdf: empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  std::vector<CdfPoint> out;
  const auto n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    out.push_back({v[i], static_cast<double>(i + 1) / n});
  }
  out.back().cumulative_probability = 1.0;
  return out;
}

}  // namespace lcdur
