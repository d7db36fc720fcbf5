#include "lcdur/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lcdur/error.hpp"
#include "text.hpp"

namespace lcdur {

namespace {

using text::format_fixed;
using text::format_shortest;

constexpr VehicleClass kClasses[] = {VehicleClass::Car, VehicleClass::Truck};
constexpr LaneChangeDirection kDirections[] = {LaneChangeDirection::Left, LaneChangeDirection::Right};

std::string d3(double v) { return format_fixed(v, 3); }

std::vector<double> select(std::span<const LaneChangeEvent> events, VehicleClass cls,
                           std::optional<LaneChangeDirection> dir,
                           double LaneChangeEvent::*field = &LaneChangeEvent::duration_s) {
  std::vector<double> out;
  for (const auto& e : events) {
    if (e.vehicle_class == cls && (!dir || e.direction == *dir)) out.push_back(e.*field);
  }
  return out;
}

std::vector<std::string> stats_cells(const std::vector<double>& v) {
  if (v.empty()) return {"0", "", "", "", "", ""};
  const auto s = describe(v);
  return {std::to_string(s.n), d3(s.mean), d3(s.median), s.std_dev ? d3(*s.std_dev) : "",
          d3(s.min), d3(s.max)};
}

const std::vector<std::string> kStatsColumns = {"n", "mean_s", "median_s", "std_s", "min_s", "max_s"};

std::optional<MwuResult> maybe_test(const std::vector<double>& a, const std::vector<double>& b,
                                    TestMode mode) {
  if (a.empty() || b.empty()) return std::nullopt;
  return mwu_test(a, b, mode);
}

// n_a, n_b, u, z, p, method, result
std::vector<std::string> test_cells(const std::optional<MwuResult>& r, std::size_t na, std::size_t nb) {
  if (!r) return {std::to_string(na), std::to_string(nb), "", "", "", "", "n/a"};
  return {std::to_string(r->n_a),
          std::to_string(r->n_b),
          format_shortest(r->u_statistic),
          r->z_value ? d3(*r->z_value) : "",
          d3(r->p_two_sided),
          std::string(to_string(r->method)),
          std::string(decision(*r))};
}

const std::vector<std::string> kTestColumns = {"n_a", "n_b", "u_statistic", "z_value",
                                               "p_value", "method", "result"};

template <typename... Parts>
std::vector<std::string> concat(Parts&&... parts) {
  std::vector<std::string> out;
  (out.insert(out.end(), parts.begin(), parts.end()), ...);
  return out;
}

std::string cls_name(VehicleClass c) { return std::string(to_string(c)); }
std::string dir_name(LaneChangeDirection d) { return std::string(to_string(d)); }

Table lane_pair_table(std::span<const LaneChangeEvent> events) {
  Table t{"table_I", "Lane-change samples by lane pair",
          {"vehicle_class", "direction", "origin_lane", "target_lane", "n", "direction_total"}, {}};
  for (auto cls : kClasses) {
    for (auto dir : kDirections) {
      std::map<std::pair<int, int>, std::size_t> counts;
      if (dir == LaneChangeDirection::Left) {
        counts[{1, 2}] = 0;
        counts[{2, 3}] = 0;
      } else {
        counts[{2, 1}] = 0;
        counts[{3, 2}] = 0;
      }
      std::size_t total = 0;
      for (const auto& e : events) {
        if (e.vehicle_class != cls || e.direction != dir) continue;
        ++counts[{e.origin_lane, e.target_lane}];
        ++total;
      }
      std::vector<std::pair<std::pair<int, int>, std::size_t>> rows(counts.begin(), counts.end());
      if (dir == LaneChangeDirection::Right) std::reverse(rows.begin(), rows.end());
      for (const auto& [lanes, n] : rows) {
        t.rows.push_back({cls_name(cls), dir_name(dir), std::to_string(lanes.first),
                          std::to_string(lanes.second), std::to_string(n), std::to_string(total)});
      }
    }
  }
  return t;
}

Table direction_stats_table(std::span<const LaneChangeEvent> events) {
  Table t{"table_II", "Duration statistics by vehicle class and direction",
          concat(std::vector<std::string>{"vehicle_class", "direction"}, kStatsColumns), {}};
  for (auto cls : kClasses) {
    for (auto dir : kDirections) {
      t.rows.push_back(concat(std::vector<std::string>{cls_name(cls), dir_name(dir)},
                              stats_cells(select(events, cls, dir))));
    }
  }
  return t;
}

Table direction_tests_table(std::span<const LaneChangeEvent> events, TestMode mode) {
  Table t{"table_III", "Mann-Whitney U tests between directions and vehicle classes",
          concat(std::vector<std::string>{"hypothesis", "group_a", "group_b"}, kTestColumns), {}};
  struct Spec {
    const char* label;
    VehicleClass ca;
    LaneChangeDirection da;
    VehicleClass cb;
    LaneChangeDirection db;
  };
  const Spec specs[] = {
      {"car left vs car right", VehicleClass::Car, LaneChangeDirection::Left, VehicleClass::Car,
       LaneChangeDirection::Right},
      {"truck left vs truck right", VehicleClass::Truck, LaneChangeDirection::Left,
       VehicleClass::Truck, LaneChangeDirection::Right},
      {"left: car vs truck", VehicleClass::Car, LaneChangeDirection::Left, VehicleClass::Truck,
       LaneChangeDirection::Left},
      {"right: car vs truck", VehicleClass::Car, LaneChangeDirection::Right, VehicleClass::Truck,
       LaneChangeDirection::Right},
  };
  for (const auto& s : specs) {
    const auto a = select(events, s.ca, s.da);
    const auto b = select(events, s.cb, s.db);
    t.rows.push_back(concat(
        std::vector<std::string>{s.label, cls_name(s.ca) + "_" + dir_name(s.da),
                                 cls_name(s.cb) + "_" + dir_name(s.db)},
        test_cells(maybe_test(a, b, mode), a.size(), b.size())));
  }
  return t;
}

// Counts per speed bin and a left-vs-right test inside each bin.
Table bin_count_table(const char* name, VehicleClass cls, const BinAssignment& bins,
                      const BinEdges& edges, TestMode mode) {
  Table t{name,
          cls_name(cls) + " samples per speed range with left-vs-right tests",
          concat(std::vector<std::string>{"speed_range", "n_left", "n_right", "n_total", "percentage"},
                 kTestColumns),
          {}};
  const auto& e = edges.for_class(cls);
  std::size_t grand = 0;
  for (std::size_t b = 0; b + 1 < e.size(); ++b) {
    grand += bins.durations.at({cls, DirectionFilter::Left, b}).size() +
             bins.durations.at({cls, DirectionFilter::Right, b}).size();
  }
  std::size_t total_left = 0, total_right = 0;
  for (std::size_t b = 0; b + 1 < e.size(); ++b) {
    const auto& l = bins.durations.at({cls, DirectionFilter::Left, b});
    const auto& r = bins.durations.at({cls, DirectionFilter::Right, b});
    total_left += l.size();
    total_right += r.size();
    const auto n = l.size() + r.size();
    const std::string pct =
        grand == 0 ? "" : format_fixed(100.0 * static_cast<double>(n) / static_cast<double>(grand), 2);
    t.rows.push_back(concat(std::vector<std::string>{bin_label(e, b), std::to_string(l.size()),
                                                     std::to_string(r.size()), std::to_string(n), pct},
                            test_cells(maybe_test(l, r, mode), l.size(), r.size())));
  }
  t.rows.push_back({"total", std::to_string(total_left), std::to_string(total_right),
                    std::to_string(grand), grand == 0 ? "" : "100.00", "", "", "", "", "", "", ""});
  return t;
}

std::vector<double> merged(const BinAssignment& bins, VehicleClass cls, std::size_t b) {
  auto out = bins.durations.at({cls, DirectionFilter::Left, b});
  const auto& r = bins.durations.at({cls, DirectionFilter::Right, b});
  out.insert(out.end(), r.begin(), r.end());
  return out;
}

Table bin_stats_table(const BinAssignment& bins, const BinEdges& edges) {
  Table t{"table_VI", "Duration statistics per speed range",
          concat(std::vector<std::string>{"vehicle_class", "direction", "speed_range"}, kStatsColumns),
          {}};
  for (auto dir : {DirectionFilter::Left, DirectionFilter::Right}) {
    for (std::size_t b = 0; b + 1 < edges.car.size(); ++b) {
      t.rows.push_back(concat(
          std::vector<std::string>{"car", std::string(to_string(dir)), bin_label(edges.car, b)},
          stats_cells(bins.durations.at({VehicleClass::Car, dir, b}))));
    }
  }
  for (std::size_t b = 0; b + 1 < edges.truck.size(); ++b) {
    t.rows.push_back(concat(std::vector<std::string>{"truck", "any", bin_label(edges.truck, b)},
                            stats_cells(merged(bins, VehicleClass::Truck, b))));
  }
  return t;
}

void matrix_rows(Table& t, const std::string& direction, const std::vector<double>& edges,
                 const std::vector<std::vector<double>>& groups, TestMode mode) {
  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      t.rows.push_back(concat(std::vector<std::string>{direction, bin_label(edges, i), bin_label(edges, j)},
                              test_cells(maybe_test(groups[i], groups[j], mode), groups[i].size(),
                                         groups[j].size())));
    }
  }
}

Table car_matrix_table(const BinAssignment& bins, const BinEdges& edges, TestMode mode) {
  Table t{"table_VII", "Car duration tests between speed ranges (upper triangle, per direction)",
          concat(std::vector<std::string>{"direction", "speed_range_a", "speed_range_b"}, kTestColumns),
          {}};
  for (auto dir : {DirectionFilter::Left, DirectionFilter::Right}) {
    std::vector<std::vector<double>> groups;
    for (std::size_t b = 0; b + 1 < edges.car.size(); ++b) {
      groups.push_back(bins.durations.at({VehicleClass::Car, dir, b}));
    }
    matrix_rows(t, std::string(to_string(dir)), edges.car, groups, mode);
  }
  return t;
}

Table truck_matrix_table(const BinAssignment& bins, const BinEdges& edges, TestMode mode) {
  Table t{"table_VIII", "Truck duration tests between speed ranges (upper triangle, both directions)",
          concat(std::vector<std::string>{"direction", "speed_range_a", "speed_range_b"}, kTestColumns),
          {}};
  std::vector<std::vector<double>> groups;
  for (std::size_t b = 0; b + 1 < edges.truck.size(); ++b) groups.push_back(merged(bins, VehicleClass::Truck, b));
  matrix_rows(t, "any", edges.truck, groups, mode);
  return t;
}

Table stage_stats_table(std::span<const LaneChangeEvent> events) {
  Table t{"table_IX", "Stage durations T1 (start to line crossing) and T2 (crossing to end)",
          concat(std::vector<std::string>{"vehicle_class", "direction", "stage"}, kStatsColumns), {}};
  for (auto cls : kClasses) {
    for (auto dir : kDirections) {
      t.rows.push_back(concat(std::vector<std::string>{cls_name(cls), dir_name(dir), "T1"},
                              stats_cells(select(events, cls, dir, &LaneChangeEvent::t1_s))));
      t.rows.push_back(concat(std::vector<std::string>{cls_name(cls), dir_name(dir), "T2"},
                              stats_cells(select(events, cls, dir, &LaneChangeEvent::t2_s))));
    }
  }
  return t;
}

Table stage_tests_table(std::span<const LaneChangeEvent> events, TestMode mode) {
  Table t{"table_X", "Mann-Whitney U tests of stage durations",
          concat(std::vector<std::string>{"vehicle_class", "hypothesis"}, kTestColumns), {}};
  for (auto cls : kClasses) {
    const auto lt1 = select(events, cls, LaneChangeDirection::Left, &LaneChangeEvent::t1_s);
    const auto lt2 = select(events, cls, LaneChangeDirection::Left, &LaneChangeEvent::t2_s);
    const auto rt1 = select(events, cls, LaneChangeDirection::Right, &LaneChangeEvent::t1_s);
    const auto rt2 = select(events, cls, LaneChangeDirection::Right, &LaneChangeEvent::t2_s);
    const std::pair<const char*, std::pair<const std::vector<double>*, const std::vector<double>*>> specs[] = {
        {"Left T1 vs Left T2", {&lt1, &lt2}},
        {"Right T1 vs Right T2", {&rt1, &rt2}},
        {"Left T1 vs Right T1", {&lt1, &rt1}},
        {"Left T2 vs Right T2", {&lt2, &rt2}},
    };
    for (const auto& [label, samples] : specs) {
      const auto& [a, b] = samples;
      t.rows.push_back(concat(std::vector<std::string>{cls_name(cls), label},
                              test_cells(maybe_test(*a, *b, mode), a->size(), b->size())));
    }
  }
  return t;
}

void write_or_throw(const std::filesystem::path& p, const std::string& s) { write_text_file(p, s); }

nlohmann::ordered_json stats_json(const std::vector<double>& v) {
  nlohmann::ordered_json j;
  j["n"] = v.size();
  if (v.empty()) return j;
  const auto s = describe(v);
  j["mean_s"] = s.mean;
  j["median_s"] = s.median;
  j["std_s"] = s.std_dev ? nlohmann::ordered_json(*s.std_dev) : nlohmann::ordered_json(nullptr);
  j["min_s"] = s.min;
  j["max_s"] = s.max;
  return j;
}

nlohmann::ordered_json table_rows_json(const Table& t) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json j;
    for (std::size_t c = 0; c < t.columns.size(); ++c) j[t.columns[c]] = row[c];
    arr.push_back(std::move(j));
  }
  return arr;
}

// Bin labels such as "[20,25)" contain commas.
std::string csv_cell(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string Table::csv() const {
  std::ostringstream os;
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << csv_cell(columns[c]);
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_cell(row[c]);
    os << '\n';
  }
  return os.str();
}

std::string Table::markdown() const {
  std::ostringstream os;
  os << "### " << title << "\n\n|";
  for (const auto& c : columns) os << ' ' << c << " |";
  os << "\n|";
  for (std::size_t c = 0; c < columns.size(); ++c) os << " --- |";
  os << '\n';
  for (const auto& row : rows) {
    os << '|';
    for (const auto& cell : row) os << ' ' << (cell.empty() ? "-" : cell) << " |";
    os << '\n';
  }
  return os.str();
}

std::string CdfFile::csv() const {
  std::ostringstream os;
  os << "duration_s,cumulative_probability\n";
  for (const auto& p : points) {
    os << d3(p.value) << ',' << format_shortest(p.cumulative_probability) << '\n';
  }
  return os.str();
}

const Table& Analysis::table(std::string_view name) const {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  throw Error(ErrorCode::InvalidArgument, "no table named " + std::string(name));
}

Analysis analyze(std::span<const LaneChangeEvent> events, const AnalysisConfig& config) {
  if (events.empty()) throw Error(ErrorCode::MissingData, "analyze: no events");
  validate(config.bins);
  const auto bins = assign_bins(events, config.bins);
  Analysis a;
  a.warnings = bins.warnings;
  a.excluded_from_bins = bins.excluded;
  a.tables.push_back(lane_pair_table(events));
  a.tables.push_back(direction_stats_table(events));
  a.tables.push_back(direction_tests_table(events, config.test_mode));
  a.tables.push_back(bin_count_table("table_IV", VehicleClass::Truck, bins, config.bins, config.test_mode));
  a.tables.push_back(bin_count_table("table_V", VehicleClass::Car, bins, config.bins, config.test_mode));
  a.tables.push_back(bin_stats_table(bins, config.bins));
  a.tables.push_back(car_matrix_table(bins, config.bins, config.test_mode));
  a.tables.push_back(truck_matrix_table(bins, config.bins, config.test_mode));
  a.tables.push_back(stage_stats_table(events));
  a.tables.push_back(stage_tests_table(events, config.test_mode));
  for (auto cls : kClasses) {
    for (auto dir : kDirections) {
      const auto v = select(events, cls, dir);
      if (v.empty()) continue;
      a.cdfs.push_back({"cdf_" + cls_name(cls) + "_" + dir_name(dir), empirical_cdf(v)});
    }
  }
  return a;
}

void write_analysis(const Analysis& analysis, const std::filesystem::path& dir) {
  for (const auto& t : analysis.tables) {
    write_or_throw(dir / (t.name + ".csv"), t.csv());
    write_or_throw(dir / (t.name + ".md"), t.markdown());
  }
  for (const auto& c : analysis.cdfs) write_or_throw(dir / (c.name + ".csv"), c.csv());
}

Report build_report(std::span<const LaneChangeEvent> events, const AnalysisConfig& config) {
  Report r;
  r.analysis = analyze(events, config);
  for (auto cls : kClasses) {
    for (auto dir : kDirections) {
      const auto d = select(events, cls, dir);
      try {
        r.models.push_back(fit_lognormal(d, cls, dir));
      } catch (const Error& e) {
        r.model_errors.push_back(cls_name(cls) + "/" + dir_name(dir) + ": " +
                                 std::string(error_code_name(e.code())) + ": " + e.what());
      }
    }
  }

  nlohmann::ordered_json s;
  s["event_count"] = events.size();
  bool stages_consistent = true;
  for (const auto& e : events) {
    // Frame arithmetic, and the printed millisecond values, must agree.
    const bool frames_ok = e.start_frame < e.cross_frame && e.cross_frame <= e.end_frame;
    const bool ms_ok = std::llround(e.t1_s * 1000.0) + std::llround(e.t2_s * 1000.0) ==
                       std::llround(e.duration_s * 1000.0);
    stages_consistent = stages_consistent && frames_ok && ms_ok;
  }
  s["t1_plus_t2_equals_duration"] = stages_consistent;
  nlohmann::ordered_json counts;
  for (auto cls : kClasses) {
    for (auto dir : kDirections) counts[cls_name(cls) + "_" + dir_name(dir)] = select(events, cls, dir).size();
  }
  s["counts"] = counts;
  s["excluded_from_speed_bins"] = r.analysis.excluded_from_bins;
  auto groups = nlohmann::ordered_json::array();
  for (auto cls : kClasses) {
    for (auto dir : kDirections) {
      nlohmann::ordered_json g;
      g["vehicle_class"] = cls_name(cls);
      g["direction"] = dir_name(dir);
      g["duration"] = stats_json(select(events, cls, dir));
      g["t1"] = stats_json(select(events, cls, dir, &LaneChangeEvent::t1_s));
      g["t2"] = stats_json(select(events, cls, dir, &LaneChangeEvent::t2_s));
      groups.push_back(std::move(g));
    }
  }
  s["groups"] = groups;
  nlohmann::ordered_json tests;
  for (const auto* name : {"table_III", "table_IV", "table_V", "table_VII", "table_VIII", "table_X"}) {
    tests[name] = table_rows_json(r.analysis.table(name));
  }
  s["tests"] = tests;
  s["models"] = nlohmann::ordered_json::parse(models_json(r.models));
  s["model_errors"] = r.model_errors;
  s["warnings"] = r.analysis.warnings;
  r.summary_json = s.dump(2) + "\n";
  return r;
}

void write_report(const Report& report, const std::filesystem::path& dir) {
  write_analysis(report.analysis, dir);
  write_text_file(dir / "models.json", models_json(report.models));
  write_text_file(dir / "summary.json", report.summary_json);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
  os << content;
  if (!os) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace lcdur
