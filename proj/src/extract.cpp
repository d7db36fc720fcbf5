#include "lcdur/extract.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "lcdur/error.hpp"
#include "text.hpp"

namespace lcdur {

namespace {

// Why a one-sided search stopped without finding a boundary.
enum class SearchStop { Found, Boundary, Window, Neighbor };

struct SearchResult {
  SearchStop stop = SearchStop::Found;
  std::size_t index = 0;
};

// Moving averages of the leftward lateral velocity over h+1 frames. The
// trailing window ends at k, the leading window starts at k; each is the
// centered average shifted by h frames so that a window never reaches past
// the frame being tested. Sums are taken directly so that an all-zero window
// averages to exactly zero.
struct SmoothedVelocity {
  std::vector<double> trailing;  // valid for k >= h
  std::vector<double> leading;   // valid for k + h <= n - 1
  std::size_t h = 0;
  std::size_t n = 0;

  SmoothedVelocity(const std::vector<double>& v, std::size_t half_window)
      : trailing(v.size(), 0.0), leading(v.size(), 0.0), h(half_window), n(v.size()) {
    const double width = static_cast<double>(h + 1);
    for (std::size_t k = 0; k < n; ++k) {
      if (k >= h) {
        double s = 0.0;
        for (std::size_t j = k - h; j <= k; ++j) s += v[j];
        trailing[k] = s / width;
      }
      if (k + h < n) {
        double s = 0.0;
        for (std::size_t j = k; j <= k + h; ++j) s += v[j];
        leading[k] = s / width;
      }
    }
  }
  bool trailing_valid(std::ptrdiff_t k) const { return k >= static_cast<std::ptrdiff_t>(h) && k < static_cast<std::ptrdiff_t>(n); }
  bool leading_valid(std::ptrdiff_t k) const { return k >= 0 && k + static_cast<std::ptrdiff_t>(h) < static_cast<std::ptrdiff_t>(n); }
};

struct Limits {
  std::ptrdiff_t window = 0;       // frames
  std::ptrdiff_t settle = 1;       // frames
  std::optional<std::ptrdiff_t> prev_crossing;
  std::optional<std::ptrdiff_t> next_crossing;
};

// Backward from the crossing: first quiescent frame, then down the speed
// slope to the frame where lateral motion toward the target begins.
SearchResult find_start(const SmoothedVelocity& sv, double sign, double threshold,
                        std::ptrdiff_t c, const Limits& lim) {
  // The window bounds the threshold search only; the slope walk may pass it.
  auto blocked = [&](std::ptrdiff_t k, bool windowed = true) -> std::optional<SearchStop> {
    if (!sv.trailing_valid(k)) return SearchStop::Boundary;
    if (lim.prev_crossing && k < *lim.prev_crossing) return SearchStop::Neighbor;
    if (windowed && k < c - lim.window) return SearchStop::Window;
    return std::nullopt;
  };
  auto speed = [&](std::ptrdiff_t k) { return sign * sv.trailing[static_cast<std::size_t>(k)]; };

  std::ptrdiff_t k = c - 1;
  while (true) {
    if (auto stop = blocked(k)) return {*stop, 0};
    if (speed(k) < threshold) break;
    --k;
  }
  while (true) {
    const auto next = k - 1;
    if (auto stop = blocked(next, false)) {
      // Only a problem if the slope would have continued.
      if (*stop == SearchStop::Boundary) return {SearchStop::Boundary, 0};
      if (speed(next) < speed(k)) return {*stop, 0};
      break;
    }
    if (!(speed(next) < speed(k))) break;
    k = next;
  }
  return {SearchStop::Found, static_cast<std::size_t>(k)};
}

// Forward from the crossing: first frame below threshold that stays below for
// the settle window, then down the slope to where lateral motion ends.
SearchResult find_end(const SmoothedVelocity& sv, double sign, double threshold,
                      std::ptrdiff_t c, const Limits& lim) {
  auto blocked = [&](std::ptrdiff_t k, bool windowed = true) -> std::optional<SearchStop> {
    if (!sv.leading_valid(k)) return SearchStop::Boundary;
    if (lim.next_crossing && k >= *lim.next_crossing) return SearchStop::Neighbor;
    if (windowed && k > c + lim.window) return SearchStop::Window;
    return std::nullopt;
  };
  auto speed = [&](std::ptrdiff_t k) { return sign * sv.leading[static_cast<std::size_t>(k)]; };

  std::ptrdiff_t k = c;
  while (true) {
    if (auto stop = blocked(k)) return {*stop, 0};
    if (speed(k) < threshold) {
      bool settled = true;
      for (std::ptrdiff_t j = 1; j < lim.settle; ++j) {
        if (!sv.leading_valid(k + j)) return {SearchStop::Boundary, 0};
        if (!(speed(k + j) < threshold)) {
          settled = false;
          break;
        }
      }
      if (settled) break;
    }
    ++k;
  }
  while (true) {
    const auto next = k + 1;
    if (auto stop = blocked(next, false)) {
      if (*stop == SearchStop::Boundary) return {SearchStop::Boundary, 0};
      if (speed(next) < speed(k)) return {*stop, 0};
      break;
    }
    if (!(speed(next) < speed(k))) break;
    k = next;
  }
  return {SearchStop::Found, static_cast<std::size_t>(k)};
}

RejectionReason reason_for(SearchStop stop) {
  switch (stop) {
    case SearchStop::Boundary: return RejectionReason::BoundaryCensored;
    case SearchStop::Window: return RejectionReason::SearchWindowExhausted;
    case SearchStop::Neighbor: return RejectionReason::OverlapsAdjacentCrossing;
    case SearchStop::Found: break;
  }
  return RejectionReason::SearchWindowExhausted;
}

std::ptrdiff_t seconds_to_frames(double seconds, double rate) {
  return static_cast<std::ptrdiff_t>(std::ceil(seconds * rate - 1e-9));
}

}  // namespace

std::string_view to_string(RejectionReason r) {
  switch (r) {
    case RejectionReason::BoundaryCensored: return "boundary_censored";
    case RejectionReason::SearchWindowExhausted: return "search_window_exhausted";
    case RejectionReason::OverlapsAdjacentCrossing: return "overlaps_adjacent_crossing";
    case RejectionReason::NonAdjacentLanes: return "non_adjacent_lanes";
    case RejectionReason::UnknownLane: return "unknown_lane";
    case RejectionReason::DegenerateStage: return "degenerate_stage";
  }
  return "unknown";
}

void validate(const ExtractionConfig& config) {
  if (!(config.lateral_velocity_threshold > 0.0) || config.smoothing_half_window < 1 ||
      !(config.max_search_window > 0.0) || !(config.settle_window > 0.0) ||
      !(config.lane_debounce >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "extraction thresholds, smoothing half-window and windows must be positive");
  }
}

std::vector<Crossing> detect_crossings(const Trajectory& trajectory, std::int64_t debounce_frames) {
  std::vector<Crossing> raw;
  const auto& pts = trajectory.points;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].lane_id == pts[i - 1].lane_id) continue;
    Crossing c;
    c.index = i;
    c.cross_frame = pts[i].frame;
    c.origin_lane_id = pts[i - 1].lane_id;
    c.target_lane_id = pts[i].lane_id;
    raw.push_back(c);
  }

  // Lane-id flicker around one marking: back-and-forth transitions closer
  // than the debounce window collapse into their net effect, placed at the
  // first transition.
  std::vector<Crossing> out;
  std::size_t i = 0;
  while (i < raw.size()) {
    std::size_t j = i;
    while (j + 1 < raw.size() && raw[j + 1].cross_frame - raw[j].cross_frame < debounce_frames &&
           raw[j + 1].origin_lane_id == raw[j].target_lane_id &&
           raw[j + 1].target_lane_id == raw[j].origin_lane_id) {
      ++j;
    }
    const bool net_change = (j - i) % 2 == 0;
    if (net_change) {
      Crossing c = raw[i];
      c.censored = c.index == 1 || raw[j].index + 1 == pts.size();
      out.push_back(c);
    }
    i = j + 1;
  }
  return out;
}

ExtractionResult extract_trajectory(const Recording& recording, const Trajectory& trajectory,
                                    const ExtractionConfig& config) {
  validate(config);
  ExtractionResult result;
  const double rate = recording.meta.frame_rate;
  const auto crossings = detect_crossings(trajectory, seconds_to_frames(config.lane_debounce, rate));
  if (crossings.empty()) return result;

  const auto& pts = trajectory.points;
  const double dt = recording.meta.frame_dt();
  std::vector<double> left_velocity(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    left_velocity[k] = leftward(trajectory.driving_direction, pts[k].y_velocity);
  }
  const SmoothedVelocity sv(left_velocity, static_cast<std::size_t>(config.smoothing_half_window));

  const std::size_t m = crossings.size();
  std::vector<std::optional<RejectionReason>> reason(m);
  std::vector<bool> overlap(m, false);
  std::vector<LaneChangeEvent> candidate(m);

  for (std::size_t i = 0; i < m; ++i) {
    const auto& cr = crossings[i];
    const auto* origin = recording.lane(cr.origin_lane_id);
    const auto* target = recording.lane(cr.target_lane_id);
    if (origin == nullptr || target == nullptr) {
      reason[i] = RejectionReason::UnknownLane;
      continue;
    }
    if (std::abs(origin->rank - target->rank) != 1) {
      reason[i] = RejectionReason::NonAdjacentLanes;
      continue;
    }
    if (cr.censored) {
      reason[i] = RejectionReason::BoundaryCensored;
      continue;
    }
    const bool left = target->rank > origin->rank;
    const double sign = left ? 1.0 : -1.0;
    Limits lim;
    lim.window = seconds_to_frames(config.max_search_window, rate);
    lim.settle = std::max<std::ptrdiff_t>(1, seconds_to_frames(config.settle_window, rate));
    if (i > 0) lim.prev_crossing = static_cast<std::ptrdiff_t>(crossings[i - 1].index);
    if (i + 1 < m) lim.next_crossing = static_cast<std::ptrdiff_t>(crossings[i + 1].index);
    const auto c = static_cast<std::ptrdiff_t>(cr.index);

    const auto start = find_start(sv, sign, config.lateral_velocity_threshold, c, lim);
    if (start.stop != SearchStop::Found) {
      reason[i] = reason_for(start.stop);
      if (start.stop == SearchStop::Neighbor) overlap[i - 1] = overlap[i] = true;
      continue;
    }
    const auto end = find_end(sv, sign, config.lateral_velocity_threshold, c, lim);
    if (end.stop != SearchStop::Found) {
      reason[i] = reason_for(end.stop);
      if (end.stop == SearchStop::Neighbor) overlap[i + 1] = overlap[i] = true;
      continue;
    }
    if (end.index <= cr.index) {
      reason[i] = RejectionReason::DegenerateStage;
      continue;
    }

    LaneChangeEvent ev;
    ev.recording_id = recording.meta.recording_id;
    ev.track_id = trajectory.track_id;
    ev.vehicle_class = trajectory.vehicle_class;
    ev.direction = left ? LaneChangeDirection::Left : LaneChangeDirection::Right;
    ev.origin_lane = origin->rank;
    ev.target_lane = target->rank;
    ev.start_frame = pts[start.index].frame;
    ev.cross_frame = cr.cross_frame;
    ev.end_frame = pts[end.index].frame;
    const auto total = ev.end_frame - ev.start_frame;
    const auto first = ev.cross_frame - ev.start_frame;
    ev.duration_s = static_cast<double>(total) * dt;
    ev.t1_s = static_cast<double>(first) * dt;
    ev.t2_s = static_cast<double>(total - first) * dt;
    if (config.nav_speed == NavSpeedDefinition::AtStart) {
      ev.nav_speed_mps = std::abs(pts[start.index].x_velocity);
    } else {
      double sum = 0.0;
      for (std::size_t k = start.index; k <= end.index; ++k) sum += std::abs(pts[k].x_velocity);
      ev.nav_speed_mps = sum / static_cast<double>(end.index - start.index + 1);
    }
    candidate[i] = ev;
  }

  for (std::size_t i = 0; i < m; ++i) {
    // A maneuver that never settles between two crossings is a multi-lane
    // sweep; neither crossing becomes an event.
    if (overlap[i] && (!reason[i] || *reason[i] == RejectionReason::OverlapsAdjacentCrossing)) {
      reason[i] = RejectionReason::OverlapsAdjacentCrossing;
    }
    if (reason[i]) {
      result.rejections.push_back(
          {recording.meta.recording_id, trajectory.track_id, crossings[i].cross_frame, *reason[i]});
    } else {
      result.events.push_back(candidate[i]);
    }
  }
  return result;
}

ExtractionResult extract_all(const std::vector<Recording>& dataset, const ExtractionConfig& config) {
  validate(config);
  ExtractionResult all;
  for (const auto& rec : dataset) {
    for (const auto& tr : rec.tracks) {
      auto r = extract_trajectory(rec, tr, config);
      all.events.insert(all.events.end(), r.events.begin(), r.events.end());
      all.rejections.insert(all.rejections.end(), r.rejections.begin(), r.rejections.end());
    }
  }
  std::sort(all.events.begin(), all.events.end(),
            [](const LaneChangeEvent& a, const LaneChangeEvent& b) {
              return std::tie(a.recording_id, a.track_id, a.start_frame) <
                     std::tie(b.recording_id, b.track_id, b.start_frame);
            });
  std::sort(all.rejections.begin(), all.rejections.end(), [](const Rejection& a, const Rejection& b) {
    return std::tie(a.recording_id, a.track_id, a.cross_frame) <
           std::tie(b.recording_id, b.track_id, b.cross_frame);
  });
  return all;
}

std::string events_csv(const std::vector<LaneChangeEvent>& events) {
  using text::format_fixed;
  std::ostringstream os;
  os << "recording_id,track_id,vehicle_class,direction,origin_lane,target_lane,start_frame,"
        "cross_frame,end_frame,duration_s,t1_s,t2_s,nav_speed_mps\n";
  for (const auto& e : events) {
    os << e.recording_id << ',' << e.track_id << ',' << to_string(e.vehicle_class) << ','
       << to_string(e.direction) << ',' << e.origin_lane << ',' << e.target_lane << ','
       << e.start_frame << ',' << e.cross_frame << ',' << e.end_frame << ','
       << format_fixed(e.duration_s, 3) << ',' << format_fixed(e.t1_s, 3) << ','
       << format_fixed(e.t2_s, 3) << ',' << format_fixed(e.nav_speed_mps, 3) << '\n';
  }
  return os.str();
}

std::vector<LaneChangeEvent> parse_events_csv(const std::string& content, const std::string& source) {
  static constexpr std::string_view kColumns[] = {
      "recording_id", "track_id",  "vehicle_class", "direction", "origin_lane",
      "target_lane",  "start_frame", "cross_frame", "end_frame", "duration_s",
      "t1_s",         "t2_s",      "nav_speed_mps"};
  std::vector<LaneChangeEvent> out;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty()) continue;
    const auto f = text::split(body, ',');
    auto fail = [&](const std::string& what) {
      throw Error(ErrorCode::MalformedRow, source + ":" + std::to_string(line_no) + ": " + what);
    };
    if (!header) {
      if (f.size() != std::size(kColumns)) fail("unexpected header");
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (text::trim(f[i]) != kColumns[i]) fail("unexpected column '" + std::string(f[i]) + "'");
      }
      header = true;
      continue;
    }
    if (f.size() != std::size(kColumns)) fail("expected 13 fields");
    auto as_int = [&](std::size_t i) {
      const auto v = text::parse_int(f[i]);
      if (!v) fail("cannot parse " + std::string(kColumns[i]));
      return *v;
    };
    auto as_double = [&](std::size_t i) {
      const auto v = text::parse_double(f[i]);
      if (!v) fail("cannot parse " + std::string(kColumns[i]));
      return *v;
    };
    LaneChangeEvent e;
    e.recording_id = static_cast<int>(as_int(0));
    e.track_id = static_cast<int>(as_int(1));
    const auto cls = parse_vehicle_class(text::trim(f[2]));
    const auto dir = parse_direction(text::trim(f[3]));
    if (!cls) fail("unknown vehicle class");
    if (!dir) fail("unknown direction");
    e.vehicle_class = *cls;
    e.direction = *dir;
    e.origin_lane = static_cast<int>(as_int(4));
    e.target_lane = static_cast<int>(as_int(5));
    e.start_frame = as_int(6);
    e.cross_frame = as_int(7);
    e.end_frame = as_int(8);
    e.duration_s = as_double(9);
    e.t1_s = as_double(10);
    e.t2_s = as_double(11);
    e.nav_speed_mps = as_double(12);
    out.push_back(e);
  }
  if (!header) {
    throw Error(ErrorCode::MalformedRow, source + ": missing header row");
  }
  return out;
}

std::vector<LaneChangeEvent> read_events_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_events_csv(ss.str(), path.string());
}

std::string rejections_csv(const std::vector<Rejection>& rejections) {
  std::ostringstream os;
  for (const auto& r : rejections) {
    os << r.recording_id << ',' << r.track_id << ',' << r.cross_frame << ',' << to_string(r.reason)
       << '\n';
  }
  return os.str();
}

}  // namespace lcdur
