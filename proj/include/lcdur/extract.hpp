#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lcdur/highd.hpp"
#include "lcdur/types.hpp"

namespace lcdur {

enum class NavSpeedDefinition { MeanOverEvent, AtStart };

struct ExtractionConfig {
  double lateral_velocity_threshold = 0.10;  // m/s
  int smoothing_half_window = 5;             // frames
  double max_search_window = 10.0;           // s, each side of the crossing
  double settle_window = 0.5;                // s
  double lane_debounce = 0.4;                // s, see detect_crossings
  NavSpeedDefinition nav_speed = NavSpeedDefinition::MeanOverEvent;
};

/// Throws InvalidArgument unless every numeric field is positive (the
/// debounce may be zero).
void validate(const ExtractionConfig& config);

struct LaneChangeEvent {
  int recording_id = 0;
  int track_id = 0;
  VehicleClass vehicle_class = VehicleClass::Car;
  LaneChangeDirection direction = LaneChangeDirection::Left;
  int origin_lane = 1;  // rank, 1 = rightmost
  int target_lane = 2;
  std::int64_t start_frame = 0;
  std::int64_t cross_frame = 0;
  std::int64_t end_frame = 0;
  double duration_s = 0.0;
  double t1_s = 0.0;
  double t2_s = 0.0;
  double nav_speed_mps = 0.0;

  bool operator==(const LaneChangeEvent&) const = default;
};

/// A lane_id transition. `index` is the position of the first point in the
/// target lane within the trajectory.
struct Crossing {
  std::size_t index = 0;
  std::int64_t cross_frame = 0;
  int origin_lane_id = 0;
  int target_lane_id = 0;
  bool censored = false;  // transition at the first or last observed frame
};

enum class RejectionReason {
  BoundaryCensored,
  SearchWindowExhausted,
  OverlapsAdjacentCrossing,
  NonAdjacentLanes,
  UnknownLane,
  DegenerateStage,
};

std::string_view to_string(RejectionReason r);

struct Rejection {
  int recording_id = 0;
  int track_id = 0;
  std::int64_t cross_frame = 0;
  RejectionReason reason = RejectionReason::BoundaryCensored;
};

struct ExtractionResult {
  std::vector<LaneChangeEvent> events;  // sorted by (recording, track, start)
  std::vector<Rejection> rejections;    // sorted by (recording, track, cross)
};

/// lane_id transitions. Alternating transitions between the same two lanes
/// that follow each other within `debounce_frames` are merged: an odd run
/// becomes one crossing at its first transition, an even run (touching the
/// marking and returning) is dropped.
std::vector<Crossing> detect_crossings(const Trajectory& trajectory, std::int64_t debounce_frames = 0);

/// Extracts every crossing of one trajectory. Each crossing yields either an
/// event or exactly one rejection.
ExtractionResult extract_trajectory(const Recording& recording, const Trajectory& trajectory,
                                    const ExtractionConfig& config);

ExtractionResult extract_all(const std::vector<Recording>& dataset, const ExtractionConfig& config);

/// `events.csv`: seconds and speeds with 3 decimals.
std::string events_csv(const std::vector<LaneChangeEvent>& events);
/// Reads `events.csv`. Throws MissingFile / MalformedRow.
std::vector<LaneChangeEvent> read_events_csv(const std::filesystem::path& path);
std::vector<LaneChangeEvent> parse_events_csv(const std::string& content, const std::string& source);

/// One line per rejection: `recording,track,cross_frame,reason`.
std::string rejections_csv(const std::vector<Rejection>& rejections);

}  // namespace lcdur
