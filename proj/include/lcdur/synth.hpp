#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lcdur/highd.hpp"
#include "lcdur/types.hpp"

namespace lcdur {

/// A lane change to plant. Lanes are ranks (1 = rightmost in the direction of
/// travel); start is seconds after the vehicle's first frame.
struct PlantedEvent {
  int vehicle = 0;
  int origin_lane = 1;
  int target_lane = 2;
  double start_s = 0.0;
  double duration_s = 6.0;
  double crossing_fraction = 0.5;  // position of the line crossing in (0,1)
};

struct SynthVehicle {
  VehicleClass vehicle_class = VehicleClass::Car;
  DrivingDirection driving_direction = DrivingDirection::Lower;
  int initial_lane = 1;  // rank
  double speed_mps = 30.0;
  std::int64_t first_frame = 0;
  std::int64_t num_frames = 750;
};

struct SynthConfig {
  int recording_id = 1;
  int n_vehicles = 0;
  double truck_fraction = 0.2;
  int lane_count = 3;
  double frame_rate = 25.0;
  double lane_width = 3.75;
  double noise_std = 0.0;  // m, white noise on lateral position
  std::uint64_t seed = 0;
  double track_duration_s = 30.0;
  /// Optional per-vehicle longitudinal speeds; drawn from the seed if empty.
  std::vector<double> speeds;
  /// Optional explicit vehicles; when empty, n_vehicles are drawn.
  std::vector<SynthVehicle> vehicles;
  std::vector<PlantedEvent> events;
};

struct GroundTruthEvent {
  int recording_id = 0;
  int track_id = 0;
  VehicleClass vehicle_class = VehicleClass::Car;
  LaneChangeDirection direction = LaneChangeDirection::Left;
  int origin_lane = 1;
  int target_lane = 2;
  std::int64_t start_frame = 0;
  std::int64_t cross_frame = 0;
  std::int64_t end_frame = 0;
  double duration_s = 0.0;
  double t1_s = 0.0;
  double t2_s = 0.0;
};

struct GroundTruth {
  int recording_id = 0;
  double frame_rate = 25.0;
  std::map<std::string, std::size_t> class_counts;
  std::vector<GroundTruthEvent> events;  // sorted by (track, start_frame)
};

struct SynthOutput {
  Recording recording;
  GroundTruth truth;
};

/// Builds a recording with raised-cosine lateral profiles for every planted
/// event. Throws InvalidArgument, OverlappingEvents, EventOutsideRecording or
/// InconsistentEventChain (consecutive events of one vehicle whose rest
/// positions do not line up).
SynthOutput generate_recording(const SynthConfig& config);

/// Writes the highD triple and `ground_truth.json` into `dir`.
void write_synth(const SynthOutput& out, const std::filesystem::path& dir);

std::string ground_truth_json(const GroundTruth& truth);
GroundTruth parse_ground_truth_json(const std::string& json);

/// A config with `n_events` single lane changes on distinct vehicles, spread
/// round-robin over (car,left), (car,right), (truck,left), (truck,right).
/// Durations are log-normal (median 7.5 s, sigma 0.2) clamped to [4, 15] s
/// and snapped to the frame grid; crossing fractions are uniform in
/// [0.3, 0.7]. Vehicles beyond n_events keep their lane.
SynthConfig random_config(std::uint64_t seed, int n_vehicles, int n_events,
                          double truck_fraction = 0.2, int lane_count = 3,
                          double frame_rate = 25.0);

}  // namespace lcdur
