#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcdur/types.hpp"

namespace lcdur {

struct RecordingMeta {
  int recording_id = 0;
  double frame_rate = 25.0;             // Hz
  int location_id = 0;
  std::optional<double> speed_limit;    // m/s; highD writes -1 for none
  double duration = 0.0;                // s
  std::vector<double> upper_lane_markings;  // lateral y of each marking, m
  std::vector<double> lower_lane_markings;

  double frame_dt() const { return 1.0 / frame_rate; }

  bool operator==(const RecordingMeta&) const = default;
};

struct TrackPoint {
  std::int64_t frame = 0;
  double x = 0.0;  // m, longitudinal (bounding-box corner as in highD)
  double y = 0.0;  // m, lateral
  double x_velocity = 0.0;
  double y_velocity = 0.0;
  int lane_id = 0;

  bool operator==(const TrackPoint&) const = default;
};

struct Trajectory {
  int track_id = 0;
  VehicleClass vehicle_class = VehicleClass::Car;
  DrivingDirection driving_direction = DrivingDirection::Lower;
  double width = 0.0;   // vehicle length along x (highD naming)
  double height = 0.0;  // vehicle width along y
  std::vector<TrackPoint> points;

  std::int64_t first_frame() const { return points.front().frame; }
  std::int64_t last_frame() const { return points.back().frame; }

  bool operator==(const Trajectory&) const = default;
};

/// One lane of one carriageway, with its rank counted from the rightmost lane
/// in the direction of travel (rank 1 = rightmost).
struct LaneInfo {
  int lane_id = 0;
  DrivingDirection direction = DrivingDirection::Lower;
  double lower_marking = 0.0;
  double upper_marking = 0.0;
  int rank = 0;
};

/// Lateral coordinate that grows toward the driver's left. highD's y axis
/// points down the image, the upper carriageway travels toward -x.
inline double leftward(DrivingDirection dir, double lateral) {
  return dir == DrivingDirection::Upper ? lateral : -lateral;
}

/// Lane table derived from the marking lists. Upper lanes are ids
/// 2..n_upper_markings, lower lanes follow after a one-id gap, as in highD.
std::vector<LaneInfo> lane_layout(const RecordingMeta& meta);

struct TrackRejection {
  int track_id = 0;
  std::string reason;
};

struct ParseReport {
  std::size_t rows_read = 0;
  std::size_t rows_skipped = 0;
  std::vector<TrackRejection> rejected_tracks;
};

struct Recording {
  RecordingMeta meta;
  std::vector<Trajectory> tracks;  // sorted by track_id
  std::vector<LaneInfo> lanes;     // lane_layout(meta)
  ParseReport parse_report;

  const LaneInfo* lane(int lane_id) const;
};

struct RecordingPaths {
  std::filesystem::path tracks;
  std::filesystem::path tracks_meta;
  std::filesystem::path recording_meta;
};

/// Parses one highD recording triple. Structural problems abort with an
/// Error naming the file and line; a track whose rows contain unparseable
/// numbers or undeclared lanes is dropped as a whole and listed in the
/// parse report.
Recording parse_recording(const RecordingPaths& paths);

/// Writes the three highD files. Columns the toolkit does not model are
/// written as zeros; numbers use the shortest round-trip representation.
void write_recording(const Recording& recording, const RecordingPaths& paths);

/// `<dir>/<NN>_tracks.csv` etc. for a two-digit recording id.
RecordingPaths recording_paths(const std::filesystem::path& dir, int recording_id);

/// Finds every complete `*_tracks.csv` / `*_tracksMeta.csv` /
/// `*_recordingMeta.csv` triple in a directory, ordered by file name.
std::vector<RecordingPaths> discover_recordings(const std::filesystem::path& dir);

struct ValidationReport {
  int recording_id = 0;
  double frame_rate = 0.0;
  std::size_t track_count = 0;
  std::map<std::string, std::size_t> class_counts;  // "car"/"truck"
  std::map<int, std::size_t> lane_occupancy;        // lane_id -> frames
  std::vector<int> boundary_censored;               // track ids
  std::size_t rows_read = 0;
  std::size_t rows_skipped = 0;
  std::vector<TrackRejection> rejected_tracks;
};

/// Tracks touching the first or last observed frame of the recording (the
/// minimum initial / maximum final frame over all tracks) are reported as
/// boundary-censored.
ValidationReport validate_dataset(const Recording& recording);

std::string validation_report_json(const std::vector<ValidationReport>& reports);

}  // namespace lcdur
