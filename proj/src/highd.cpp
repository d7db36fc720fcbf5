#include "lcdur/highd.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "lcdur/error.hpp"
#include "text.hpp"

namespace lcdur {

namespace {

using text::CsvTable;

std::string where(const CsvTable& t, std::size_t row) {
  return t.path().string() + ":" + std::to_string(t.line_number(row));
}

double require_double(const CsvTable& t, std::size_t row, std::size_t col, std::string_view what) {
  const auto v = text::parse_double(t.cell(row, col));
  if (!v) {
    throw Error(ErrorCode::MalformedRow,
                where(t, row) + ": cannot parse " + std::string(what) + " '" +
                    std::string(t.cell(row, col)) + "'");
  }
  return *v;
}

std::int64_t require_int(const CsvTable& t, std::size_t row, std::size_t col, std::string_view what) {
  const auto v = text::parse_int(t.cell(row, col));
  if (!v) {
    throw Error(ErrorCode::MalformedRow,
                where(t, row) + ": cannot parse " + std::string(what) + " '" +
                    std::string(t.cell(row, col)) + "'");
  }
  return *v;
}

std::vector<double> parse_markings(const CsvTable& t, std::size_t row, std::size_t col) {
  std::vector<double> out;
  const auto cell = text::trim(t.cell(row, col));
  if (cell.empty()) return out;
  for (auto part : text::split(cell, ';')) {
    if (text::trim(part).empty()) continue;
    const auto v = text::parse_double(part);
    if (!v) {
      throw Error(ErrorCode::MalformedRow,
                  where(t, row) + ": cannot parse lane marking '" + std::string(part) + "'");
    }
    out.push_back(*v);
  }
  if (out.size() >= 2) {
    const bool increasing = out[1] > out[0];
    for (std::size_t i = 1; i < out.size(); ++i) {
      if ((out[i] > out[i - 1]) != increasing || out[i] == out[i - 1]) {
        throw Error(ErrorCode::MalformedRow,
                    where(t, row) + ": lane markings are not strictly monotone");
      }
    }
  }
  return out;
}

RecordingMeta read_recording_meta(const std::filesystem::path& path) {
  const auto t = CsvTable::read(path);
  if (t.row_count() == 0) {
    throw Error(ErrorCode::MissingData, path.string() + ": no recording row");
  }
  RecordingMeta meta;
  meta.recording_id = static_cast<int>(require_int(t, 0, t.column("id"), "id"));
  meta.frame_rate = require_double(t, 0, t.column("frameRate"), "frameRate");
  if (!(meta.frame_rate > 0.0)) {
    throw Error(ErrorCode::MalformedRow, where(t, 0) + ": frameRate must be positive");
  }
  if (t.has_column("locationId")) {
    meta.location_id = static_cast<int>(require_int(t, 0, t.column("locationId"), "locationId"));
  }
  if (t.has_column("speedLimit")) {
    const double limit = require_double(t, 0, t.column("speedLimit"), "speedLimit");
    if (limit >= 0.0) meta.speed_limit = limit;
  }
  if (t.has_column("duration")) {
    meta.duration = require_double(t, 0, t.column("duration"), "duration");
  }
  meta.upper_lane_markings = parse_markings(t, 0, t.column("upperLaneMarkings"));
  meta.lower_lane_markings = parse_markings(t, 0, t.column("lowerLaneMarkings"));
  return meta;
}

std::unordered_map<int, Trajectory> read_tracks_meta(const std::filesystem::path& path) {
  const auto t = CsvTable::read(path);
  const auto c_id = t.column("id");
  const auto c_width = t.column("width");
  const auto c_height = t.column("height");
  const auto c_class = t.column("class");
  const auto c_dir = t.column("drivingDirection");
  std::unordered_map<int, Trajectory> out;
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    Trajectory tr;
    tr.track_id = static_cast<int>(require_int(t, r, c_id, "id"));
    tr.width = require_double(t, r, c_width, "width");
    tr.height = require_double(t, r, c_height, "height");
    const auto cls = parse_vehicle_class(t.cell(r, c_class));
    if (!cls) {
      throw Error(ErrorCode::UnknownVehicleClass,
                  where(t, r) + ": track " + std::to_string(tr.track_id) +
                      " has unknown class '" + std::string(t.cell(r, c_class)) + "'");
    }
    tr.vehicle_class = *cls;
    const auto dir = require_int(t, r, c_dir, "drivingDirection");
    if (dir != 1 && dir != 2) {
      throw Error(ErrorCode::MalformedRow,
                  where(t, r) + ": drivingDirection must be 1 or 2");
    }
    tr.driving_direction = static_cast<DrivingDirection>(dir);
    if (!out.emplace(tr.track_id, std::move(tr)).second) {
      throw Error(ErrorCode::MalformedRow, where(t, r) + ": duplicate track id");
    }
  }
  return out;
}

void write_markings(std::ostream& os, const std::vector<double>& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i) os << ';';
    os << text::format_shortest(m[i]);
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return os;
}

}  // namespace

std::vector<LaneInfo> lane_layout(const RecordingMeta& meta) {
  std::vector<LaneInfo> lanes;
  auto add_carriageway = [&lanes](const std::vector<double>& markings, int first_id,
                                  DrivingDirection dir) {
    if (markings.size() < 2) return;
    std::vector<LaneInfo> side;
    for (std::size_t i = 0; i + 1 < markings.size(); ++i) {
      LaneInfo lane;
      lane.lane_id = first_id + static_cast<int>(i);
      lane.direction = dir;
      lane.lower_marking = std::min(markings[i], markings[i + 1]);
      lane.upper_marking = std::max(markings[i], markings[i + 1]);
      side.push_back(lane);
    }
    std::vector<std::size_t> order(side.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double ca = 0.5 * (side[a].lower_marking + side[a].upper_marking);
      const double cb = 0.5 * (side[b].lower_marking + side[b].upper_marking);
      return leftward(dir, ca) < leftward(dir, cb);
    });
    for (std::size_t r = 0; r < order.size(); ++r) side[order[r]].rank = static_cast<int>(r) + 1;
    lanes.insert(lanes.end(), side.begin(), side.end());
  };
  const int n_upper = static_cast<int>(meta.upper_lane_markings.size());
  add_carriageway(meta.upper_lane_markings, 2, DrivingDirection::Upper);
  add_carriageway(meta.lower_lane_markings, n_upper + 2, DrivingDirection::Lower);
  return lanes;
}

const LaneInfo* Recording::lane(int lane_id) const {
  for (const auto& l : lanes) {
    if (l.lane_id == lane_id) return &l;
  }
  return nullptr;
}

Recording parse_recording(const RecordingPaths& paths) {
  for (const auto* p : {&paths.tracks, &paths.tracks_meta, &paths.recording_meta}) {
    if (!std::filesystem::exists(*p)) {
      throw Error(ErrorCode::MissingFile, "missing file " + p->string());
    }
  }
  Recording rec;
  rec.meta = read_recording_meta(paths.recording_meta);
  rec.lanes = lane_layout(rec.meta);
  auto meta_tracks = read_tracks_meta(paths.tracks_meta);

  const auto t = CsvTable::read(paths.tracks);
  if (t.row_count() == 0) {
    throw Error(ErrorCode::MissingData, paths.tracks.string() + ": no track rows");
  }
  const auto c_frame = t.column("frame");
  const auto c_id = t.column("id");
  const auto c_x = t.column("x");
  const auto c_y = t.column("y");
  const auto c_xv = t.column("xVelocity");
  const auto c_yv = t.column("yVelocity");
  const auto c_lane = t.column("laneId");

  std::unordered_map<int, std::string> rejected;  // track id -> reason
  std::unordered_map<int, std::size_t> rows_per_track;
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    const int id = static_cast<int>(require_int(t, r, c_id, "id"));
    auto it = meta_tracks.find(id);
    if (it == meta_tracks.end()) {
      throw Error(ErrorCode::UnknownTrack,
                  where(t, r) + ": track " + std::to_string(id) + " is not in " +
                      paths.tracks_meta.string());
    }
    ++rows_per_track[id];
    if (rejected.count(id)) continue;
    const auto frame = text::parse_int(t.cell(r, c_frame));
    const auto x = text::parse_double(t.cell(r, c_x));
    const auto y = text::parse_double(t.cell(r, c_y));
    const auto xv = text::parse_double(t.cell(r, c_xv));
    const auto yv = text::parse_double(t.cell(r, c_yv));
    const auto lane = text::parse_int(t.cell(r, c_lane));
    if (!frame || !x || !y || !xv || !yv || !lane) {
      rejected[id] = "unparseable numeric field at line " + std::to_string(t.line_number(r));
      continue;
    }
    const auto* info = rec.lane(static_cast<int>(*lane));
    if (info == nullptr || info->direction != it->second.driving_direction) {
      rejected[id] = "undeclared lane " + std::to_string(*lane) + " at line " +
                     std::to_string(t.line_number(r));
      continue;
    }
    it->second.points.push_back(TrackPoint{*frame, *x, *y, *xv, *yv, static_cast<int>(*lane)});
  }

  rec.parse_report.rows_read = t.row_count();
  for (auto& [id, tr] : meta_tracks) {
    if (rejected.count(id)) {
      rec.parse_report.rows_skipped += rows_per_track[id];
      rec.parse_report.rejected_tracks.push_back({id, rejected[id]});
      continue;
    }
    if (tr.points.empty()) continue;  // listed in meta only
    std::sort(tr.points.begin(), tr.points.end(),
              [](const TrackPoint& a, const TrackPoint& b) { return a.frame < b.frame; });
    for (std::size_t i = 1; i < tr.points.size(); ++i) {
      if (tr.points[i].frame != tr.points[i - 1].frame + 1) {
        throw Error(ErrorCode::InconsistentFrameSequence,
                    "track " + std::to_string(id) + ": frame " +
                        std::to_string(tr.points[i - 1].frame) + " is followed by " +
                        std::to_string(tr.points[i].frame));
      }
    }
    rec.tracks.push_back(std::move(tr));
  }
  std::sort(rec.tracks.begin(), rec.tracks.end(),
            [](const Trajectory& a, const Trajectory& b) { return a.track_id < b.track_id; });
  std::sort(rec.parse_report.rejected_tracks.begin(), rec.parse_report.rejected_tracks.end(),
            [](const TrackRejection& a, const TrackRejection& b) { return a.track_id < b.track_id; });
  return rec;
}

void write_recording(const Recording& recording, const RecordingPaths& paths) {
  using text::format_shortest;
  {
    auto os = open_out(paths.tracks);
    os << "frame,id,x,y,width,height,xVelocity,yVelocity,xAcceleration,yAcceleration,"
          "frontSightDistance,backSightDistance,dhw,thw,ttc,precedingXVelocity,precedingId,"
          "followingId,leftPrecedingId,leftAlongsideId,leftFollowingId,rightPrecedingId,"
          "rightAlongsideId,rightFollowingId,laneId\n";
    for (const auto& tr : recording.tracks) {
      const auto w = format_shortest(tr.width);
      const auto h = format_shortest(tr.height);
      for (const auto& p : tr.points) {
        os << p.frame << ',' << tr.track_id << ',' << format_shortest(p.x) << ','
           << format_shortest(p.y) << ',' << w << ',' << h << ','
           << format_shortest(p.x_velocity) << ',' << format_shortest(p.y_velocity)
           << ",0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0," << p.lane_id << '\n';
      }
    }
  }
  {
    auto os = open_out(paths.tracks_meta);
    os << "id,width,height,initialFrame,finalFrame,numFrames,class,drivingDirection,"
          "traveledDistance,minXVelocity,maxXVelocity,meanXVelocity,minDHW,minTHW,minTTC,"
          "numLaneChanges\n";
    for (const auto& tr : recording.tracks) {
      double min_v = 0.0, max_v = 0.0, sum_v = 0.0;
      int lane_changes = 0;
      if (!tr.points.empty()) {
        min_v = max_v = std::abs(tr.points.front().x_velocity);
      }
      for (std::size_t i = 0; i < tr.points.size(); ++i) {
        const double v = std::abs(tr.points[i].x_velocity);
        min_v = std::min(min_v, v);
        max_v = std::max(max_v, v);
        sum_v += v;
        if (i > 0 && tr.points[i].lane_id != tr.points[i - 1].lane_id) ++lane_changes;
      }
      const double traveled =
          tr.points.empty() ? 0.0 : std::abs(tr.points.back().x - tr.points.front().x);
      const double mean_v = tr.points.empty() ? 0.0 : sum_v / static_cast<double>(tr.points.size());
      os << tr.track_id << ',' << format_shortest(tr.width) << ',' << format_shortest(tr.height)
         << ',' << tr.first_frame() << ',' << tr.last_frame() << ',' << tr.points.size() << ','
         << (tr.vehicle_class == VehicleClass::Car ? "Car" : "Truck") << ','
         << static_cast<int>(tr.driving_direction) << ',' << format_shortest(traveled) << ','
         << format_shortest(min_v) << ',' << format_shortest(max_v) << ','
         << format_shortest(mean_v) << ",-1,-1,-1," << lane_changes << '\n';
    }
  }
  {
    const auto& m = recording.meta;
    std::size_t cars = 0;
    double distance = 0.0, time = 0.0;
    for (const auto& tr : recording.tracks) {
      if (tr.vehicle_class == VehicleClass::Car) ++cars;
      distance += std::abs(tr.points.back().x - tr.points.front().x);
      time += static_cast<double>(tr.points.size()) / m.frame_rate;
    }
    auto os = open_out(paths.recording_meta);
    os << "id,frameRate,locationId,speedLimit,month,weekDay,startTime,duration,"
          "totalDrivenDistance,totalDrivenTime,numVehicles,numCars,numTrucks,"
          "upperLaneMarkings,lowerLaneMarkings\n";
    os << m.recording_id << ',' << format_shortest(m.frame_rate) << ',' << m.location_id << ','
       << (m.speed_limit ? format_shortest(*m.speed_limit) : std::string("-1"))
       << ",01.2020,Mon,00:00," << format_shortest(m.duration) << ','
       << format_shortest(distance) << ',' << format_shortest(time) << ','
       << recording.tracks.size() << ',' << cars << ',' << recording.tracks.size() - cars << ',';
    write_markings(os, m.upper_lane_markings);
    os << ',';
    write_markings(os, m.lower_lane_markings);
    os << '\n';
  }
}

RecordingPaths recording_paths(const std::filesystem::path& dir, int recording_id) {
  std::ostringstream prefix;
  prefix << std::setw(2) << std::setfill('0') << recording_id;
  const auto p = prefix.str();
  return {dir / (p + "_tracks.csv"), dir / (p + "_tracksMeta.csv"),
          dir / (p + "_recordingMeta.csv")};
}

std::vector<RecordingPaths> discover_recordings(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::MissingFile, "not a directory: " + dir.string());
  }
  constexpr std::string_view suffix = "_tracks.csv";
  std::vector<RecordingPaths> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.size() <= suffix.size() ||
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
      continue;
    }
    const auto prefix = name.substr(0, name.size() - suffix.size());
    RecordingPaths p{entry.path(), dir / (prefix + "_tracksMeta.csv"),
                     dir / (prefix + "_recordingMeta.csv")};
    if (std::filesystem::exists(p.tracks_meta) && std::filesystem::exists(p.recording_meta)) {
      out.push_back(std::move(p));
    }
  }
  std::sort(out.begin(), out.end(), [](const RecordingPaths& a, const RecordingPaths& b) {
    return a.tracks.filename() < b.tracks.filename();
  });
  return out;
}

ValidationReport validate_dataset(const Recording& recording) {
  ValidationReport report;
  report.recording_id = recording.meta.recording_id;
  report.frame_rate = recording.meta.frame_rate;
  report.track_count = recording.tracks.size();
  report.class_counts["car"] = 0;
  report.class_counts["truck"] = 0;
  report.rows_read = recording.parse_report.rows_read;
  report.rows_skipped = recording.parse_report.rows_skipped;
  report.rejected_tracks = recording.parse_report.rejected_tracks;
  if (recording.tracks.empty()) return report;

  std::int64_t first = recording.tracks.front().first_frame();
  std::int64_t last = recording.tracks.front().last_frame();
  for (const auto& tr : recording.tracks) {
    first = std::min(first, tr.first_frame());
    last = std::max(last, tr.last_frame());
  }
  for (const auto& tr : recording.tracks) {
    ++report.class_counts[std::string(to_string(tr.vehicle_class))];
    for (const auto& p : tr.points) ++report.lane_occupancy[p.lane_id];
    if (tr.first_frame() == first || tr.last_frame() == last) {
      report.boundary_censored.push_back(tr.track_id);
    }
  }
  return report;
}

std::string validation_report_json(const std::vector<ValidationReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["recording_id"] = r.recording_id;
    j["frame_rate"] = r.frame_rate;
    j["frame_dt"] = 1.0 / r.frame_rate;
    j["track_count"] = r.track_count;
    j["class_counts"] = r.class_counts;
    nlohmann::ordered_json lanes = nlohmann::ordered_json::object();
    for (const auto& [lane, frames] : r.lane_occupancy) lanes[std::to_string(lane)] = frames;
    j["lane_occupancy"] = lanes;
    j["boundary_censored"] = r.boundary_censored;
    j["rows_read"] = r.rows_read;
    j["rows_skipped"] = r.rows_skipped;
    nlohmann::ordered_json rej = nlohmann::ordered_json::array();
    for (const auto& t : r.rejected_tracks) rej.push_back({{"track_id", t.track_id}, {"reason", t.reason}});
    j["rejected_tracks"] = rej;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

}  // namespace lcdur
