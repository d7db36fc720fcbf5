#include "lcdur/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "json.hpp"
#include "lcdur/error.hpp"
#include "random.hpp"

namespace lcdur {

namespace {

constexpr double kUpperFirstMarking = 8.0;  // m
constexpr double kMedianWidth = 1.5;        // m between carriageways
constexpr double kRoadLength = 420.0;       // m

struct Geometry {
  int lanes;
  double width;
  std::vector<double> upper;  // marking y, increasing
  std::vector<double> lower;

  // Leftward coordinate of the right edge of rank-1 lane.
  double base(DrivingDirection dir) const {
    return dir == DrivingDirection::Upper ? upper.front() : -lower.back();
  }
  double marking_between(DrivingDirection dir, int rank_a, int rank_b) const {
    return base(dir) + std::min(rank_a, rank_b) * width;
  }
  double lane_center(DrivingDirection dir, int rank) const {
    return base(dir) + (rank - 0.5) * width;
  }
  int rank_at(DrivingDirection dir, double leftward_pos) const {
    const int r = static_cast<int>(std::floor((leftward_pos - base(dir)) / width)) + 1;
    return std::clamp(r, 1, lanes);
  }
  int lane_id(DrivingDirection dir, int rank) const {
    return dir == DrivingDirection::Upper ? 1 + rank : 2 * lanes + 3 - rank;
  }
};

Geometry make_geometry(int lanes, double width) {
  Geometry g{lanes, width, {}, {}};
  for (int i = 0; i <= lanes; ++i) g.upper.push_back(kUpperFirstMarking + i * width);
  const double lower0 = g.upper.back() + kMedianWidth;
  for (int i = 0; i <= lanes; ++i) g.lower.push_back(lower0 + i * width);
  return g;
}

std::int64_t to_frames(double seconds, double rate) {
  return static_cast<std::int64_t>(std::llround(seconds * rate));
}

void check(bool ok, ErrorCode code, const std::string& msg) {
  if (!ok) throw Error(code, msg);
}

struct Planned {
  PlantedEvent spec;
  std::int64_t start = 0;  // index into the vehicle's frames
  std::int64_t frames = 0;
  int sign = 1;            // +1 leftward
};

// Offset along the direction of motion from the crossed marking at phase tau.
double offset_from_marking(double width, double fraction, double tau) {
  return 0.5 * width * (std::cos(std::numbers::pi * fraction) - std::cos(std::numbers::pi * tau));
}

}  // namespace

SynthOutput generate_recording(const SynthConfig& config) {
  check(config.lane_count == 2 || config.lane_count == 3, ErrorCode::InvalidArgument,
        "lane_count must be 2 or 3");
  check(config.frame_rate > 0.0, ErrorCode::InvalidArgument, "frame_rate must be positive");
  check(config.lane_width > 0.0, ErrorCode::InvalidArgument, "lane_width must be positive");
  check(config.truck_fraction >= 0.0 && config.truck_fraction <= 1.0,
        ErrorCode::InvalidArgument, "truck_fraction must lie in [0,1]");
  check(config.noise_std >= 0.0, ErrorCode::InvalidArgument, "noise must be non-negative");

  const double rate = config.frame_rate;
  const double dt = 1.0 / rate;
  const auto geo = make_geometry(config.lane_count, config.lane_width);
  std::mt19937_64 gen(config.seed);

  const bool explicit_vehicles = !config.vehicles.empty();
  std::vector<SynthVehicle> vehicles = config.vehicles;
  if (!explicit_vehicles) {
    check(config.n_vehicles >= 0, ErrorCode::InvalidArgument, "n_vehicles must be >= 0");
    for (int i = 0; i < config.n_vehicles; ++i) {
      SynthVehicle v;
      v.vehicle_class =
          rng::uniform01(gen) < config.truck_fraction ? VehicleClass::Truck : VehicleClass::Car;
      v.driving_direction =
          rng::uniform01(gen) < 0.5 ? DrivingDirection::Upper : DrivingDirection::Lower;
      v.initial_lane = static_cast<int>(rng::uniform_int(gen, 1, config.lane_count));
      v.speed_mps = v.vehicle_class == VehicleClass::Car ? rng::uniform(gen, 25.0, 38.0)
                                                         : rng::uniform(gen, 20.0, 26.0);
      if (static_cast<std::size_t>(i) < config.speeds.size()) v.speed_mps = config.speeds[i];
      v.first_frame = rng::uniform_int(gen, 0, 250);
      v.num_frames = std::max<std::int64_t>(1, to_frames(config.track_duration_s, rate));
      vehicles.push_back(v);
    }
  }

  // Validate and group the planted events per vehicle.
  std::vector<std::vector<Planned>> per_vehicle(vehicles.size());
  for (const auto& e : config.events) {
    const std::string tag = "event on vehicle " + std::to_string(e.vehicle);
    check(e.vehicle >= 0 && static_cast<std::size_t>(e.vehicle) < vehicles.size(),
          ErrorCode::InvalidArgument, tag + ": no such vehicle");
    check(e.origin_lane >= 1 && e.origin_lane <= config.lane_count && e.target_lane >= 1 &&
              e.target_lane <= config.lane_count && std::abs(e.origin_lane - e.target_lane) == 1,
          ErrorCode::InvalidArgument, tag + ": lanes must be adjacent ranks within the road");
    check(e.crossing_fraction > 0.0 && e.crossing_fraction < 1.0, ErrorCode::InvalidArgument,
          tag + ": crossing fraction must lie strictly inside (0,1)");
    const double frames = e.duration_s * rate;
    check(e.duration_s > 0.0 && std::abs(frames - std::round(frames)) < 1e-6,
          ErrorCode::InvalidArgument, tag + ": duration must be a positive multiple of 1/frame_rate");
    Planned p;
    p.spec = e;
    p.start = to_frames(e.start_s, rate);
    p.frames = std::llround(frames);
    p.sign = e.target_lane > e.origin_lane ? 1 : -1;
    per_vehicle[e.vehicle].push_back(p);
  }
  for (std::size_t v = 0; v < vehicles.size(); ++v) {
    auto& evs = per_vehicle[v];
    std::sort(evs.begin(), evs.end(),
              [](const Planned& a, const Planned& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < evs.size(); ++i) {
      check(evs[i].start >= evs[i - 1].start + evs[i - 1].frames, ErrorCode::OverlappingEvents,
            "vehicle " + std::to_string(v) + ": planted events overlap");
    }
    if (evs.empty()) continue;
    if (!explicit_vehicles) {
      vehicles[v].initial_lane = evs.front().spec.origin_lane;
      const auto& last = evs.back();
      vehicles[v].num_frames = std::max(vehicles[v].num_frames,
                                        last.start + last.frames + to_frames(4.0, rate));
    }
  }

  SynthOutput out;
  auto& rec = out.recording;
  rec.meta.recording_id = config.recording_id;
  rec.meta.frame_rate = rate;
  rec.meta.location_id = 0;
  rec.meta.upper_lane_markings = geo.upper;
  rec.meta.lower_lane_markings = geo.lower;
  rec.lanes = lane_layout(rec.meta);
  out.truth.recording_id = config.recording_id;
  out.truth.frame_rate = rate;
  out.truth.class_counts = {{"car", 0}, {"truck", 0}};

  std::int64_t last_frame = 0;
  for (std::size_t v = 0; v < vehicles.size(); ++v) {
    const auto& veh = vehicles[v];
    const auto dir = veh.driving_direction;
    const auto& evs = per_vehicle[v];
    const std::string tag = "vehicle " + std::to_string(v);
    check(veh.num_frames >= 1 && veh.first_frame >= 0, ErrorCode::InvalidArgument,
          tag + ": empty track");
    check(veh.initial_lane >= 1 && veh.initial_lane <= config.lane_count,
          ErrorCode::InvalidArgument, tag + ": initial lane out of range");
    const auto n = static_cast<std::size_t>(veh.num_frames);

    // Clean leftward position / velocity, and the lane rank per frame.
    std::vector<double> pos(n), vel(n, 0.0);
    std::vector<int> rank(n, 0);
    std::vector<int> active(n, -1);  // index of the event covering the frame

    double rest = geo.lane_center(dir, veh.initial_lane);
    int lane = veh.initial_lane;
    if (!evs.empty()) {
      const auto& first = evs.front();
      check(first.spec.origin_lane == lane, ErrorCode::InconsistentEventChain,
            tag + ": first event does not start in the vehicle's lane");
      rest = geo.marking_between(dir, first.spec.origin_lane, first.spec.target_lane) +
             first.sign * offset_from_marking(config.lane_width, first.spec.crossing_fraction, 0.0);
    }
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < evs.size(); ++i) {
      const auto& e = evs[i];
      check(e.start >= 0 && e.start + e.frames <= veh.num_frames - 1,
            ErrorCode::EventOutsideRecording, tag + ": planted event leaves the track");
      check(e.spec.origin_lane == lane, ErrorCode::InconsistentEventChain,
            tag + ": event origin lane does not match the current lane");
      const double marking = geo.marking_between(dir, e.spec.origin_lane, e.spec.target_lane);
      const double f = e.spec.crossing_fraction;
      const double start_pos = marking + e.sign * offset_from_marking(config.lane_width, f, 0.0);
      check(std::abs(start_pos - rest) <= 1e-9 * config.lane_width,
            ErrorCode::InconsistentEventChain,
            tag + ": crossing fraction is incompatible with the rest position left by the "
                  "previous event");
      for (; cursor < static_cast<std::size_t>(e.start); ++cursor) pos[cursor] = rest;
      const double amplitude = 0.5 * config.lane_width * std::numbers::pi / (e.frames * dt);
      for (std::int64_t k = 0; k <= e.frames; ++k) {
        const double tau = static_cast<double>(k) / static_cast<double>(e.frames);
        const auto idx = static_cast<std::size_t>(e.start + k);
        pos[idx] = marking + e.sign * offset_from_marking(config.lane_width, f, tau);
        vel[idx] = (k == 0 || k == e.frames)
                       ? 0.0
                       : e.sign * amplitude * std::sin(std::numbers::pi * tau);
        active[idx] = static_cast<int>(i);
      }
      cursor = static_cast<std::size_t>(e.start + e.frames + 1);
      rest = marking + e.sign * offset_from_marking(config.lane_width, f, 1.0);
      lane = e.spec.target_lane;
    }
    for (; cursor < n; ++cursor) pos[cursor] = rest;

    std::vector<double> noise(n, 0.0);
    if (config.noise_std > 0.0) {
      for (auto& x : noise) x = config.noise_std * rng::standard_normal(gen);
    }

    for (std::size_t k = 0; k < n; ++k) {
      if (active[k] >= 0) {
        const auto& e = evs[static_cast<std::size_t>(active[k])];
        const double tau = static_cast<double>(static_cast<std::int64_t>(k) - e.start) /
                           static_cast<double>(e.frames);
        // Relative to the marking, along the direction of motion. Computed
        // from the same expression as the ground-truth crossing below.
        const double rel =
            offset_from_marking(config.lane_width, e.spec.crossing_fraction, tau) +
            e.sign * noise[k];
        rank[k] = rel >= 0.0 ? e.spec.target_lane : e.spec.origin_lane;
      } else {
        rank[k] = geo.rank_at(dir, pos[k] + noise[k]);
      }
    }

    Trajectory tr;
    tr.track_id = static_cast<int>(v) + 1;
    tr.vehicle_class = veh.vehicle_class;
    tr.driving_direction = dir;
    tr.width = veh.vehicle_class == VehicleClass::Car ? 4.5 : 12.0;
    tr.height = veh.vehicle_class == VehicleClass::Car ? 1.8 : 2.5;
    const double vx = dir == DrivingDirection::Upper ? -veh.speed_mps : veh.speed_mps;
    const double x0 = dir == DrivingDirection::Upper ? kRoadLength : 0.0;
    tr.points.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double lateral_noise_rate =
          config.noise_std > 0.0
              ? (noise[std::min(k + 1, n - 1)] - noise[k == 0 ? 0 : k - 1]) /
                    (static_cast<double>(std::min(k + 1, n - 1) - (k == 0 ? 0 : k - 1)) * dt)
              : 0.0;
      const double left_pos = pos[k] + noise[k];
      const double left_vel = vel[k] + (n > 1 ? lateral_noise_rate : 0.0);
      const double y_center = dir == DrivingDirection::Upper ? left_pos : -left_pos;
      TrackPoint p;
      p.frame = veh.first_frame + static_cast<std::int64_t>(k);
      p.x = x0 + vx * static_cast<double>(k) * dt;
      p.y = y_center - 0.5 * tr.height;
      p.x_velocity = vx;
      p.y_velocity = dir == DrivingDirection::Upper ? left_vel : -left_vel;
      p.lane_id = geo.lane_id(dir, rank[k]);
      tr.points.push_back(p);
    }
    last_frame = std::max(last_frame, tr.last_frame());

    ++out.truth.class_counts[std::string(to_string(veh.vehicle_class))];
    for (const auto& e : evs) {
      GroundTruthEvent g;
      g.recording_id = config.recording_id;
      g.track_id = tr.track_id;
      g.vehicle_class = veh.vehicle_class;
      g.direction = e.sign > 0 ? LaneChangeDirection::Left : LaneChangeDirection::Right;
      g.origin_lane = e.spec.origin_lane;
      g.target_lane = e.spec.target_lane;
      g.start_frame = veh.first_frame + e.start;
      g.end_frame = g.start_frame + e.frames;
      std::int64_t k = 0;
      while (offset_from_marking(config.lane_width, e.spec.crossing_fraction,
                                 static_cast<double>(k) / static_cast<double>(e.frames)) < 0.0) {
        ++k;
      }
      g.cross_frame = g.start_frame + k;
      g.duration_s = static_cast<double>(e.frames) * dt;
      g.t1_s = static_cast<double>(k) * dt;
      g.t2_s = static_cast<double>(e.frames - k) * dt;
      out.truth.events.push_back(g);
    }
    rec.tracks.push_back(std::move(tr));
  }
  rec.meta.duration = static_cast<double>(last_frame + 1) * dt;
  return out;
}

std::string ground_truth_json(const GroundTruth& truth) {
  nlohmann::ordered_json j;
  j["recording_id"] = truth.recording_id;
  j["frame_rate"] = truth.frame_rate;
  j["class_counts"] = truth.class_counts;
  auto events = nlohmann::ordered_json::array();
  const double dt = 1.0 / truth.frame_rate;
  for (const auto& e : truth.events) {
    nlohmann::ordered_json ej;
    ej["recording_id"] = e.recording_id;
    ej["track_id"] = e.track_id;
    ej["vehicle_class"] = std::string(to_string(e.vehicle_class));
    ej["direction"] = std::string(to_string(e.direction));
    ej["origin_lane"] = e.origin_lane;
    ej["target_lane"] = e.target_lane;
    ej["start_frame"] = e.start_frame;
    ej["cross_frame"] = e.cross_frame;
    ej["end_frame"] = e.end_frame;
    ej["start_s"] = static_cast<double>(e.start_frame) * dt;
    ej["cross_s"] = static_cast<double>(e.cross_frame) * dt;
    ej["end_s"] = static_cast<double>(e.end_frame) * dt;
    ej["duration_s"] = e.duration_s;
    ej["t1_s"] = e.t1_s;
    ej["t2_s"] = e.t2_s;
    events.push_back(std::move(ej));
  }
  j["events"] = std::move(events);
  return j.dump(2) + "\n";
}

GroundTruth parse_ground_truth_json(const std::string& json) {
  GroundTruth t;
  try {
    const auto j = nlohmann::json::parse(json);
    t.recording_id = j.at("recording_id").get<int>();
    t.frame_rate = j.at("frame_rate").get<double>();
    t.class_counts = j.at("class_counts").get<std::map<std::string, std::size_t>>();
    for (const auto& ej : j.at("events")) {
      GroundTruthEvent e;
      e.recording_id = ej.at("recording_id").get<int>();
      e.track_id = ej.at("track_id").get<int>();
      const auto cls = parse_vehicle_class(ej.at("vehicle_class").get<std::string>());
      const auto dir = parse_direction(ej.at("direction").get<std::string>());
      if (!cls || !dir) throw Error(ErrorCode::MalformedRow, "bad class or direction");
      e.vehicle_class = *cls;
      e.direction = *dir;
      e.origin_lane = ej.at("origin_lane").get<int>();
      e.target_lane = ej.at("target_lane").get<int>();
      e.start_frame = ej.at("start_frame").get<std::int64_t>();
      e.cross_frame = ej.at("cross_frame").get<std::int64_t>();
      e.end_frame = ej.at("end_frame").get<std::int64_t>();
      e.duration_s = ej.at("duration_s").get<double>();
      e.t1_s = ej.at("t1_s").get<double>();
      e.t2_s = ej.at("t2_s").get<double>();
      t.events.push_back(e);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::MalformedRow, std::string("ground truth: ") + ex.what());
  }
  return t;
}

void write_synth(const SynthOutput& out, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_recording(out.recording, recording_paths(dir, out.recording.meta.recording_id));
  std::ofstream os(dir / "ground_truth.json", std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + (dir / "ground_truth.json").string());
  os << ground_truth_json(out.truth);
}

SynthConfig random_config(std::uint64_t seed, int n_vehicles, int n_events,
                          double truck_fraction, int lane_count, double frame_rate) {
  if (n_events < 0 || n_vehicles < 0) {
    throw Error(ErrorCode::InvalidArgument, "counts must be non-negative");
  }
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.truck_fraction = truck_fraction;
  cfg.lane_count = lane_count;
  cfg.frame_rate = frame_rate;
  cfg.n_vehicles = std::max(n_vehicles, n_events);
  std::mt19937_64 gen(seed ^ 0x9e3779b97f4a7c15ULL);
  const double median_log = std::log(7.5);
  for (int i = 0; i < cfg.n_vehicles; ++i) {
    SynthVehicle v;
    v.driving_direction =
        rng::uniform01(gen) < 0.5 ? DrivingDirection::Upper : DrivingDirection::Lower;
    v.first_frame = rng::uniform_int(gen, 0, 500);
    if (i < n_events) {
      const int group = i % 4;
      v.vehicle_class = group < 2 ? VehicleClass::Car : VehicleClass::Truck;
      const bool left = group % 2 == 0;
      PlantedEvent e;
      e.vehicle = i;
      e.origin_lane = left ? static_cast<int>(rng::uniform_int(gen, 1, lane_count - 1))
                           : static_cast<int>(rng::uniform_int(gen, 2, lane_count));
      e.target_lane = left ? e.origin_lane + 1 : e.origin_lane - 1;
      const double seconds = std::exp(median_log + 0.2 * rng::standard_normal(gen));
      const auto frames = std::clamp(to_frames(seconds, frame_rate), to_frames(4.0, frame_rate),
                                     to_frames(15.0, frame_rate));
      e.duration_s = static_cast<double>(frames) / frame_rate;
      e.crossing_fraction = rng::uniform(gen, 0.3, 0.7);
      const auto start = rng::uniform_int(gen, to_frames(3.0, frame_rate), to_frames(6.0, frame_rate));
      e.start_s = static_cast<double>(start) / frame_rate;
      v.initial_lane = e.origin_lane;
      v.num_frames = start + frames + to_frames(4.0, frame_rate) +
                     rng::uniform_int(gen, 0, to_frames(2.0, frame_rate));
      cfg.events.push_back(e);
    } else {
      v.vehicle_class =
          rng::uniform01(gen) < truck_fraction ? VehicleClass::Truck : VehicleClass::Car;
      v.initial_lane = static_cast<int>(rng::uniform_int(gen, 1, lane_count));
      v.num_frames = to_frames(20.0, frame_rate);
    }
    v.speed_mps = v.vehicle_class == VehicleClass::Car ? rng::uniform(gen, 18.0, 42.0)
                                                       : rng::uniform(gen, 18.0, 30.0);
    cfg.vehicles.push_back(v);
  }
  return cfg;
}

}  // namespace lcdur
