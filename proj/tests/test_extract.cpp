#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "lcdur/error.hpp"
#include "lcdur/extract.hpp"
#include "lcdur/synth.hpp"
#include "test_util.hpp"

using namespace lcdur;

namespace {

SynthConfig single(DrivingDirection dir, int lane, std::vector<PlantedEvent> events,
                   std::int64_t frames = 750, double speed = 30.0) {
  SynthConfig cfg;
  SynthVehicle v;
  v.driving_direction = dir;
  v.initial_lane = lane;
  v.first_frame = 40;
  v.num_frames = frames;
  v.speed_mps = speed;
  cfg.vehicles.push_back(v);
  cfg.events = std::move(events);
  return cfg;
}

PlantedEvent ev(int origin, int target, double start, double duration, double fraction) {
  return PlantedEvent{0, origin, target, start, duration, fraction};
}

ExtractionResult run(const Recording& rec, const ExtractionConfig& cfg = {}) {
  return extract_all({rec}, cfg);
}

std::int64_t frames_off(std::int64_t a, std::int64_t b) { return a > b ? a - b : b - a; }

// Reflect the road about y = 0: left and right swap, so every lane rank r
// becomes L + 1 - r and every direction flips, while frames are unchanged.
Recording mirrored(Recording rec) {
  for (auto& m : rec.meta.upper_lane_markings) m = -m;
  for (auto& m : rec.meta.lower_lane_markings) m = -m;
  rec.lanes = lane_layout(rec.meta);
  for (auto& tr : rec.tracks) {
    for (auto& p : tr.points) {
      p.y = -p.y - tr.height;
      p.y_velocity = -p.y_velocity;
    }
  }
  return rec;
}

Recording time_shifted(Recording rec, std::int64_t shift) {
  for (auto& tr : rec.tracks) {
    for (auto& p : tr.points) p.frame += shift;
  }
  return rec;
}

Recording cropped(Recording rec, std::size_t drop_front, std::size_t drop_back) {
  for (auto& tr : rec.tracks) {
    tr.points.erase(tr.points.end() - static_cast<std::ptrdiff_t>(drop_back), tr.points.end());
    tr.points.erase(tr.points.begin(), tr.points.begin() + static_cast<std::ptrdiff_t>(drop_front));
  }
  return rec;
}

}  // namespace

TEST(Crossings, ConstantLaneHasNone) {
  const auto out = generate_recording(single(DrivingDirection::Lower, 2, {}));
  EXPECT_TRUE(detect_crossings(out.recording.tracks[0]).empty());
}

TEST(Crossings, SingleLeftChange) {
  const auto out = generate_recording(single(DrivingDirection::Lower, 2, {ev(2, 3, 3, 6, 0.5)}));
  const auto c = detect_crossings(out.recording.tracks[0]);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].cross_frame, out.truth.events[0].cross_frame);
  EXPECT_FALSE(c[0].censored);
  const auto r = run(out.recording);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].direction, LaneChangeDirection::Left);
  EXPECT_EQ(r.events[0].origin_lane, 2);
  EXPECT_EQ(r.events[0].target_lane, 3);
}

TEST(Crossings, DoubleEventWithSettledGapGivesTwo) {
  const auto out = generate_recording(
      single(DrivingDirection::Upper, 1, {ev(1, 2, 3, 6, 0.45), ev(2, 3, 14, 6, 0.45)}));
  EXPECT_EQ(detect_crossings(out.recording.tracks[0]).size(), 2u);
  const auto r = run(out.recording);
  ASSERT_EQ(r.events.size(), 2u);
  EXPECT_TRUE(r.rejections.empty());
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(r.events[i].start_frame, out.truth.events[i].start_frame);
    EXPECT_EQ(r.events[i].end_frame, out.truth.events[i].end_frame);
  }
}

TEST(Crossings, FlickerCollapsesToNetChange) {
  Trajectory tr;
  for (int k = 0; k < 20; ++k) {
    TrackPoint p;
    p.frame = k;
    p.lane_id = k < 8 ? 2 : 3;
    tr.points.push_back(p);
  }
  tr.points[9].lane_id = 2;   // 2 3 2 3: net one crossing at frame 8
  tr.points[15].lane_id = 2;  // 3 2 3: touches and returns
  EXPECT_EQ(detect_crossings(tr).size(), 5u);
  const auto merged = detect_crossings(tr, 10);
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged[0].cross_frame, 8);
  EXPECT_EQ(merged[0].origin_lane_id, 2);
  EXPECT_EQ(merged[0].target_lane_id, 3);
}

TEST(Extract, BoundariesMatchPlantedProfile) {
  const auto out = generate_recording(single(DrivingDirection::Lower, 3, {ev(3, 2, 4, 6, 0.4)}));
  const auto r = run(out.recording);
  ASSERT_EQ(r.events.size(), 1u);
  const auto& e = r.events[0];
  EXPECT_NEAR(e.duration_s, 6.0, 0.08);
  EXPECT_NEAR(e.t1_s, 2.4, 0.08);
  EXPECT_NEAR(e.t2_s, 3.6, 0.08);
  EXPECT_EQ(e.cross_frame, out.truth.events[0].cross_frame);
  EXPECT_EQ(e.direction, LaneChangeDirection::Right);
}

TEST(Extract, SymmetricProfileSplitsEvenly) {
  const auto out = generate_recording(single(DrivingDirection::Upper, 1, {ev(1, 2, 4, 7.2, 0.5)}));
  const auto e = run(out.recording).events.at(0);
  EXPECT_LE(std::abs(e.t1_s - e.t2_s), 0.04 + 1e-9);
}

TEST(Extract, StagesAddUpExactly) {
  const auto out = generate_recording(random_config(31, 60, 60));
  for (const auto& e : run(out.recording).events) {
    EXPECT_EQ(e.end_frame - e.start_frame, (e.cross_frame - e.start_frame) + (e.end_frame - e.cross_frame));
    EXPECT_DOUBLE_EQ(e.t1_s + e.t2_s, e.duration_s);
    EXPECT_LT(e.start_frame, e.cross_frame);
    EXPECT_LT(e.cross_frame, e.end_frame);
  }
}

TEST(Extract, RoundTripRecoversEveryPlantedEvent) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto out = generate_recording(random_config(seed, 20, 12));
    const auto r = run(out.recording);
    ASSERT_EQ(r.events.size(), out.truth.events.size()) << "seed " << seed;
    EXPECT_TRUE(r.rejections.empty());
    for (std::size_t i = 0; i < r.events.size(); ++i) {
      const auto& e = r.events[i];
      const auto& g = out.truth.events[i];
      EXPECT_EQ(e.track_id, g.track_id);
      EXPECT_EQ(e.direction, g.direction);
      EXPECT_EQ(e.origin_lane, g.origin_lane);
      EXPECT_EQ(e.target_lane, g.target_lane);
      EXPECT_LE(frames_off(e.start_frame, g.start_frame), 2);
      EXPECT_LE(frames_off(e.end_frame, g.end_frame), 2);
      EXPECT_EQ(e.cross_frame, g.cross_frame);
    }
  }
}

TEST(Extract, MirrorWorldSwapsLeftAndRight) {
  const auto out = generate_recording(random_config(12, 30, 24));
  const auto a = run(out.recording);
  const auto b = run(mirrored(out.recording));
  ASSERT_EQ(a.events.size(), b.events.size());
  ASSERT_FALSE(a.events.empty());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    const auto& x = a.events[i];
    const auto& y = b.events[i];
    EXPECT_EQ(y.start_frame, x.start_frame);
    EXPECT_EQ(y.cross_frame, x.cross_frame);
    EXPECT_EQ(y.end_frame, x.end_frame);
    EXPECT_NE(y.direction, x.direction);
    EXPECT_EQ(y.origin_lane, 4 - x.origin_lane);
    EXPECT_EQ(y.target_lane, 4 - x.target_lane);
  }
}

TEST(Extract, TimeShiftMovesFramesOnly) {
  const auto out = generate_recording(random_config(13, 16, 10));
  const auto a = run(out.recording);
  const auto b = run(time_shifted(out.recording, 12345));
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    EXPECT_EQ(b.events[i].start_frame, a.events[i].start_frame + 12345);
    EXPECT_EQ(b.events[i].end_frame, a.events[i].end_frame + 12345);
    EXPECT_EQ(b.events[i].duration_s, a.events[i].duration_s);
    EXPECT_EQ(b.events[i].nav_speed_mps, a.events[i].nav_speed_mps);
  }
}

TEST(Extract, SweepWithoutSettlingRejectsBoth) {
  const auto out = generate_recording(
      single(DrivingDirection::Lower, 1, {ev(1, 2, 3, 6, 0.5), ev(2, 3, 9, 6, 0.5)}));
  const auto r = run(out.recording);
  EXPECT_TRUE(r.events.empty());
  ASSERT_EQ(r.rejections.size(), 2u);
  for (const auto& rej : r.rejections) EXPECT_EQ(rej.reason, RejectionReason::OverlapsAdjacentCrossing);
}

TEST(Extract, ManeuverCutByTrackStartIsCensored) {
  const auto out = generate_recording(single(DrivingDirection::Lower, 1, {ev(1, 2, 3, 6, 0.5)}));
  // Keep only the frames from one second into the maneuver.
  const auto r = run(cropped(out.recording, 100, 0));
  EXPECT_TRUE(r.events.empty());
  ASSERT_EQ(r.rejections.size(), 1u);
  EXPECT_EQ(r.rejections[0].reason, RejectionReason::BoundaryCensored);
}

TEST(Extract, CensoredOnlyDatasetYieldsNoEvents) {
  // Every track ends one frame after its crossing.
  auto out = generate_recording(random_config(4, 10, 10));
  for (auto& tr : out.recording.tracks) {
    for (std::size_t i = 1; i < tr.points.size(); ++i) {
      if (tr.points[i].lane_id != tr.points[i - 1].lane_id) {
        tr.points.resize(i + 1);
        break;
      }
    }
  }
  const auto r = run(out.recording);
  EXPECT_TRUE(r.events.empty());
  ASSERT_EQ(r.rejections.size(), 10u);
  for (const auto& rej : r.rejections) EXPECT_EQ(rej.reason, RejectionReason::BoundaryCensored);
}

TEST(Extract, ShortSearchWindowIsExhausted) {
  const auto out = generate_recording(single(DrivingDirection::Lower, 1, {ev(1, 2, 3, 12, 0.5)}));
  ExtractionConfig cfg;
  cfg.max_search_window = 2.0;
  const auto r = run(out.recording, cfg);
  EXPECT_TRUE(r.events.empty());
  ASSERT_EQ(r.rejections.size(), 1u);
  EXPECT_EQ(r.rejections[0].reason, RejectionReason::SearchWindowExhausted);
}

TEST(Extract, LaneJumpIsNotAnEvent) {
  auto out = generate_recording(single(DrivingDirection::Lower, 1, {}));
  auto& pts = out.recording.tracks[0].points;
  const int rank3 = [&] {
    for (const auto& l : out.recording.lanes) {
      if (l.direction == DrivingDirection::Lower && l.rank == 3) return l.lane_id;
    }
    return 0;
  }();
  for (std::size_t k = 300; k < pts.size(); ++k) pts[k].lane_id = rank3;
  const auto r = run(out.recording);
  ASSERT_EQ(r.rejections.size(), 1u);
  EXPECT_EQ(r.rejections[0].reason, RejectionReason::NonAdjacentLanes);

  for (std::size_t k = 300; k < pts.size(); ++k) pts[k].lane_id = 42;
  EXPECT_EQ(run(out.recording).rejections.at(0).reason, RejectionReason::UnknownLane);
}

TEST(Extract, NavSpeedDefinitions) {
  const auto out =
      generate_recording(single(DrivingDirection::Upper, 2, {ev(2, 3, 3, 6, 0.5)}, 750, 27.5));
  ExtractionConfig at_start;
  at_start.nav_speed = NavSpeedDefinition::AtStart;
  EXPECT_NEAR(run(out.recording).events.at(0).nav_speed_mps, 27.5, 1e-9);
  EXPECT_NEAR(run(out.recording, at_start).events.at(0).nav_speed_mps, 27.5, 1e-9);
}

TEST(Extract, InvalidConfigIsRejected) {
  ExtractionConfig cfg;
  cfg.lateral_velocity_threshold = 0.0;
  EXPECT_THROW(validate(cfg), Error);
  cfg = {};
  cfg.smoothing_half_window = 0;
  EXPECT_THROW(validate(cfg), Error);
  cfg = {};
  cfg.settle_window = -1;
  EXPECT_THROW(validate(cfg), Error);
}

TEST(EventsCsv, RoundTripAtPrintedPrecision) {
  const auto events = run(generate_recording(random_config(6, 12, 12)).recording).events;
  const auto text = events_csv(events);
  const auto back = parse_events_csv(text, "mem");
  ASSERT_EQ(back.size(), events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_EQ(back[i].start_frame, events[i].start_frame);
    EXPECT_EQ(back[i].direction, events[i].direction);
    EXPECT_NEAR(back[i].duration_s, events[i].duration_s, 5e-4);
    EXPECT_NEAR(back[i].nav_speed_mps, events[i].nav_speed_mps, 5e-4);
  }
  EXPECT_EQ(events_csv(back), text);
}

TEST(EventsCsv, MalformedInputNamesTheLine) {
  const std::string header =
      "recording_id,track_id,vehicle_class,direction,origin_lane,target_lane,start_frame,"
      "cross_frame,end_frame,duration_s,t1_s,t2_s,nav_speed_mps\n";
  try {
    parse_events_csv(header + "1,2,car,left,1,2,0,10,20,0.8,0.4,0.4,30\n1,2,bus,left,1,2,0,10,20,0.8,0.4,0.4,30\n",
                     "events.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRow);
    EXPECT_NE(std::string(e.what()).find("events.csv:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_events_csv("", "empty.csv"), Error);
  EXPECT_TRUE(parse_events_csv(header, "h").empty());
}

TEST(RejectionsCsv, OneLinePerRejection) {
  std::vector<Rejection> r = {{1, 2, 300, RejectionReason::BoundaryCensored},
                              {1, 5, 20, RejectionReason::OverlapsAdjacentCrossing}};
  EXPECT_EQ(rejections_csv(r), "1,2,300,boundary_censored\n1,5,20,overlaps_adjacent_crossing\n");
}
