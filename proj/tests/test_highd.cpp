#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "lcdur/error.hpp"
#include "lcdur/highd.hpp"
#include "lcdur/synth.hpp"
#include "test_util.hpp"

using namespace lcdur;
using testutil::TempDir;
using testutil::write;

namespace {

const char* kRecordingMeta =
    "id,frameRate,locationId,speedLimit,month,weekDay,startTime,duration,totalDrivenDistance,"
    "totalDrivenTime,numVehicles,numCars,numTrucks,upperLaneMarkings,lowerLaneMarkings\n"
    "1,25,1,-1,09.2017,Wed,08:38,906.56,0,0,2,1,1,8.51;12.59;16.43,21.00;24.96;28.80\n";

const char* kTracksMeta =
    "id,width,height,initialFrame,finalFrame,numFrames,class,drivingDirection\n"
    "1,4.85,2.12,0,2,3,Car,2\n"
    "2,15.2,2.5,1,3,3,Truck,1\n";

const char* kTracks =
    "frame,id,x,y,xVelocity,yVelocity,laneId\n"
    "0,1,10.5,22.1,30.25,0.01,5\n"
    "1,1,11.71,22.1,30.25,0,5\n"
    "2,1,12.92,22.11,30.25,0.25,5\n"
    "1,2,300,9.5,-24,0,2\n"
    "2,2,299.04,9.5,-24,0,2\n"
    "3,2,298.08,9.5,-24,0,2\n";

RecordingPaths write_triple(const TempDir& dir, const std::string& tracks = kTracks,
                            const std::string& tracks_meta = kTracksMeta,
                            const std::string& recording_meta = kRecordingMeta) {
  const auto paths = recording_paths(dir.path(), 1);
  write(paths.tracks, tracks);
  write(paths.tracks_meta, tracks_meta);
  write(paths.recording_meta, recording_meta);
  return paths;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no lcdur::Error thrown";
  return ErrorCode::Io;
}

}  // namespace

TEST(HighdParse, HandcraftedFieldsAreReadVerbatim) {
  TempDir dir;
  const auto rec = parse_recording(write_triple(dir));

  ASSERT_EQ(rec.tracks.size(), 2u);
  const auto& car = rec.tracks[0];
  EXPECT_EQ(car.track_id, 1);
  EXPECT_EQ(car.vehicle_class, VehicleClass::Car);
  EXPECT_EQ(car.driving_direction, DrivingDirection::Lower);
  EXPECT_DOUBLE_EQ(car.width, 4.85);
  EXPECT_DOUBLE_EQ(car.height, 2.12);
  ASSERT_EQ(car.points.size(), 3u);
  EXPECT_EQ(car.points[1].frame, 1);
  EXPECT_DOUBLE_EQ(car.points[1].x, 11.71);
  EXPECT_DOUBLE_EQ(car.points[2].y, 22.11);
  EXPECT_DOUBLE_EQ(car.points[0].x_velocity, 30.25);
  EXPECT_DOUBLE_EQ(car.points[2].y_velocity, 0.25);
  EXPECT_EQ(car.points[0].lane_id, 5);

  EXPECT_EQ(rec.tracks[1].vehicle_class, VehicleClass::Truck);
  EXPECT_EQ(rec.tracks[1].driving_direction, DrivingDirection::Upper);
  EXPECT_EQ(rec.parse_report.rows_read, 6u);
  EXPECT_EQ(rec.parse_report.rows_skipped, 0u);
}

TEST(HighdParse, FrameRateGivesFrameStep) {
  TempDir dir;
  const auto rec = parse_recording(write_triple(dir));
  EXPECT_DOUBLE_EQ(rec.meta.frame_rate, 25.0);
  EXPECT_DOUBLE_EQ(rec.meta.frame_dt(), 0.04);
  EXPECT_FALSE(rec.meta.speed_limit.has_value());
}

TEST(HighdParse, LaneLayoutNumbersLanesFromTheRight) {
  TempDir dir;
  const auto rec = parse_recording(write_triple(dir));
  ASSERT_EQ(rec.lanes.size(), 4u);
  // Upper carriageway travels toward -x: its rightmost lane has the smallest y.
  EXPECT_EQ(rec.lane(2)->rank, 1);
  EXPECT_EQ(rec.lane(3)->rank, 2);
  // Lower carriageway ids start after a gap; its rightmost lane has the largest y.
  EXPECT_EQ(rec.lane(4), nullptr);
  EXPECT_EQ(rec.lane(5)->rank, 2);
  EXPECT_EQ(rec.lane(6)->rank, 1);
  EXPECT_DOUBLE_EQ(rec.lane(6)->lower_marking, 24.96);
  EXPECT_DOUBLE_EQ(rec.lane(6)->upper_marking, 28.80);
}

TEST(HighdParse, ClassNamesAreCaseInsensitive) {
  TempDir dir;
  std::string meta = kTracksMeta;
  meta.replace(meta.find("Car"), 3, "car");
  meta.replace(meta.find("Truck"), 5, "TRUCK");
  const auto rec = parse_recording(write_triple(dir, kTracks, meta));
  EXPECT_EQ(rec.tracks[0].vehicle_class, VehicleClass::Car);
  EXPECT_EQ(rec.tracks[1].vehicle_class, VehicleClass::Truck);
}

TEST(HighdParse, HeaderOnlyTracksFileIsMissingData) {
  TempDir dir;
  const auto paths = write_triple(dir, "frame,id,x,y,xVelocity,yVelocity,laneId\n");
  EXPECT_EQ(code_of([&] { parse_recording(paths); }), ErrorCode::MissingData);
}

TEST(HighdParse, MissingFileIsReported) {
  TempDir dir;
  auto paths = write_triple(dir);
  std::filesystem::remove(paths.tracks_meta);
  EXPECT_EQ(code_of([&] { parse_recording(paths); }), ErrorCode::MissingFile);
}

TEST(HighdParse, UnknownClassIsRejected) {
  TempDir dir;
  std::string meta = kTracksMeta;
  meta.replace(meta.find("Truck"), 5, "Bus");
  const auto paths = write_triple(dir, kTracks, meta);
  EXPECT_EQ(code_of([&] { parse_recording(paths); }), ErrorCode::UnknownVehicleClass);
}

TEST(HighdParse, TrackRowWithoutMetaIsUnknownTrack) {
  TempDir dir;
  const auto paths = write_triple(dir, std::string(kTracks) + "4,9,1,1,1,0,2\n");
  EXPECT_EQ(code_of([&] { parse_recording(paths); }), ErrorCode::UnknownTrack);
}

TEST(HighdParse, FrameGapIsInconsistent) {
  TempDir dir;
  std::string tracks = kTracks;
  tracks.replace(tracks.find("1,1,11.71"), 1, "7");
  const auto paths = write_triple(dir, tracks);
  EXPECT_EQ(code_of([&] { parse_recording(paths); }), ErrorCode::InconsistentFrameSequence);
}

TEST(HighdParse, WrongFieldCountIsMalformedWithLine) {
  TempDir dir;
  const auto paths = write_triple(dir, std::string(kTracks) + "4,1,1,1\n");
  try {
    parse_recording(paths);
    FAIL() << "expected MalformedRow";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRow);
    EXPECT_NE(std::string(e.what()).find(":8"), std::string::npos) << e.what();
  }
}

TEST(HighdParse, UnparseableValueDropsOnlyThatTrack) {
  TempDir dir;
  std::string tracks = kTracks;
  tracks.replace(tracks.find("299.04"), 6, "abc");
  const auto rec = parse_recording(write_triple(dir, tracks));
  ASSERT_EQ(rec.tracks.size(), 1u);
  EXPECT_EQ(rec.tracks[0].track_id, 1);
  ASSERT_EQ(rec.parse_report.rejected_tracks.size(), 1u);
  EXPECT_EQ(rec.parse_report.rejected_tracks[0].track_id, 2);
  EXPECT_EQ(rec.parse_report.rows_skipped, 3u);
}

TEST(HighdParse, LaneOfTheOtherCarriagewayDropsTheTrack) {
  TempDir dir;
  std::string tracks = kTracks;
  tracks.replace(tracks.find("0.25,5"), 6, "0.25,2");
  const auto rec = parse_recording(write_triple(dir, tracks));
  ASSERT_EQ(rec.parse_report.rejected_tracks.size(), 1u);
  EXPECT_EQ(rec.parse_report.rejected_tracks[0].track_id, 1);
}

TEST(HighdParse, RowOrderDoesNotMatter) {
  TempDir a, b;
  std::vector<std::string> lines;
  std::string body = std::string(kTracks);
  const auto header_end = body.find('\n') + 1;
  std::istringstream ss(body.substr(header_end));
  for (std::string line; std::getline(ss, line);) lines.push_back(line);
  std::mt19937 gen(5);
  std::shuffle(lines.begin(), lines.end(), gen);
  std::string shuffled = body.substr(0, header_end);
  for (const auto& l : lines) shuffled += l + "\n";
  const auto r1 = parse_recording(write_triple(a));
  const auto r2 = parse_recording(write_triple(b, shuffled));
  EXPECT_EQ(r1.tracks, r2.tracks);
}

TEST(HighdWrite, RoundTripPreservesEveryModelledField) {
  TempDir dir;
  auto cfg = random_config(11, 12, 6);
  cfg.noise_std = 0.03;
  const auto rec = generate_recording(cfg).recording;
  const auto paths = recording_paths(dir.path(), rec.meta.recording_id);
  write_recording(rec, paths);
  const auto back = parse_recording(paths);
  EXPECT_EQ(back.meta, rec.meta);
  EXPECT_EQ(back.tracks, rec.tracks);
}

TEST(HighdDiscover, FindsCompleteTriplesInNameOrder) {
  TempDir dir;
  const auto rec = generate_recording(random_config(1, 3, 0)).recording;
  auto r2 = rec;
  r2.meta.recording_id = 2;
  write_recording(r2, recording_paths(dir.path(), 2));
  write_recording(rec, recording_paths(dir.path(), 1));
  write(dir / "03_tracks.csv", "frame\n");  // incomplete triple
  const auto found = discover_recordings(dir.path());
  ASSERT_EQ(found.size(), 2u);
  EXPECT_EQ(found[0].tracks.filename(), "01_tracks.csv");
  EXPECT_EQ(found[1].recording_meta.filename(), "02_recordingMeta.csv");
}

TEST(HighdValidate, CountsClassesAndBoundaryTracks) {
  TempDir dir;
  const auto report = validate_dataset(parse_recording(write_triple(dir)));
  EXPECT_EQ(report.class_counts.at("car"), 1u);
  EXPECT_EQ(report.class_counts.at("truck"), 1u);
  EXPECT_EQ(report.lane_occupancy.at(5), 3u);
  EXPECT_EQ(report.lane_occupancy.at(2), 3u);
  // Track 1 starts at the first recorded frame, track 2 ends at the last.
  EXPECT_EQ(report.boundary_censored, (std::vector<int>{1, 2}));
}

TEST(HighdValidate, InteriorTrackIsNotCensored) {
  TempDir dir;
  const std::string meta = std::string(kTracksMeta) + "3,4,2,1,2,2,Car,2\n";
  const std::string tracks = std::string(kTracks) + "1,3,5,22,30,0,5\n2,3,6.2,22,30,0,5\n";
  const auto report = validate_dataset(parse_recording(write_triple(dir, tracks, meta)));
  EXPECT_EQ(report.boundary_censored, (std::vector<int>{1, 2}));
  EXPECT_EQ(report.track_count, 3u);
}

TEST(HighdValidate, SynthCountsMatchGroundTruth) {
  const auto out = generate_recording(random_config(21, 50, 20, 0.3));
  const auto report = validate_dataset(out.recording);
  EXPECT_EQ(report.class_counts, out.truth.class_counts);
  EXPECT_EQ(report.track_count, 50u);
}

TEST(HighdValidate, JsonCarriesFrameStep) {
  TempDir dir;
  const auto json = validation_report_json({validate_dataset(parse_recording(write_triple(dir)))});
  EXPECT_NE(json.find("\"frame_dt\": 0.04"), std::string::npos) << json;
  EXPECT_NE(json.find("\"boundary_censored\""), std::string::npos);
}
