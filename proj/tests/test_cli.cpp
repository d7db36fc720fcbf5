#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <string>

#include "json.hpp"
#include "test_util.hpp"

using testutil::TempDir;

namespace {

struct Run {
  int exit_code = -1;
  std::string out;
  std::string err;
};

Run cli(const std::string& args) {
  TempDir scratch;
  const auto err_file = scratch / "stderr.txt";
  const std::string cmd = std::string("'") + LCDUR_CLI_PATH + "' " + args + " 2>'" + err_file.string() + "'";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = testutil::slurp(err_file);
  return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

// The last stderr line, which carries the error record on failure.
nlohmann::json error_record(const Run& r) {
  auto text = r.err;
  while (!text.empty() && text.back() == '\n') text.pop_back();
  return nlohmann::json::parse(text.substr(text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1));
}

}  // namespace

TEST(Cli, SynthExtractReport) {
  TempDir d;
  ASSERT_EQ(cli("synth --seed 7 --events 10 --out " + q(d.path())).exit_code, 0);
  ASSERT_TRUE(std::filesystem::exists(d / "ground_truth.json"));
  const auto ex = cli("extract --input-dir " + q(d.path()) + " --out " + q(d.path()));
  ASSERT_EQ(ex.exit_code, 0) << ex.err;
  const auto rep = cli("report --out " + q(d.path()) + " --stdout");
  ASSERT_EQ(rep.exit_code, 0) << rep.err;
  const auto s = nlohmann::json::parse(rep.out);
  EXPECT_EQ(s["event_count"], 10);
  EXPECT_EQ(s["t1_plus_t2_equals_duration"], true);
  EXPECT_TRUE(std::filesystem::exists(d / "summary.json"));
  EXPECT_TRUE(std::filesystem::exists(d / "cdf_truck_right.csv"));

  const auto truth = nlohmann::json::parse(testutil::slurp(d / "ground_truth.json"));
  EXPECT_EQ(truth["events"].size(), 10u);
}

TEST(Cli, ExplicitTripleAndIngest) {
  TempDir d;
  ASSERT_EQ(cli("synth --seed 3 --events 4 --recording-id 5 --out " + q(d.path())).exit_code, 0);
  const auto r = cli("ingest --tracks " + q(d / "05_tracks.csv") + " --tracks-meta " +
                     q(d / "05_tracksMeta.csv") + " --recording-meta " + q(d / "05_recordingMeta.csv") +
                     " --stdout");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto v = nlohmann::json::parse(r.out);
  EXPECT_EQ(v[0]["recording_id"], 5);
  EXPECT_EQ(v[0]["track_count"], 8);
}

TEST(Cli, FitThenSample) {
  TempDir d;
  ASSERT_EQ(cli("synth --seed 11 --events 20 --out " + q(d.path())).exit_code, 0);
  ASSERT_EQ(cli("extract --input-dir " + q(d.path()) + " --out " + q(d.path())).exit_code, 0);
  const auto fit = cli("fit --out " + q(d.path()));
  ASSERT_EQ(fit.exit_code, 0) << fit.err;
  const auto a = cli("sample --out " + q(d.path()) + " --class truck --direction right -n 5 --seed 1 --stdout");
  const auto b = cli("sample --out " + q(d.path()) + " --class truck --direction right -n 5 --seed 1 --stdout");
  ASSERT_EQ(a.exit_code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 6);
}

TEST(Cli, HeaderOnlyEventsIsAnErrorNamingThePath) {
  TempDir d;
  testutil::write(d / "events.csv",
                  "recording_id,track_id,vehicle_class,direction,origin_lane,target_lane,start_frame,"
                  "cross_frame,end_frame,duration_s,t1_s,t2_s,nav_speed_mps\n");
  const auto r = cli("report --out " + q(d.path()));
  EXPECT_EQ(r.exit_code, 1);
  const auto e = error_record(r);
  EXPECT_EQ(e["command"], "report");
  EXPECT_EQ(e["error"], "missing_data");
  EXPECT_NE(e["message"].get<std::string>().find((d / "events.csv").string()), std::string::npos);
}

TEST(Cli, EmptyEventsFileIsAnError) {
  TempDir d;
  testutil::write(d / "events.csv", "");
  const auto r = cli("analyze --out " + q(d.path()));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(error_record(r)["command"], "analyze");
}

TEST(Cli, MissingUpstreamArtifact) {
  TempDir d;
  const auto r = cli("report --out " + q(d.path()));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(error_record(r)["error"], "missing_upstream_artifact");
  const auto s = cli("extract --out " + q(d.path()));
  EXPECT_EQ(error_record(s)["error"], "missing_upstream_artifact");
}

TEST(Cli, BadFlagsExitWithTwo) {
  const auto r = cli("report --test-mode sometimes");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(error_record(r)["error"], "bad_flags");
  EXPECT_EQ(cli("frobnicate").exit_code, 2);
  const auto bins = cli("report --bins 0,abc");
  EXPECT_EQ(bins.exit_code, 2);
  EXPECT_EQ(error_record(bins)["error"], "bad_flags");
}

TEST(Cli, SameInputsGiveSameBytes) {
  TempDir a, b;
  for (const auto* d : {&a, &b}) {
    ASSERT_EQ(cli("synth --seed 21 --events 12 --noise 0.01 --out " + q(d->path())).exit_code, 0);
    ASSERT_EQ(cli("extract --input-dir " + q(d->path()) + " --out " + q(d->path())).exit_code, 0);
    ASSERT_EQ(cli("report --out " + q(d->path())).exit_code, 0);
  }
  for (const char* name : {"events.csv", "rejections.csv", "summary.json", "table_VII.csv", "models.json"}) {
    EXPECT_EQ(testutil::slurp(a / name), testutil::slurp(b / name)) << name;
  }
}
