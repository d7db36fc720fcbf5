#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "lcdur/lcdur.h"
#include "test_util.hpp"

using testutil::TempDir;

namespace {

struct Owned {
  char* p = nullptr;
  ~Owned() { lcdur_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

}  // namespace

TEST(CApi, StatusNamesAndVersion) {
  EXPECT_STREQ(lcdur_status_name(LCDUR_OK), "ok");
  EXPECT_STREQ(lcdur_status_name(LCDUR_DEGENERATE_SAMPLE), "degenerate_sample");
  EXPECT_STREQ(lcdur_status_name(LCDUR_IO), "io");
  EXPECT_STREQ(lcdur_status_name(static_cast<lcdur_status>(1234)), "unknown");
  EXPECT_GT(std::strlen(lcdur_version()), 0u);
}

TEST(CApi, NullArgumentsAreRejected) {
  EXPECT_EQ(lcdur_dataset_create(nullptr), LCDUR_INVALID_ARGUMENT);
  EXPECT_EQ(lcdur_events_parse_csv(nullptr, nullptr), LCDUR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(lcdur_last_error()), "");
  lcdur_model m{};
  EXPECT_EQ(lcdur_lognormal_fit(nullptr, 3, &m), LCDUR_INVALID_ARGUMENT);
  EXPECT_EQ(lcdur_models_count(nullptr), 0u);
  lcdur_dataset_free(nullptr);
  lcdur_events_free(nullptr);
  lcdur_models_free(nullptr);
  lcdur_string_free(nullptr);
}

TEST(CApi, ErrorsMapToStatusCodes) {
  const double same[] = {7.4, 7.4, 7.4};
  lcdur_model m{};
  EXPECT_EQ(lcdur_lognormal_fit(same, 3, &m), LCDUR_DEGENERATE_SAMPLE);
  EXPECT_NE(std::string(lcdur_last_error()).find("equal"), std::string::npos) << lcdur_last_error();
  const double neg[] = {1.0, -1.0};
  EXPECT_EQ(lcdur_lognormal_fit(neg, 2, &m), LCDUR_NON_POSITIVE_DURATION);

  const double pts[] = {std::exp(1.0), std::exp(3.0)};
  ASSERT_EQ(lcdur_lognormal_fit(pts, 2, &m), LCDUR_OK);
  double q = 0;
  EXPECT_EQ(lcdur_lognormal_quantile(&m, 1.5, &q), LCDUR_DOMAIN_ERROR);
  m.sigma = 0.0;
  EXPECT_EQ(lcdur_lognormal_cdf(&m, 2.0, &q), LCDUR_INVALID_ARGUMENT);

  const double a[] = {1.0};
  lcdur_mwu_result r{};
  EXPECT_EQ(lcdur_mwu_test(a, 1, nullptr, 0, LCDUR_TEST_AUTO, &r), LCDUR_EMPTY_SAMPLE);
}

TEST(CApi, LognormalRoundTrip) {
  const double pts[] = {std::exp(1.0), std::exp(3.0)};
  lcdur_model m{};
  ASSERT_EQ(lcdur_lognormal_fit(pts, 2, &m), LCDUR_OK);
  EXPECT_NEAR(m.mu, 2.0, 1e-12);
  EXPECT_NEAR(m.sigma, 1.0, 1e-12);
  double x = 0, p = 0;
  ASSERT_EQ(lcdur_lognormal_quantile(&m, 0.3, &x), LCDUR_OK);
  ASSERT_EQ(lcdur_lognormal_cdf(&m, x, &p), LCDUR_OK);
  EXPECT_NEAR(p, 0.3, 1e-12);
  std::vector<double> s1(100), s2(100);
  ASSERT_EQ(lcdur_lognormal_sample(&m, 100, 5, s1.data()), LCDUR_OK);
  ASSERT_EQ(lcdur_lognormal_sample(&m, 100, 5, s2.data()), LCDUR_OK);
  EXPECT_EQ(s1, s2);
}

TEST(CApi, MwuMatchesKnownSmallCase) {
  const double a[] = {1, 2}, b[] = {3, 4};
  lcdur_mwu_result r{};
  ASSERT_EQ(lcdur_mwu_test(a, 2, b, 2, LCDUR_TEST_EXACT, &r), LCDUR_OK);
  EXPECT_EQ(r.u_statistic, 0.0);
  EXPECT_NEAR(r.p_two_sided, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(r.exact, 1);
  EXPECT_EQ(r.has_z_value, 0);
  EXPECT_EQ(r.reject, 0);
}

TEST(CApi, FullPipelineThroughHandles) {
  TempDir dir;
  lcdur_synth_options so;
  lcdur_synth_options_default(&so);
  so.seed = 12;
  so.n_events = 16;
  ASSERT_EQ(lcdur_synth_generate(&so, dir.path().c_str()), LCDUR_OK) << lcdur_last_error();

  lcdur_dataset* ds = nullptr;
  ASSERT_EQ(lcdur_dataset_create(&ds), LCDUR_OK);
  std::size_t loaded = 0;
  ASSERT_EQ(lcdur_dataset_load_dir(ds, dir.path().c_str(), &loaded), LCDUR_OK) << lcdur_last_error();
  EXPECT_EQ(loaded, 1u);
  EXPECT_EQ(lcdur_dataset_recording_count(ds), 1u);
  Owned validation;
  ASSERT_EQ(lcdur_dataset_validation_json(ds, &validation.p), LCDUR_OK);
  EXPECT_NE(validation.str().find("\"track_count\": 32"), std::string::npos) << validation.str();

  lcdur_extract_config ec;
  lcdur_extract_config_default(&ec);
  EXPECT_EQ(ec.lateral_velocity_threshold, 0.1);
  lcdur_events* ev = nullptr;
  ASSERT_EQ(lcdur_extract(ds, &ec, &ev), LCDUR_OK) << lcdur_last_error();
  ASSERT_EQ(lcdur_events_count(ev), 16u);
  EXPECT_EQ(lcdur_events_rejection_count(ev), 0u);
  lcdur_event e{};
  ASSERT_EQ(lcdur_events_get(ev, 0, &e), LCDUR_OK);
  EXPECT_EQ(e.end_frame - e.start_frame, std::llround(e.duration_s * 25));
  EXPECT_EQ(lcdur_events_get(ev, 16, &e), LCDUR_INVALID_ARGUMENT);

  Owned csv;
  ASSERT_EQ(lcdur_events_to_csv(ev, &csv.p), LCDUR_OK);
  lcdur_events* back = nullptr;
  ASSERT_EQ(lcdur_events_parse_csv(csv.p, &back), LCDUR_OK);
  EXPECT_EQ(lcdur_events_count(back), 16u);
  lcdur_events_free(back);

  lcdur_analysis_config ac;
  lcdur_analysis_config_default(&ac);
  Owned summary;
  ASSERT_EQ(lcdur_report(ev, &ac, (dir / "out").c_str(), &summary.p), LCDUR_OK) << lcdur_last_error();
  EXPECT_NE(summary.str().find("\"event_count\": 16"), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir / "out/table_X.md"));

  lcdur_model_set* ms = nullptr;
  ASSERT_EQ(lcdur_fit(ev, &ms), LCDUR_OK) << lcdur_last_error();
  EXPECT_EQ(lcdur_models_count(ms), 4u);
  lcdur_model m{};
  ASSERT_EQ(lcdur_models_find(ms, LCDUR_TRUCK, LCDUR_RIGHT, &m), LCDUR_OK);
  EXPECT_EQ(m.vehicle_class, LCDUR_TRUCK);
  EXPECT_EQ(m.n, 4u);
  Owned json;
  ASSERT_EQ(lcdur_models_to_json(ms, &json.p), LCDUR_OK);
  lcdur_model_set* parsed = nullptr;
  ASSERT_EQ(lcdur_models_parse_json(json.p, &parsed), LCDUR_OK);
  lcdur_model m2{};
  ASSERT_EQ(lcdur_models_get(parsed, 3, &m2), LCDUR_OK);
  EXPECT_EQ(m2.mu, m.mu);
  EXPECT_EQ(m2.sigma, m.sigma);

  lcdur_models_free(parsed);
  lcdur_models_free(ms);
  lcdur_events_free(ev);
  lcdur_dataset_free(ds);
}

TEST(CApi, CustomBinsAreValidated) {
  lcdur_events* ev = nullptr;
  ASSERT_EQ(lcdur_events_parse_csv(
                "recording_id,track_id,vehicle_class,direction,origin_lane,target_lane,start_frame,"
                "cross_frame,end_frame,duration_s,t1_s,t2_s,nav_speed_mps\n"
                "1,1,car,left,1,2,0,60,150,6,2.4,3.6,27.5\n",
                &ev),
            LCDUR_OK)
      << lcdur_last_error();
  TempDir dir;
  lcdur_analysis_config ac;
  lcdur_analysis_config_default(&ac);
  const double bad[] = {10, 5};
  ac.car_bins = bad;
  ac.car_bin_count = 2;
  EXPECT_EQ(lcdur_analyze(ev, &ac, dir.path().c_str()), LCDUR_INVALID_ARGUMENT);
  const double good[] = {0, 25, 50};
  ac.car_bins = good;
  ac.car_bin_count = 3;
  EXPECT_EQ(lcdur_analyze(ev, &ac, dir.path().c_str()), LCDUR_OK) << lcdur_last_error();
  EXPECT_NE(testutil::slurp(dir / "table_V.csv").find("\"[25,50)\",1,0,1,100.00"), std::string::npos)
      << testutil::slurp(dir / "table_V.csv");
  lcdur_events_free(ev);
}

TEST(CApi, EmptyDatasetCannotBeExtracted) {
  lcdur_dataset* ds = nullptr;
  ASSERT_EQ(lcdur_dataset_create(&ds), LCDUR_OK);
  lcdur_events* ev = nullptr;
  EXPECT_EQ(lcdur_extract(ds, nullptr, &ev), LCDUR_MISSING_DATA);
  EXPECT_EQ(ev, nullptr);
  TempDir empty;
  std::size_t loaded = 7;
  EXPECT_EQ(lcdur_dataset_load_dir(ds, empty.path().c_str(), &loaded), LCDUR_MISSING_FILE);
  lcdur_dataset_free(ds);
}
