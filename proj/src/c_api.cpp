#include "lcdur/lcdur.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include "lcdur/analysis.hpp"
#include "lcdur/error.hpp"
#include "lcdur/extract.hpp"
#include "lcdur/highd.hpp"
#include "lcdur/lognormal.hpp"
#include "lcdur/stats.hpp"
#include "lcdur/synth.hpp"

struct lcdur_dataset {
  std::vector<lcdur::Recording> recordings;
};

struct lcdur_events {
  std::vector<lcdur::LaneChangeEvent> events;
  std::vector<lcdur::Rejection> rejections;
};

struct lcdur_model_set {
  std::vector<lcdur::LogNormalModel> models;
};

namespace {

thread_local std::string g_last_error;

lcdur_status to_status(lcdur::ErrorCode code) {
  // The enumerators are declared in the same order, starting at 1.
  return static_cast<lcdur_status>(static_cast<int>(code) + 1);
}

lcdur_status fail(lcdur_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
lcdur_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return LCDUR_OK;
  } catch (const lcdur::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(LCDUR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LCDUR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw lcdur::Error(lcdur::ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

lcdur::LogNormalModel from_c(const lcdur_model& m) {
  lcdur::LogNormalModel out;
  out.vehicle_class = m.vehicle_class == LCDUR_TRUCK ? lcdur::VehicleClass::Truck : lcdur::VehicleClass::Car;
  out.direction = m.direction == LCDUR_RIGHT ? lcdur::LaneChangeDirection::Right : lcdur::LaneChangeDirection::Left;
  out.mu = m.mu;
  out.sigma = m.sigma;
  out.n = m.n;
  out.log_likelihood = m.log_likelihood;
  return out;
}

lcdur_model to_c(const lcdur::LogNormalModel& m) {
  lcdur_model out{};
  out.vehicle_class = m.vehicle_class == lcdur::VehicleClass::Truck ? LCDUR_TRUCK : LCDUR_CAR;
  out.direction = m.direction == lcdur::LaneChangeDirection::Right ? LCDUR_RIGHT : LCDUR_LEFT;
  out.mu = m.mu;
  out.sigma = m.sigma;
  out.n = m.n;
  out.log_likelihood = m.log_likelihood;
  return out;
}

lcdur::LogNormalModel checked_model(const lcdur_model* m) {
  require(m != nullptr, "model is NULL");
  require(m->sigma > 0.0, "model sigma must be positive");
  return from_c(*m);
}

lcdur::TestMode to_mode(lcdur_test_mode mode) {
  switch (mode) {
    case LCDUR_TEST_AUTO: return lcdur::TestMode::Auto;
    case LCDUR_TEST_EXACT: return lcdur::TestMode::Exact;
    case LCDUR_TEST_APPROX: return lcdur::TestMode::Approx;
  }
  throw lcdur::Error(lcdur::ErrorCode::InvalidArgument, "unknown test mode");
}

lcdur::AnalysisConfig to_analysis_config(const lcdur_analysis_config* c) {
  lcdur::AnalysisConfig out;
  if (!c) return out;
  if (c->car_bins) out.bins.car.assign(c->car_bins, c->car_bins + c->car_bin_count);
  if (c->truck_bins) out.bins.truck.assign(c->truck_bins, c->truck_bins + c->truck_bin_count);
  out.test_mode = to_mode(c->test_mode);
  return out;
}

}  // namespace

extern "C" {

const char* lcdur_version(void) { return "1.0.0"; }

const char* lcdur_status_name(lcdur_status status) {
  switch (status) {
    case LCDUR_OK: return "ok";
    case LCDUR_INVALID_ARGUMENT: return "invalid_argument";
    case LCDUR_MISSING_FILE: return "missing_file";
    case LCDUR_MALFORMED_ROW: return "malformed_row";
    case LCDUR_UNKNOWN_VEHICLE_CLASS: return "unknown_vehicle_class";
    case LCDUR_INCONSISTENT_FRAME_SEQUENCE: return "inconsistent_frame_sequence";
    case LCDUR_UNKNOWN_TRACK: return "unknown_track";
    case LCDUR_MISSING_DATA: return "missing_data";
    case LCDUR_EMPTY_SAMPLE: return "empty_sample";
    case LCDUR_EXACT_MODE_TOO_LARGE: return "exact_mode_too_large";
    case LCDUR_DEGENERATE_SAMPLE: return "degenerate_sample";
    case LCDUR_NON_POSITIVE_DURATION: return "non_positive_duration";
    case LCDUR_DOMAIN_ERROR: return "domain_error";
    case LCDUR_OVERLAPPING_EVENTS: return "overlapping_events";
    case LCDUR_EVENT_OUTSIDE_RECORDING: return "event_outside_recording";
    case LCDUR_INCONSISTENT_EVENT_CHAIN: return "inconsistent_event_chain";
    case LCDUR_MISSING_GROUP: return "missing_group";
    case LCDUR_IO: return "io";
    case LCDUR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* lcdur_last_error(void) { return g_last_error.c_str(); }

void lcdur_string_free(char* s) { std::free(s); }

lcdur_status lcdur_dataset_create(lcdur_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = new lcdur_dataset();
  });
}

void lcdur_dataset_free(lcdur_dataset* dataset) { delete dataset; }

lcdur_status lcdur_dataset_load(lcdur_dataset* dataset, const char* tracks_csv,
                                const char* tracks_meta_csv, const char* recording_meta_csv) {
  return guarded([&] {
    require(dataset && tracks_csv && tracks_meta_csv && recording_meta_csv, "NULL argument");
    dataset->recordings.push_back(
        lcdur::parse_recording({tracks_csv, tracks_meta_csv, recording_meta_csv}));
  });
}

lcdur_status lcdur_dataset_load_dir(lcdur_dataset* dataset, const char* dir, size_t* loaded) {
  return guarded([&] {
    require(dataset && dir, "NULL argument");
    const auto found = lcdur::discover_recordings(dir);
    if (found.empty()) {
      throw lcdur::Error(lcdur::ErrorCode::MissingFile,
                         std::string("no recording triple found in ") + dir);
    }
    std::vector<lcdur::Recording> parsed;
    for (const auto& p : found) parsed.push_back(lcdur::parse_recording(p));
    for (auto& r : parsed) dataset->recordings.push_back(std::move(r));
    if (loaded) *loaded = found.size();
  });
}

size_t lcdur_dataset_recording_count(const lcdur_dataset* dataset) {
  return dataset ? dataset->recordings.size() : 0;
}

lcdur_status lcdur_dataset_validation_json(const lcdur_dataset* dataset, char** out_json) {
  return guarded([&] {
    require(dataset && out_json, "NULL argument");
    std::vector<lcdur::ValidationReport> reports;
    for (const auto& r : dataset->recordings) reports.push_back(lcdur::validate_dataset(r));
    *out_json = dup_string(lcdur::validation_report_json(reports));
  });
}

void lcdur_extract_config_default(lcdur_extract_config* config) {
  if (!config) return;
  const lcdur::ExtractionConfig d;
  config->lateral_velocity_threshold = d.lateral_velocity_threshold;
  config->smoothing_half_window = d.smoothing_half_window;
  config->max_search_window_s = d.max_search_window;
  config->settle_window_s = d.settle_window;
  config->lane_debounce_s = d.lane_debounce;
  config->nav_speed = LCDUR_NAV_SPEED_MEAN;
}

lcdur_status lcdur_extract(const lcdur_dataset* dataset, const lcdur_extract_config* config,
                           lcdur_events** out) {
  return guarded([&] {
    require(dataset && out, "NULL argument");
    if (dataset->recordings.empty()) {
      throw lcdur::Error(lcdur::ErrorCode::MissingData, "extract: no recordings loaded");
    }
    lcdur::ExtractionConfig c;
    if (config) {
      c.lateral_velocity_threshold = config->lateral_velocity_threshold;
      c.smoothing_half_window = config->smoothing_half_window;
      c.max_search_window = config->max_search_window_s;
      c.settle_window = config->settle_window_s;
      c.lane_debounce = config->lane_debounce_s;
      c.nav_speed = config->nav_speed == LCDUR_NAV_SPEED_AT_START ? lcdur::NavSpeedDefinition::AtStart
                                                                   : lcdur::NavSpeedDefinition::MeanOverEvent;
    }
    auto result = lcdur::extract_all(dataset->recordings, c);
    *out = new lcdur_events{std::move(result.events), std::move(result.rejections)};
  });
}

lcdur_status lcdur_events_read_csv(const char* path, lcdur_events** out) {
  return guarded([&] {
    require(path && out, "NULL argument");
    *out = new lcdur_events{lcdur::read_events_csv(path), {}};
  });
}

lcdur_status lcdur_events_parse_csv(const char* content, lcdur_events** out) {
  return guarded([&] {
    require(content && out, "NULL argument");
    *out = new lcdur_events{lcdur::parse_events_csv(content, "<memory>"), {}};
  });
}

void lcdur_events_free(lcdur_events* events) { delete events; }

size_t lcdur_events_count(const lcdur_events* events) { return events ? events->events.size() : 0; }

size_t lcdur_events_rejection_count(const lcdur_events* events) {
  return events ? events->rejections.size() : 0;
}

lcdur_status lcdur_events_get(const lcdur_events* events, size_t index, lcdur_event* out) {
  return guarded([&] {
    require(events && out, "NULL argument");
    require(index < events->events.size(), "event index out of range");
    const auto& e = events->events[index];
    out->recording_id = e.recording_id;
    out->track_id = e.track_id;
    out->vehicle_class = e.vehicle_class == lcdur::VehicleClass::Truck ? LCDUR_TRUCK : LCDUR_CAR;
    out->direction = e.direction == lcdur::LaneChangeDirection::Right ? LCDUR_RIGHT : LCDUR_LEFT;
    out->origin_lane = e.origin_lane;
    out->target_lane = e.target_lane;
    out->start_frame = e.start_frame;
    out->cross_frame = e.cross_frame;
    out->end_frame = e.end_frame;
    out->duration_s = e.duration_s;
    out->t1_s = e.t1_s;
    out->t2_s = e.t2_s;
    out->nav_speed_mps = e.nav_speed_mps;
  });
}

lcdur_status lcdur_events_to_csv(const lcdur_events* events, char** out_csv) {
  return guarded([&] {
    require(events && out_csv, "NULL argument");
    *out_csv = dup_string(lcdur::events_csv(events->events));
  });
}

lcdur_status lcdur_events_rejections_csv(const lcdur_events* events, char** out_csv) {
  return guarded([&] {
    require(events && out_csv, "NULL argument");
    *out_csv = dup_string(lcdur::rejections_csv(events->rejections));
  });
}

void lcdur_analysis_config_default(lcdur_analysis_config* config) {
  if (!config) return;
  *config = lcdur_analysis_config{nullptr, 0, nullptr, 0, LCDUR_TEST_AUTO};
}

lcdur_status lcdur_analyze(const lcdur_events* events, const lcdur_analysis_config* config,
                           const char* out_dir) {
  return guarded([&] {
    require(events && out_dir, "NULL argument");
    lcdur::write_analysis(lcdur::analyze(events->events, to_analysis_config(config)), out_dir);
  });
}

lcdur_status lcdur_report(const lcdur_events* events, const lcdur_analysis_config* config,
                          const char* out_dir, char** out_summary_json) {
  return guarded([&] {
    require(events && out_dir, "NULL argument");
    const auto report = lcdur::build_report(events->events, to_analysis_config(config));
    lcdur::write_report(report, out_dir);
    if (out_summary_json) *out_summary_json = dup_string(report.summary_json);
  });
}

lcdur_status lcdur_lognormal_fit(const double* durations, size_t n, lcdur_model* out) {
  return guarded([&] {
    require(out && (durations || n == 0), "NULL argument");
    *out = to_c(lcdur::fit_lognormal({durations, n}));
  });
}

lcdur_status lcdur_lognormal_pdf(const lcdur_model* model, double x, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = lcdur::lognormal_pdf(checked_model(model), x);
  });
}

lcdur_status lcdur_lognormal_cdf(const lcdur_model* model, double x, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = lcdur::lognormal_cdf(checked_model(model), x);
  });
}

lcdur_status lcdur_lognormal_quantile(const lcdur_model* model, double q, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = lcdur::lognormal_quantile(checked_model(model), q);
  });
}

lcdur_status lcdur_lognormal_sample(const lcdur_model* model, size_t n, uint64_t seed, double* out) {
  return guarded([&] {
    require(out || n == 0, "out is NULL");
    const auto draws = lcdur::lognormal_sample(checked_model(model), n, seed);
    std::copy(draws.begin(), draws.end(), out);
  });
}

lcdur_status lcdur_fit(const lcdur_events* events, lcdur_model_set** out) {
  return guarded([&] {
    require(events && out, "NULL argument");
    *out = new lcdur_model_set{lcdur::fit_model_set(events->events)};
  });
}

lcdur_status lcdur_models_parse_json(const char* json, lcdur_model_set** out) {
  return guarded([&] {
    require(json && out, "NULL argument");
    *out = new lcdur_model_set{lcdur::parse_models_json(json)};
  });
}

lcdur_status lcdur_models_to_json(const lcdur_model_set* models, char** out_json) {
  return guarded([&] {
    require(models && out_json, "NULL argument");
    *out_json = dup_string(lcdur::models_json(models->models));
  });
}

void lcdur_models_free(lcdur_model_set* models) { delete models; }

size_t lcdur_models_count(const lcdur_model_set* models) { return models ? models->models.size() : 0; }

lcdur_status lcdur_models_get(const lcdur_model_set* models, size_t index, lcdur_model* out) {
  return guarded([&] {
    require(models && out, "NULL argument");
    require(index < models->models.size(), "model index out of range");
    *out = to_c(models->models[index]);
  });
}

lcdur_status lcdur_models_find(const lcdur_model_set* models, lcdur_vehicle_class vehicle_class,
                               lcdur_direction direction, lcdur_model* out) {
  return guarded([&] {
    require(models && out, "NULL argument");
    for (const auto& m : models->models) {
      const auto c = to_c(m);
      if (c.vehicle_class == vehicle_class && c.direction == direction) {
        *out = c;
        return;
      }
    }
    throw lcdur::Error(lcdur::ErrorCode::MissingGroup, "no model for the requested group");
  });
}

lcdur_status lcdur_mwu_test(const double* a, size_t n_a, const double* b, size_t n_b,
                            lcdur_test_mode mode, lcdur_mwu_result* out) {
  return guarded([&] {
    require(out && (a || n_a == 0) && (b || n_b == 0), "NULL argument");
    const auto r = lcdur::mwu_test({a, n_a}, {b, n_b}, to_mode(mode));
    out->u_statistic = r.u_statistic;
    out->has_z_value = r.z_value.has_value() ? 1 : 0;
    out->z_value = r.z_value.value_or(0.0);
    out->p_two_sided = r.p_two_sided;
    out->n_a = r.n_a;
    out->n_b = r.n_b;
    out->exact = r.method == lcdur::TestMethod::Exact ? 1 : 0;
    out->reject = r.reject() ? 1 : 0;
  });
}

void lcdur_synth_options_default(lcdur_synth_options* options) {
  if (!options) return;
  *options = lcdur_synth_options{0, 1, 0, 10, 0.2, 3, 25.0, 0.0};
}

lcdur_status lcdur_synth_generate(const lcdur_synth_options* options, const char* out_dir) {
  return guarded([&] {
    require(options && out_dir, "NULL argument");
    const int vehicles = options->n_vehicles > 0 ? options->n_vehicles : 2 * options->n_events;
    auto config = lcdur::random_config(options->seed, vehicles, options->n_events,
                                       options->truck_fraction, options->lane_count,
                                       options->frame_rate);
    config.recording_id = options->recording_id;
    config.noise_std = options->noise_std;
    lcdur::write_synth(lcdur::generate_recording(config), out_dir);
  });
}

}  // extern "C"
