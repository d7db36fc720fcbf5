// Command-line front end. Links only the C interface in liblcdur.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lcdur/lcdur.h"

namespace fs = std::filesystem;

namespace {

/// Raised inside a command; turned into the single-line error record.
struct CommandError {
  std::string code;
  std::string message;
};

[[noreturn]] void raise(lcdur_status status, const std::string& context) {
  throw CommandError{lcdur_status_name(status), context + ": " + lcdur_last_error()};
}

void check(lcdur_status status, const std::string& context) {
  if (status != LCDUR_OK) raise(status, context);
}

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { lcdur_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
};

using Dataset = Handle<lcdur_dataset, lcdur_dataset_free>;
using Events = Handle<lcdur_events, lcdur_events_free>;
using Models = Handle<lcdur_model_set, lcdur_models_free>;

void log_info(const std::string& msg) { std::cerr << "lcdur: " << msg << '\n'; }

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream os(path, std::ios::binary);
  if (!os || !(os << content)) throw CommandError{"io", "cannot write " + path.string()};
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandError{"missing_upstream_artifact", "cannot open " + path.string()};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> parse_edges(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CommandError{"bad_flags", "bad bin edge '" + item + "' in \"" + text + "\""};
    }
  }
  return out;
}

struct Options {
  std::vector<std::string> tracks;
  std::vector<std::string> tracks_meta;
  std::vector<std::string> recording_meta;
  std::string input_dir;
  std::string out = ".";
  bool to_stdout = false;

  lcdur_extract_config extract{};
  std::string nav_speed = "mean";

  std::string test_mode = "auto";
  std::string bins;
  std::string truck_bins;
  std::string events;
  std::string models;

  std::uint64_t seed = 0;
  lcdur_synth_options synth{};

  std::string vehicle_class = "car";
  std::string direction = "left";
  std::size_t count = 1000;
};

void load_dataset(const Options& o, Dataset& ds) {
  check(lcdur_dataset_create(&ds.p), "dataset");
  if (o.tracks.size() != o.tracks_meta.size() || o.tracks.size() != o.recording_meta.size()) {
    throw CommandError{"bad_flags", "--tracks, --tracks-meta and --recording-meta must be given the same number of times"};
  }
  for (std::size_t i = 0; i < o.tracks.size(); ++i) {
    check(lcdur_dataset_load(ds.p, o.tracks[i].c_str(), o.tracks_meta[i].c_str(),
                             o.recording_meta[i].c_str()),
          "loading " + o.tracks[i]);
  }
  if (!o.input_dir.empty()) {
    std::size_t loaded = 0;
    check(lcdur_dataset_load_dir(ds.p, o.input_dir.c_str(), &loaded), "loading " + o.input_dir);
    log_info("loaded " + std::to_string(loaded) + " recording(s) from " + o.input_dir);
  }
  if (lcdur_dataset_recording_count(ds.p) == 0) {
    throw CommandError{"missing_upstream_artifact", "no recordings given (use --input-dir or --tracks/--tracks-meta/--recording-meta)"};
  }
}

fs::path events_path(const Options& o) {
  return o.events.empty() ? fs::path(o.out) / "events.csv" : fs::path(o.events);
}

void load_events(const Options& o, Events& ev) {
  const auto path = events_path(o);
  if (!fs::exists(path)) throw CommandError{"missing_upstream_artifact", path.string() + " does not exist"};
  check(lcdur_events_read_csv(path.string().c_str(), &ev.p), path.string());
  log_info("read " + std::to_string(lcdur_events_count(ev.p)) + " event(s) from " + path.string());
}

lcdur_test_mode test_mode(const std::string& s) {
  if (s == "auto") return LCDUR_TEST_AUTO;
  if (s == "exact") return LCDUR_TEST_EXACT;
  return LCDUR_TEST_APPROX;
}

struct AnalysisArgs {
  std::vector<double> car;
  std::vector<double> truck;
  lcdur_analysis_config config{};
};

void analysis_args(const Options& o, AnalysisArgs& a) {
  lcdur_analysis_config_default(&a.config);
  a.config.test_mode = test_mode(o.test_mode);
  if (!o.bins.empty()) {
    a.car = parse_edges(o.bins);
    a.config.car_bins = a.car.data();
    a.config.car_bin_count = a.car.size();
  }
  if (!o.truck_bins.empty()) {
    a.truck = parse_edges(o.truck_bins);
    a.config.truck_bins = a.truck.data();
    a.config.truck_bin_count = a.truck.size();
  }
}

void emit(const Options& o, const fs::path& file, const std::string& content) {
  if (o.to_stdout) {
    std::cout << content;
  } else {
    write_file(file, content);
    log_info("wrote " + file.string());
  }
}

void cmd_ingest(const Options& o) {
  Dataset ds;
  load_dataset(o, ds);
  OwnedString json;
  check(lcdur_dataset_validation_json(ds.p, &json.p), "ingest");
  emit(o, fs::path(o.out) / "validation.json", json.str());
}

void cmd_extract(const Options& o) {
  Dataset ds;
  load_dataset(o, ds);
  auto cfg = o.extract;
  cfg.nav_speed = o.nav_speed == "start" ? LCDUR_NAV_SPEED_AT_START : LCDUR_NAV_SPEED_MEAN;
  Events ev;
  check(lcdur_extract(ds.p, &cfg, &ev.p), "extract");
  OwnedString csv, rejected;
  check(lcdur_events_to_csv(ev.p, &csv.p), "extract");
  check(lcdur_events_rejections_csv(ev.p, &rejected.p), "extract");
  log_info(std::to_string(lcdur_events_count(ev.p)) + " event(s), " +
           std::to_string(lcdur_events_rejection_count(ev.p)) + " rejected crossing(s)");
  emit(o, fs::path(o.out) / "events.csv", csv.str());
  if (!o.to_stdout) {
    write_file(fs::path(o.out) / "rejections.csv", rejected.str());
    log_info("wrote " + (fs::path(o.out) / "rejections.csv").string());
  }
}

void cmd_analyze(const Options& o) {
  AnalysisArgs a;
  analysis_args(o, a);
  Events ev;
  load_events(o, ev);
  check(lcdur_analyze(ev.p, &a.config, o.out.c_str()), "analyze " + events_path(o).string());
  log_info("wrote tables to " + o.out);
}

void cmd_fit(const Options& o) {
  Events ev;
  load_events(o, ev);
  Models m;
  check(lcdur_fit(ev.p, &m.p), "fit " + events_path(o).string());
  OwnedString json;
  check(lcdur_models_to_json(m.p, &json.p), "fit");
  emit(o, fs::path(o.out) / "models.json", json.str());
}

void cmd_sample(const Options& o) {
  const fs::path path = o.models.empty() ? fs::path(o.out) / "models.json" : fs::path(o.models);
  const auto json = read_file(path);
  Models m;
  check(lcdur_models_parse_json(json.c_str(), &m.p), path.string());
  lcdur_model model{};
  check(lcdur_models_find(m.p, o.vehicle_class == "truck" ? LCDUR_TRUCK : LCDUR_CAR,
                          o.direction == "right" ? LCDUR_RIGHT : LCDUR_LEFT, &model),
        "sample " + o.vehicle_class + "/" + o.direction);
  std::vector<double> draws(o.count);
  check(lcdur_lognormal_sample(&model, draws.size(), o.seed, draws.data()), "sample");
  std::ostringstream os;
  os.precision(17);
  os << "duration_s\n";
  for (double d : draws) os << d << '\n';
  emit(o, fs::path(o.out) / ("samples_" + o.vehicle_class + "_" + o.direction + ".csv"), os.str());
}

void cmd_synth(const Options& o) {
  auto s = o.synth;
  s.seed = o.seed;
  check(lcdur_synth_generate(&s, o.out.c_str()), "synth");
  log_info("wrote synthetic recording to " + o.out);
}

void cmd_report(const Options& o) {
  AnalysisArgs a;
  analysis_args(o, a);
  Events ev;
  load_events(o, ev);
  OwnedString summary;
  check(lcdur_report(ev.p, &a.config, o.out.c_str(), &summary.p), "report " + events_path(o).string());
  if (o.to_stdout) std::cout << summary.str();
  log_info("wrote report to " + o.out);
}

void print_error(const std::string& command, const std::string& code, const std::string& message) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["error"] = code;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  lcdur_extract_config_default(&o.extract);
  lcdur_synth_options_default(&o.synth);

  CLI::App app{"Lane-change extraction, duration statistics and log-normal models"};
  app.set_version_flag("--version", std::string(lcdur_version()));
  app.require_subcommand(1);

  const auto add_inputs = [&](CLI::App* c) {
    c->add_option("--tracks", o.tracks, "NN_tracks.csv (repeatable)");
    c->add_option("--tracks-meta", o.tracks_meta, "NN_tracksMeta.csv (repeatable)");
    c->add_option("--recording-meta", o.recording_meta, "NN_recordingMeta.csv (repeatable)");
    c->add_option("--input-dir", o.input_dir, "directory holding recording triples");
  };
  const auto add_out = [&](CLI::App* c) {
    c->add_option("--out", o.out, "output directory")->capture_default_str();
    c->add_flag("--stdout", o.to_stdout, "stream the primary artifact to standard output");
  };
  const auto add_analysis = [&](CLI::App* c) {
    c->add_option("--events", o.events, "events.csv (default: <out>/events.csv)");
    c->add_option("--test-mode", o.test_mode)->check(CLI::IsMember({"auto", "exact", "approx"}))->capture_default_str();
    c->add_option("--bins", o.bins, "car speed bin edges, m/s, e.g. \"0,20,25,30,35,45\"");
    c->add_option("--truck-bins", o.truck_bins, "truck speed bin edges, m/s");
  };

  auto* ingest = app.add_subcommand("ingest", "validate recordings and write validation.json");
  add_inputs(ingest);
  add_out(ingest);

  auto* extract = app.add_subcommand("extract", "detect lane changes and write events.csv");
  add_inputs(extract);
  add_out(extract);
  extract->add_option("--lat-vel-threshold", o.extract.lateral_velocity_threshold, "m/s")->capture_default_str();
  extract->add_option("--smooth-half-window", o.extract.smoothing_half_window, "frames")->capture_default_str();
  extract->add_option("--settle-window", o.extract.settle_window_s, "s")->capture_default_str();
  extract->add_option("--search-window", o.extract.max_search_window_s, "s")->capture_default_str();
  extract->add_option("--lane-debounce", o.extract.lane_debounce_s, "s")->capture_default_str();
  extract->add_option("--nav-speed", o.nav_speed)->check(CLI::IsMember({"mean", "start"}))->capture_default_str();

  auto* analyze = app.add_subcommand("analyze", "write duration tables and CDF data");
  add_out(analyze);
  add_analysis(analyze);

  auto* fit = app.add_subcommand("fit", "fit log-normal models and write models.json");
  add_out(fit);
  fit->add_option("--events", o.events, "events.csv (default: <out>/events.csv)");

  auto* sample = app.add_subcommand("sample", "draw durations from a fitted model");
  add_out(sample);
  sample->add_option("--models", o.models, "models.json (default: <out>/models.json)");
  sample->add_option("--class", o.vehicle_class)->check(CLI::IsMember({"car", "truck"}))->capture_default_str();
  sample->add_option("--direction", o.direction)->check(CLI::IsMember({"left", "right"}))->capture_default_str();
  sample->add_option("-n,--count", o.count)->capture_default_str();
  sample->add_option("--seed", o.seed)->capture_default_str();

  auto* synth = app.add_subcommand("synth", "generate a synthetic recording with ground truth");
  synth->add_option("--out", o.out, "output directory")->capture_default_str();
  synth->add_option("--seed", o.seed)->capture_default_str();
  synth->add_option("--events", o.synth.n_events)->capture_default_str();
  synth->add_option("--vehicles", o.synth.n_vehicles, "0: twice the event count")->capture_default_str();
  synth->add_option("--truck-fraction", o.synth.truck_fraction)->capture_default_str();
  synth->add_option("--lanes", o.synth.lane_count)->capture_default_str();
  synth->add_option("--frame-rate", o.synth.frame_rate)->capture_default_str();
  synth->add_option("--noise", o.synth.noise_std, "lateral position noise, m")->capture_default_str();
  synth->add_option("--recording-id", o.synth.recording_id)->capture_default_str();

  auto* report = app.add_subcommand("report", "tables, CDF data, models.json and summary.json");
  add_out(report);
  add_analysis(report);

  std::string command = "lcdur";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    print_error(subs.empty() ? command : subs.front()->get_name(), "bad_flags", e.what());
    return 2;
  }

  const auto* chosen = app.get_subcommands().front();
  command = chosen->get_name();
  try {
    if (chosen == ingest) cmd_ingest(o);
    else if (chosen == extract) cmd_extract(o);
    else if (chosen == analyze) cmd_analyze(o);
    else if (chosen == fit) cmd_fit(o);
    else if (chosen == sample) cmd_sample(o);
    else if (chosen == synth) cmd_synth(o);
    else if (chosen == report) cmd_report(o);
  } catch (const CommandError& e) {
    print_error(command, e.code, e.message);
    return e.code == "bad_flags" ? 2 : 1;
  } catch (const std::exception& e) {
    print_error(command, "internal", e.what());
    return 1;
  }
  return 0;
}
