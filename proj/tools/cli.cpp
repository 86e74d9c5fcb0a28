#include "cli.hpp"

#include "cprfit/errors.hpp"
#include "cprfit/evaluation.hpp"
#include "cprfit/io.hpp"
#include "cprfit/streaming.hpp"
#include "cprfit/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

namespace cprfit::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

/// Reproducibility record written next to every output as <out>.manifest.json.
class RunManifest {
public:
  explicit RunManifest(std::string command) { doc_["command"] = std::move(command); }

  ordered_json &config() { return doc_["config"]; }
  void seed(std::uint64_t s) { doc_["seed"] = s; }
  void input(const fs::path &path) {
    doc_["inputs"].push_back({{"path", path.string()}, {"sha256", sha256_hex(io::read_text_file(path))}});
  }

  void write_next_to(const fs::path &output) {
    doc_["tool_version"] = kToolVersion;
    if (!doc_.contains("inputs")) {
      doc_["inputs"] = ordered_json::array();
    }
    fs::path path = output;
    path += ".manifest.json";
    io::write_file_atomic(path, doc_.dump(2) + "\n");
  }

private:
  ordered_json doc_ = ordered_json::object();
};

ordered_json de_json(const de::DEConfig &de) {
  return {{"np", de.population_size},   {"gmax", de.max_generations}, {"cr", de.crossover_rate},
          {"f", de.amplification},      {"vtr", de.value_to_reach},   {"seed", de.seed}};
}

JointType require_joint(const std::string &name) {
  const auto joint = parse_joint_type(name);
  if (!joint) {
    throw ConfigError("joint", "expected one of shoulders, elbows, wrists, hands; got '" + name + "'");
  }
  return *joint;
}

void print_warnings(std::ostream &err, const std::vector<std::string> &warnings) {
  for (const std::string &w : warnings) {
    err << "warning: " << w << '\n';
  }
}

// --- fit -------------------------------------------------------------------

struct FitOptions {
  std::string input;
  std::string joint = "shoulders";
  double update_hz = 1.0;
  double window_s = 3.0;
  std::size_t np = 50;
  std::size_t gmax = 80;
  double cr = 0.5;
  double f = 0.8;
  double vtr = 1e-4;
  std::uint64_t seed = 42;
  std::size_t jobs = 1;
  std::string out;
  std::string trace;
};

int cmd_fit(const FitOptions &o, std::ostream &out, std::ostream &err) {
  StreamConfig cfg;
  cfg.joint = require_joint(o.joint);
  cfg.update_hz = o.update_hz;
  cfg.window_s = o.window_s;
  cfg.de.population_size = o.np;
  cfg.de.max_generations = o.gmax;
  cfg.de.crossover_rate = o.cr;
  cfg.de.amplification = o.f;
  cfg.de.value_to_reach = o.vtr;
  cfg.de.seed = o.seed;
  cfg.jobs = o.jobs;
  cfg.validate();

  const std::vector<JointFrame> frames = io::read_frames_jsonl(o.input);
  const StreamOutput result = run_stream(frames, cfg, !o.trace.empty());
  print_warnings(err, result.warnings);
  if (result.ingest.skipped_missing_joint > 0) {
    err << "warning: " << result.ingest.skipped_missing_joint << " of " << result.ingest.frames
        << " frames lack " << o.joint << " and were skipped\n";
  }
  if (const std::size_t gaps = result.gap_count(); gaps > 0) {
    err << "warning: " << gaps << " windows had fewer than " << kMinWindowSamples
        << " samples and were not fitted\n";
  }

  std::ostringstream csv;
  io::write_predictions_csv(csv, result.fits());
  io::write_file_atomic(o.out, csv.str());

  if (!o.trace.empty()) {
    std::ostringstream trace;
    trace << "t_update,generation,best_cost\n";
    for (const WindowRecord &w : result.windows) {
      for (std::size_t g = 0; g < w.cost_trace.size(); ++g) {
        trace << io::format_number(w.t_update) << ',' << g << ','
              << io::format_number(w.cost_trace[g]) << '\n';
      }
    }
    io::write_file_atomic(o.trace, trace.str());
  }

  RunManifest manifest("fit");
  manifest.config() = {{"joint", o.joint},
                       {"update_hz", o.update_hz},
                       {"window_s", o.window_s},
                       {"de", de_json(cfg.de)}};
  manifest.seed(o.seed);
  manifest.input(o.input);
  manifest.write_next_to(o.out);
  out << "wrote " << result.fits().size() << " window fits to " << o.out << '\n';
  return kExitOk;
}

// --- evaluate --------------------------------------------------------------

struct EvaluateOptions {
  std::string pred;
  std::string ref;
  std::string out;
};

int cmd_evaluate(const EvaluateOptions &o, std::ostream &out, std::ostream &err) {
  const std::vector<FitResult> fits = io::read_predictions_csv(o.pred);
  const std::vector<CompressionEvent> events = io::read_events_csv(o.ref);
  const EvaluationReport report = evaluate_predictions(events, fits);

  const fs::path out_path(o.out);
  fs::path table_path = out_path.parent_path() / (out_path.stem().string() + "_events.csv");
  std::ostringstream table;
  io::write_event_table_csv(table, report);
  io::write_file_atomic(table_path, table.str());

  auto optional_json = [](const std::optional<double> &v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  ordered_json doc = {{"n_events", report.n_events},
                      {"n_aligned", report.n_aligned},
                      {"n_warmup", report.n_warmup},
                      {"n_unaligned", report.n_unaligned},
                      {"mae_cpm", optional_json(report.mae_cpm)},
                      {"mae_cm", optional_json(report.mae_cm)},
                      {"per_event_table", table_path.string()}};
  io::write_file_atomic(out_path, doc.dump(2) + "\n");

  RunManifest manifest("evaluate");
  manifest.config() = ordered_json::object();
  manifest.input(o.pred);
  manifest.input(o.ref);
  manifest.write_next_to(out_path);

  if (report.n_aligned == 0) {
    err << "warning: no reference event overlaps any prediction window\n";
  }
  out << report.n_aligned << " of " << report.n_events << " events aligned\n";
  return kExitOk;
}

// --- sweep -----------------------------------------------------------------

struct SweepOptions {
  std::string trials;
  std::string grid;
  std::string out;
  std::size_t jobs = 1;
};

std::vector<Trial> load_trials(const fs::path &dir, std::vector<fs::path> &inputs,
                               std::ostream &err) {
  if (!fs::is_directory(dir)) {
    throw IoError("trial directory " + dir.string() + " does not exist");
  }
  constexpr std::string_view kFramesSuffix = ".frames.jsonl";
  constexpr std::string_view kEventsSuffix = ".events.csv";
  std::map<std::string, std::pair<bool, bool>> names; // name -> (frames, events)
  for (const auto &entry : fs::directory_iterator(dir)) {
    const std::string file = entry.path().filename().string();
    if (file.ends_with(kFramesSuffix)) {
      names[file.substr(0, file.size() - kFramesSuffix.size())].first = true;
    } else if (file.ends_with(kEventsSuffix)) {
      names[file.substr(0, file.size() - kEventsSuffix.size())].second = true;
    }
  }
  std::vector<Trial> trials;
  for (const auto &[name, present] : names) {
    if (!present.first || !present.second) {
      err << "warning: trial '" << name << "' lacks its "
          << (present.first ? "events" : "frames") << " file; skipped\n";
      continue;
    }
    const fs::path frames = dir / (name + std::string(kFramesSuffix));
    const fs::path events = dir / (name + std::string(kEventsSuffix));
    trials.push_back({name, io::read_frames_jsonl(frames), io::read_events_csv(events)});
    inputs.push_back(frames);
    inputs.push_back(events);
  }
  return trials;
}

int cmd_sweep(const SweepOptions &o, std::ostream &out, std::ostream &err) {
  const SweepGrid grid = o.grid.empty() ? SweepGrid::standard() : io::read_grid_json(o.grid);
  for (const SweepPoint &p : grid.points()) {
    StreamConfig cfg;
    cfg.update_hz = p.update_hz;
    cfg.window_s = p.window_s;
    cfg.de.population_size = p.np;
    cfg.de.max_generations = p.g_max;
    cfg.de.crossover_rate = grid.crossover_rate;
    cfg.de.amplification = grid.amplification;
    cfg.de.value_to_reach = grid.value_to_reach;
    cfg.validate();
  }
  std::vector<fs::path> inputs;
  const std::vector<Trial> trials = load_trials(o.trials, inputs, err);
  if (trials.empty()) {
    err << "warning: no complete trials found in " << o.trials << '\n';
  }
  const std::vector<SweepCell> cells = run_sweep(trials, grid, o.jobs);

  std::ostringstream csv;
  io::write_sweep_csv(csv, cells);
  io::write_file_atomic(o.out, csv.str());

  RunManifest manifest("sweep");
  manifest.config() = {{"grid", o.grid.empty() ? "standard" : o.grid},
                       {"cr", grid.crossover_rate},
                       {"f", grid.amplification},
                       {"vtr", grid.value_to_reach},
                       {"cells", cells.size()},
                       {"trials", trials.size()}};
  manifest.seed(grid.seed);
  if (!o.grid.empty()) {
    manifest.input(o.grid);
  }
  for (const fs::path &p : inputs) {
    manifest.input(p);
  }
  manifest.write_next_to(o.out);
  out << "wrote " << cells.size() << " sweep cells to " << o.out << '\n';
  return kExitOk;
}

// --- sensitivity -----------------------------------------------------------

struct SensitivityOptions {
  std::string sweep;
  std::string target = "mae_cpm";
  std::string joint;
  std::string out;
};

int cmd_sensitivity(const SensitivityOptions &o, std::ostream &out, std::ostream &err) {
  const auto target = parse_sensitivity_target(o.target);
  if (!target) {
    throw ConfigError("target", "expected mae_cpm or mae_cm; got '" + o.target + "'");
  }
  std::vector<SweepCell> cells = io::read_sweep_csv(o.sweep);
  if (!o.joint.empty()) {
    const JointType joint = require_joint(o.joint);
    std::erase_if(cells, [joint](const SweepCell &c) { return c.point.joint != joint; });
  }
  const std::vector<SensitivityRow> rows = sensitivity(cells, *target);
  for (const SensitivityRow &r : rows) {
    if (!r.value) {
      err << "warning: sensitivity of " << o.target << " to " << r.variable
          << " is undefined (zero output variance)\n";
    }
  }
  std::ostringstream csv;
  io::write_sensitivity_csv(csv, rows);
  io::write_file_atomic(o.out, csv.str());

  RunManifest manifest("sensitivity");
  manifest.config() = {{"target", o.target}, {"joint", o.joint}};
  manifest.input(o.sweep);
  manifest.write_next_to(o.out);
  out << "wrote " << rows.size() << " sensitivity rows to " << o.out << '\n';
  return kExitOk;
}

// --- synth -----------------------------------------------------------------

struct SynthOptions {
  double cpm = 110.0;
  double depth_cm = 5.0;
  double noise_cm = 0.0;
  double duration_s = 120.0;
  double frame_rate = 30.0;
  double dropout = 0.0;
  std::vector<double> plane{0.0, 1.0, 0.0, 0.0};
  std::string schedule;
  std::uint64_t seed = 42;
  std::string out_frames;
  std::string out_events;
};

int cmd_synth(const SynthOptions &o, std::ostream &out, std::ostream &) {
  SynthSpec spec;
  spec.duration_s = o.duration_s;
  spec.frame_rate = o.frame_rate;
  spec.noise_cm = o.noise_cm;
  spec.dropout_prob = o.dropout;
  spec.seed = o.seed;
  if (o.plane.size() != 4) {
    throw ConfigError("plane", "expected nx,ny,nz,a");
  }
  try {
    spec.plane = FloorPlane({o.plane[0], o.plane[1], o.plane[2]}, o.plane[3]);
  } catch (const GeometryError &e) {
    throw ConfigError("plane", e.what());
  }
  spec.schedule = o.schedule.empty() ? Schedule::constant(o.cpm, o.depth_cm)
                                     : Schedule(io::read_schedule_csv(o.schedule));
  spec.validate();

  const Dataset data = generate(spec);
  write_dataset(data, o.out_frames, o.out_events);

  RunManifest manifest("synth");
  manifest.config() = {{"cpm", o.cpm},
                       {"depth_cm", o.depth_cm},
                       {"noise_cm", o.noise_cm},
                       {"duration_s", o.duration_s},
                       {"frame_rate", o.frame_rate},
                       {"dropout", o.dropout},
                       {"plane", o.plane},
                       {"schedule", o.schedule},
                       {"out_events", o.out_events}};
  manifest.seed(o.seed);
  if (!o.schedule.empty()) {
    manifest.input(o.schedule);
  }
  manifest.write_next_to(o.out_frames);
  out << "wrote " << data.frames.size() << " frames and " << data.events.size() << " events\n";
  return kExitOk;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Chest-compression rate and depth from skeletal motion capture"};
  app.require_subcommand(1);

  FitOptions fit;
  auto *fit_cmd = app.add_subcommand("fit", "Fit sinusoids over sliding windows of a frame stream");
  fit_cmd->add_option("--input", fit.input, "Frames file (JSON Lines)")->required();
  fit_cmd->add_option("--joint", fit.joint, "shoulders|elbows|wrists|hands")->capture_default_str();
  fit_cmd->add_option("--update-hz", fit.update_hz, "Model update frequency f_U (1/s)")->capture_default_str();
  fit_cmd->add_option("--window-s", fit.window_s, "Window length S_len (s)")->capture_default_str();
  fit_cmd->add_option("--np", fit.np, "Population size NP")->capture_default_str();
  fit_cmd->add_option("--gmax", fit.gmax, "Maximum generations G_max")->capture_default_str();
  fit_cmd->add_option("--cr", fit.cr, "Crossover constant CR")->capture_default_str();
  fit_cmd->add_option("--f", fit.f, "Amplification factor F")->capture_default_str();
  fit_cmd->add_option("--vtr", fit.vtr, "Value to reach: window RMSE threshold (m)")->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Base RNG seed")->capture_default_str();
  fit_cmd->add_option("--jobs", fit.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  fit_cmd->add_option("--trace", fit.trace, "Optional per-generation cost trace CSV");
  fit_cmd->add_option("--out", fit.out, "Predictions CSV")->required();

  EvaluateOptions evaluate;
  auto *eval_cmd = app.add_subcommand("evaluate", "Compare predictions with reference events");
  eval_cmd->add_option("--pred", evaluate.pred, "Predictions CSV")->required();
  eval_cmd->add_option("--ref", evaluate.ref, "Reference events CSV")->required();
  eval_cmd->add_option("--out", evaluate.out, "Report JSON")->required();

  SweepOptions sweep;
  auto *sweep_cmd = app.add_subcommand("sweep", "Median absolute errors over a parameter grid");
  sweep_cmd->add_option("--trials", sweep.trials, "Directory of <name>.frames.jsonl / <name>.events.csv")->required();
  sweep_cmd->add_option("--grid", sweep.grid, "Grid JSON (default: standard two-step grid)");
  sweep_cmd->add_option("--out", sweep.out, "Sweep CSV")->required();
  sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads (0 = all cores)")->capture_default_str();

  SensitivityOptions sens;
  auto *sens_cmd = app.add_subcommand("sensitivity", "Correlation ratio of sweep errors per parameter");
  sens_cmd->add_option("--sweep", sens.sweep, "Sweep CSV")->required();
  sens_cmd->add_option("--target", sens.target, "mae_cpm|mae_cm")->capture_default_str();
  sens_cmd->add_option("--joint", sens.joint, "Restrict to one joint");
  sens_cmd->add_option("--out", sens.out, "Sensitivity CSV")->required();

  SynthOptions synth;
  auto *synth_cmd = app.add_subcommand("synth", "Generate a synthetic frame stream and reference events");
  synth_cmd->add_option("--cpm", synth.cpm, "Constant compression rate")->capture_default_str();
  synth_cmd->add_option("--depth-cm", synth.depth_cm, "Constant peak-to-peak depth")->capture_default_str();
  synth_cmd->add_option("--noise-cm", synth.noise_cm, "Gaussian noise sigma along the floor normal")->capture_default_str();
  synth_cmd->add_option("--duration-s", synth.duration_s, "Stream duration")->capture_default_str();
  synth_cmd->add_option("--frame-rate", synth.frame_rate, "Frames per second")->capture_default_str();
  synth_cmd->add_option("--dropout", synth.dropout, "Per-frame joint dropout probability")->capture_default_str();
  synth_cmd->add_option("--plane", synth.plane, "Floor plane nx,ny,nz,a")->delimiter(',')->expected(4);
  synth_cmd->add_option("--schedule", synth.schedule, "Rate/depth schedule CSV (t_s,cpm,depth_cm)");
  synth_cmd->add_option("--seed", synth.seed, "RNG seed")->capture_default_str();
  synth_cmd->add_option("--out-frames", synth.out_frames, "Frames JSON Lines output")->required();
  synth_cmd->add_option("--out-events", synth.out_events, "Events CSV output")->required();

  std::vector<const char *> argv;
  argv.reserve(args.size());
  for (const std::string &a : args) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*fit_cmd) {
      return cmd_fit(fit, out, err);
    }
    if (*eval_cmd) {
      return cmd_evaluate(evaluate, out, err);
    }
    if (*sweep_cmd) {
      return cmd_sweep(sweep, out, err);
    }
    if (*sens_cmd) {
      return cmd_sensitivity(sens, out, err);
    }
    if (*synth_cmd) {
      return cmd_synth(synth, out, err);
    }
  } catch (const ConfigError &e) {
    err << "error: invalid --" << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError &e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError &e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const StreamOrderError &e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const InvalidFrameError &e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception &e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

} // namespace cprfit::cli
