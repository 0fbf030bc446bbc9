#include "qrc/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "qrc/config.hpp"
#include "qrc/csv.hpp"
#include "qrc/error.hpp"
#include "qrc/pipeline.hpp"

namespace qrc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

// JSON cannot carry NaN; null marks "not computed".
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const RealVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number_or_null(v[i]));
  return a;
}

CsvTable spectrum_csv(const SpectrumTable& t) {
  CsvTable c{{"freq", "value"}, {}};
  for (std::size_t i = 0; i < t.freq.size(); ++i) c.rows.push_back({t.freq[i], t.value[i]});
  return c;
}

CsvTable divergence_csv(const std::vector<double>& curve) {
  CsvTable c{{"step", "mean_log_div"}, {}};
  for (std::size_t k = 0; k < curve.size(); ++k) c.rows.push_back({static_cast<double>(k), curve[k]});
  return c;
}

CsvTable metrics_table(const RunResult& r) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CsvTable t;
  std::vector<double> row;
  auto add = [&](const std::string& name, double v) {
    t.header.push_back(name);
    row.push_back(v);
  };
  add("g", r.g);
  add("valid_horizon", static_cast<double>(r.valid_horizon));
  add("predicted_length", static_cast<double>(r.predicted.length()));
  add("diverged", r.diverged ? 1.0 : 0.0);
  for (Eigen::Index c = 0; c < r.train_nrmse.size(); ++c) {
    add("train_nrmse_c" + std::to_string(c), r.train_nrmse[c]);
  }
  for (Eigen::Index c = 0; c < r.test_nrmse.size(); ++c) {
    add("test_nrmse_c" + std::to_string(c), r.test_nrmse[c]);
  }
  add("ami_delay", r.metrics ? r.metrics->ami_delay : nan);
  add("lyapunov_target", r.metrics ? r.metrics->lyapunov_target : nan);
  add("lyapunov_predicted", r.metrics ? r.metrics->lyapunov_predicted : nan);
  t.rows.push_back(std::move(row));
  return t;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open '" + path.string() + "' for writing");
  os << text;
}

// Writes every artifact of one run into `dir` and returns the manifest.
json write_run_outputs(const fs::path& dir, const ExperimentConfig& cfg, const RunResult& r,
                       double wall_seconds) {
  fs::create_directories(dir);
  const long first = cfg.washout + cfg.train;
  json files = json::object();
  auto emit_csv = [&](const std::string& name, const CsvTable& t) {
    write_csv(dir / name, t);
    files[name.substr(0, name.size() - 4)] = (dir / name).string();
  };

  write_trajectory_csv(dir / "target.csv", r.target, first);
  files["target"] = (dir / "target.csv").string();
  write_trajectory_csv(dir / "predicted.csv", r.predicted, first);
  files["predicted"] = (dir / "predicted.csv").string();
  emit_csv("metrics.csv", metrics_table(r));

  if (r.calibration) {
    CsvTable cal{{"g", "valid_horizon", "train_nrmse", "failed"}, {}};
    for (const auto& p : r.calibration->points) {
      cal.rows.push_back({p.g, static_cast<double>(p.valid_horizon), p.train_nrmse,
                          p.error.empty() ? 0.0 : 1.0});
    }
    emit_csv("calibration.csv", cal);
  }
  if (r.metrics) {
    emit_csv("psd1_target.csv", spectrum_csv(r.metrics->psd1_target));
    emit_csv("psd1_predicted.csv", spectrum_csv(r.metrics->psd1_predicted));
    emit_csv("psd2_target.csv", spectrum_csv(r.metrics->psd2_target));
    emit_csv("psd2_predicted.csv", spectrum_csv(r.metrics->psd2_predicted));
    emit_csv("divergence_target.csv", divergence_csv(r.metrics->divergence_target));
    emit_csv("divergence_predicted.csv", divergence_csv(r.metrics->divergence_predicted));
  }

  const std::string canonical = canonical_config(cfg);
  write_text(dir / "config.resolved", canonical);

  json params = json::object();
  std::istringstream lines(canonical);
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find(" = ");
    params[line.substr(0, eq)] = line.substr(eq + 3);
  }
  json summary = {
      {"g", r.g},
      {"valid_horizon", r.valid_horizon},
      {"predicted_length", r.predicted.length()},
      {"requested_length", cfg.test},
      {"diverged", r.diverged},
      {"train_nrmse", vector_json(r.train_nrmse)},
      {"test_nrmse", vector_json(r.test_nrmse)},
  };
  if (r.metrics) {
    summary["ami_delay"] = r.metrics->ami_delay;
    summary["lyapunov_target"] = number_or_null(r.metrics->lyapunov_target);
    summary["lyapunov_predicted"] = number_or_null(r.metrics->lyapunov_predicted);
  }
  json manifest = {
      {"config_digest", sha256_hex(canonical)},
      {"seed", cfg.seed},
      {"parameters", params},
      {"calibrated_g", r.calibration ? json(r.g) : json(nullptr)},
      {"metrics", summary},
      {"files", files},
      {"wall_clock_seconds", wall_seconds},
  };
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

ExperimentConfig resolve_config(const std::string& path, std::optional<std::uint64_t> seed,
                                bool smoke) {
  ExperimentConfig cfg = load_config(path);
  if (seed) cfg.seed = *seed;
  if (smoke) apply_smoke(cfg);
  return cfg;
}

int cmd_generate(const std::string& config, const std::string& out_path,
                 std::optional<std::uint64_t> seed, bool smoke, std::ostream& out) {
  const fs::path path(out_path);
  const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
  if (!fs::is_directory(parent)) {
    throw ConfigError("--out: directory '" + parent.string() + "' does not exist");
  }
  const ExperimentConfig cfg = resolve_config(config, seed, smoke);
  const Trajectory data = generate_standardized(cfg);
  write_trajectory_csv(path, data);

  json stats = {
      {"system", std::string(to_string(cfg.system.kind))},
      {"tau", data.tau},
      {"samples", data.length()},
      {"fit_range", {0, cfg.washout + cfg.train}},
      {"mean", vector_json(data.stats->mean)},
      {"stddev", vector_json(data.stats->stddev)},
  };
  write_text(fs::path(out_path + ".stats.json"), stats.dump(2) + "\n");
  out << "wrote " << data.length() << " samples to " << out_path << "\n";
  return kExitOk;
}

int cmd_run(const std::string& config, const std::string& out_dir,
            std::optional<std::uint64_t> seed, bool smoke, bool diagnostics, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(config, seed, smoke);
  fs::create_directories(out_dir);
  Timer timer;

  std::ofstream diag_stream;
  StepObserver observer;
  if (diagnostics) {
    diag_stream.open(fs::path(out_dir) / "diagnostics.csv", std::ios::binary);
    write_diagnostics_header(diag_stream);
    observer = [&diag_stream](const DensityMatrix& rho, long step) {
      write_diagnostics_row(diag_stream, diagnose(rho, step));
    };
  }
  const RunResult r = run_experiment(cfg, observer);
  const json manifest = write_run_outputs(out_dir, cfg, r, timer.seconds());
  out << "g = " << format_double(r.g) << ", valid horizon " << r.valid_horizon << " of "
      << cfg.test << " steps\n";
  out << "manifest: " << (fs::path(out_dir) / "manifest.json").string() << "\n";
  return kExitOk;
}

std::string sweep_key(const std::string& key) {
  if (key == "g") return "reservoir.g";
  if (key == "ridge") return "pipeline.ridge";
  if (key == "diagonal_scale") return "hamiltonian.diagonal_scale";
  if (key == "seed") return "pipeline.seed";
  return key;
}

std::vector<std::string> expand_values(const std::string& raw) {
  auto trimmed = [](std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  const std::string v = trimmed(raw);
  for (const char* fn : {"logspace(", "linspace("}) {
    const std::string prefix(fn);
    if (v.rfind(prefix, 0) == 0 && v.back() == ')') {
      std::vector<double> args;
      std::stringstream ss(v.substr(prefix.size(), v.size() - prefix.size() - 1));
      for (std::string a; std::getline(ss, a, ',');) args.push_back(std::stod(trimmed(a)));
      if (args.size() != 3 || args[2] < 1) throw ConfigError("sweep: " + prefix + "a, b, n)");
      const int n = static_cast<int>(args[2]);
      std::vector<std::string> out;
      for (int i = 0; i < n; ++i) {
        const double t = n == 1 ? args[0] : args[0] + (args[1] - args[0]) * i / (n - 1);
        out.push_back(format_double(prefix[0] == 'l' && prefix[1] == 'o' ? std::pow(10.0, t) : t));
      }
      return out;
    }
  }
  std::vector<std::string> out;
  std::stringstream ss(v);
  for (std::string a; std::getline(ss, a, ',');) {
    if (!trimmed(a).empty()) out.push_back(trimmed(a));
  }
  if (out.empty()) throw ConfigError("sweep: empty value list");
  return out;
}

}  // namespace

std::vector<SweepPoint> parse_sweep_spec(const std::string& spec) {
  std::string text = spec;
  if (fs::is_regular_file(spec)) {
    std::ifstream is(spec);
    std::stringstream ss;
    ss << is.rdbuf();
    text = ss.str();
  }
  for (char& c : text) {
    if (c == '\n') c = ';';
  }

  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ';');) {
    const auto hash = item.find('#');
    if (hash != std::string::npos) item.resize(hash);
    if (item.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("sweep: expected key=values in '" + item + "'");
    std::string key = item.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t\r") + 1);
    // logspace(a,b,n) contains commas, so split on ';' only.
    std::string values = item.substr(eq + 1);
    values.erase(values.find_last_not_of(" \t\r") + 1);
    axes.emplace_back(sweep_key(key), expand_values(values));
  }
  if (axes.empty()) throw ConfigError("sweep: no parameters given");

  std::vector<SweepPoint> points(1);
  for (const auto& [key, values] : axes) {
    std::vector<SweepPoint> next;
    for (const auto& p : points) {
      for (const auto& v : values) {
        SweepPoint q = p;
        q.assignments.emplace_back(key, v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

namespace {

unsigned sweep_threads() {
  if (const char* env = std::getenv("QR_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_sweep(const std::string& config, const std::string& sweep, const std::string& out_dir,
              std::optional<std::uint64_t> seed, bool smoke, std::ostream& out) {
  const ExperimentConfig base = resolve_config(config, seed, smoke);
  const std::vector<SweepPoint> points = parse_sweep_spec(sweep);

  // Validate every point's configuration up front: a bad key is a usage error.
  std::vector<ExperimentConfig> configs;
  for (const auto& p : points) {
    ExperimentConfig cfg = base;
    for (const auto& [key, value] : p.assignments) {
      set_config_value(cfg, key, value);
      if (key == "reservoir.g") cfg.calibration.enabled = false;
    }
    validate_config(cfg);
    configs.push_back(std::move(cfg));
  }
  fs::create_directories(out_dir);

  struct Outcome {
    bool ok = false;
    long horizon = -1;
    double g = std::numeric_limits<double>::quiet_NaN();
    double test_nrmse = std::numeric_limits<double>::quiet_NaN();
    double train_nrmse = std::numeric_limits<double>::quiet_NaN();
  };
  std::vector<Outcome> outcomes(points.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      std::ostringstream name;
      name << "point_" << std::setw(4) << std::setfill('0') << i;
      const fs::path dir = fs::path(out_dir) / name.str();
      try {
        Timer timer;
        const RunResult r = run_experiment(configs[i]);
        write_run_outputs(dir, configs[i], r, timer.seconds());
        outcomes[i] = {true, r.valid_horizon, r.g, r.test_nrmse.mean(), r.train_nrmse.mean()};
      } catch (const std::exception& e) {
        fs::create_directories(dir);
        write_text(dir / "error.txt", std::string(e.what()) + "\n");
        std::lock_guard lock(log_mutex);
        out << name.str() << " failed: " << e.what() << "\n";
      }
    }
  };
  const unsigned n_threads =
      std::min<unsigned>(sweep_threads(), static_cast<unsigned>(points.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return outcomes[a].horizon > outcomes[b].horizon;
  });

  CsvTable summary;
  summary.header = {"point"};
  for (const auto& [key, value] : points.front().assignments) summary.header.push_back(key);
  for (const char* h : {"ok", "g", "valid_horizon", "test_nrmse_mean", "train_nrmse_mean"}) {
    summary.header.push_back(h);
  }
  std::size_t succeeded = 0;
  for (std::size_t i : order) {
    std::vector<double> row{static_cast<double>(i)};
    for (const auto& [key, value] : points[i].assignments) row.push_back(std::stod(value));
    const Outcome& o = outcomes[i];
    row.insert(row.end(), {o.ok ? 1.0 : 0.0, o.g, static_cast<double>(o.horizon), o.test_nrmse,
                           o.train_nrmse});
    summary.rows.push_back(std::move(row));
    succeeded += o.ok ? 1 : 0;
  }
  write_csv(fs::path(out_dir) / "summary.csv", summary);
  out << succeeded << " of " << points.size() << " points succeeded\n";
  return succeeded > 0 ? kExitOk : kExitRuntime;
}

int cmd_metrics(const std::string& target_path, const std::string& predicted_path,
                const std::string& config, const std::string& out_dir, std::ostream& out) {
  const MetricsSettings settings =
      config.empty() ? ExperimentConfig{}.metrics : load_config(config).metrics;
  const Trajectory target = read_trajectory_csv(target_path);
  const Trajectory predicted = read_trajectory_csv(predicted_path);
  if (target.dimension() != predicted.dimension()) {
    throw ConfigError("metrics: target and prediction have different dimensions");
  }
  const MetricsReport m = evaluate_prediction(predicted, target, settings);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  CsvTable t;
  std::vector<double> row;
  for (Eigen::Index c = 0; c < m.nrmse.size(); ++c) {
    t.header.push_back("test_nrmse_c" + std::to_string(c));
    row.push_back(m.nrmse[c]);
  }
  t.header.insert(t.header.end(), {"ami_delay", "lyapunov_target", "lyapunov_predicted"});
  row.insert(row.end(), {static_cast<double>(m.ami_delay), m.lyapunov_target,
                         m.lyapunov_predicted});
  t.rows.push_back(std::move(row));
  write_csv(dir / "metrics.csv", t);
  write_csv(dir / "psd1_target.csv", spectrum_csv(m.psd1_target));
  write_csv(dir / "psd1_predicted.csv", spectrum_csv(m.psd1_predicted));
  write_csv(dir / "psd2_target.csv", spectrum_csv(m.psd2_target));
  write_csv(dir / "psd2_predicted.csv", spectrum_csv(m.psd2_predicted));
  write_csv(dir / "divergence_target.csv", divergence_csv(m.divergence_target));
  write_csv(dir / "divergence_predicted.csv", divergence_csv(m.divergence_predicted));
  out << "lyapunov target " << format_double(m.lyapunov_target) << ", predicted "
      << format_double(m.lyapunov_predicted) << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum reservoir forecasting of chaotic systems", "qrc"};
  app.require_subcommand(1);

  std::string config, out_path, sweep, target, predicted;
  std::optional<std::uint64_t> seed;
  bool smoke = false;
  bool diagnostics = false;

  auto* gen = app.add_subcommand("generate", "Integrate and standardize the input trajectory");
  gen->add_option("--config", config, "Experiment config file")->required();
  gen->add_option("--out", out_path, "Output CSV path")->required();
  gen->add_option("--seed", seed, "Override pipeline.seed");
  gen->add_flag("--smoke", smoke, "Shortened washout/train/test lengths");

  auto* run_cmd = app.add_subcommand("run", "Run one experiment");
  run_cmd->add_option("--config", config, "Experiment config file")->required();
  run_cmd->add_option("--out", out_path, "Output directory")->required();
  run_cmd->add_option("--seed", seed, "Override pipeline.seed");
  run_cmd->add_flag("--smoke", smoke, "Shortened washout/train/test lengths");
  run_cmd->add_flag("--diagnostics", diagnostics, "Write per-step state diagnostics");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter grid");
  sweep_cmd->add_option("--config", config, "Experiment config file")->required();
  sweep_cmd->add_option("--sweep", sweep, "Sweep spec text or file")->required();
  sweep_cmd->add_option("--out", out_path, "Output directory")->required();
  sweep_cmd->add_option("--seed", seed, "Override pipeline.seed");
  sweep_cmd->add_flag("--smoke", smoke, "Shortened washout/train/test lengths");

  auto* met = app.add_subcommand("metrics", "Recompute metrics from trajectory CSVs");
  met->add_option("--target", target, "Target trajectory CSV")->required();
  met->add_option("--predicted", predicted, "Predicted trajectory CSV")->required();
  met->add_option("--out", out_path, "Output directory")->required();
  met->add_option("--config", config, "Config supplying [metrics] settings");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_generate(config, out_path, seed, smoke, out);
    if (run_cmd->parsed()) return cmd_run(config, out_path, seed, smoke, diagnostics, out);
    if (sweep_cmd->parsed()) return cmd_sweep(config, sweep, out_path, seed, smoke, out);
    if (met->parsed()) return cmd_metrics(target, predicted, config, out_path, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const StageError& e) {
    err << "stage '" << e.stage() << "' failed: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace qrc::cli
