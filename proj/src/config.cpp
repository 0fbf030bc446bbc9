#include "qrc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "qrc/csv.hpp"
#include "qrc/error.hpp"
#include "qrc/hamiltonian.hpp"

namespace qrc {

std::vector<double> CalibrationSettings::grid() const {
  if (points < 1) return {};
  if (points == 1) return {g_min};
  std::vector<double> out;
  const double lo = std::log10(g_min), hi = std::log10(g_max);
  for (int i = 0; i < points; ++i) {
    out.push_back(std::pow(10.0, lo + (hi - lo) * i / (points - 1)));
  }
  return out;
}

ExperimentConfig ExperimentConfig::lorenz63_preset() {
  ExperimentConfig c;
  c.system = SystemSpec::lorenz63_default();
  c.x0 = default_initial_condition(SystemKind::lorenz63);
  c.substeps = default_substeps(SystemKind::lorenz63);
  c.feature = FeatureConfig{3, 2, 1, {2}, true, 1.0};
  const RealVector diag = lorenz_diagonal();
  c.hamiltonian.diagonal.assign(diag.data(), diag.data() + diag.size());
  c.washout = 600;
  c.train = 4000;
  c.test = 27000;
  c.metrics.psd_component = 2;
  return c;
}

ExperimentConfig ExperimentConfig::doublescroll_preset() {
  ExperimentConfig c;
  c.system = SystemSpec::doublescroll_default();
  c.x0 = default_initial_condition(SystemKind::doublescroll);
  c.substeps = default_substeps(SystemKind::doublescroll);
  c.feature = FeatureConfig{3, 2, 1, {3}, false, 1.0};
  const RealVector diag = doublescroll_diagonal();
  c.hamiltonian.diagonal.assign(diag.data(), diag.data() + diag.size());
  c.hamiltonian.fill_constant = 10.0;
  c.washout = 600;
  c.train = 5000;
  c.test = 60000;
  c.metrics.lyapunov_max_steps = 200;
  c.metrics.psd_component = 2;
  return c;
}

ExperimentConfig ExperimentConfig::preset(SystemKind kind) {
  return kind == SystemKind::lorenz63 ? lorenz63_preset() : doublescroll_preset();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ConfigError("expected a finite number, got '" + v + "'");
  }
  return out;
}

long parse_long(const std::string& v) {
  long out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("expected an integer, got '" + v + "'");
  return out;
}

int parse_int(const std::string& v) {
  const long l = parse_long(v);
  if (l < std::numeric_limits<int>::min() || l > std::numeric_limits<int>::max()) {
    throw ConfigError("integer out of range: '" + v + "'");
  }
  return static_cast<int>(l);
}

std::uint64_t parse_u64(const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("expected true/false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item)));
  if (out.empty()) throw ConfigError("expected a comma-separated list");
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Field {
  Setter set;
  Getter get;
};

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    // Accessors are generic lambdas `(auto& c) -> auto&` so one lambda
    // serves both the setter and the const getter.
    auto dbl = [&t](const std::string& key, auto ref) {
      t[key] = {[ref](ExperimentConfig& c, const std::string& v) { ref(c) = parse_double(v); },
                [ref](const ExperimentConfig& c) { return format_double(ref(c)); }};
    };
    auto integer = [&t](const std::string& key, auto ref) {
      t[key] = {[ref](ExperimentConfig& c, const std::string& v) { ref(c) = parse_int(v); },
                [ref](const ExperimentConfig& c) { return std::to_string(ref(c)); }};
    };
    auto longint = [&t](const std::string& key, auto ref) {
      t[key] = {[ref](ExperimentConfig& c, const std::string& v) { ref(c) = parse_long(v); },
                [ref](const ExperimentConfig& c) { return std::to_string(ref(c)); }};
    };
    auto boolean = [&t](const std::string& key, auto ref) {
      t[key] = {[ref](ExperimentConfig& c, const std::string& v) { ref(c) = parse_bool(v); },
                [ref](const ExperimentConfig& c) {
                  return std::string(ref(c) ? "true" : "false");
                }};
    };

    t["system.name"] = {[](ExperimentConfig& c, const std::string& v) {
                          c.system.kind = system_kind_from_string(v);
                        },
                        [](const ExperimentConfig& c) {
                          return std::string(to_string(c.system.kind));
                        }};
    dbl("system.tau", [](auto& c) -> auto& { return c.system.tau; });
    t["system.x0"] = {[](ExperimentConfig& c, const std::string& v) {
                        const auto l = parse_list(v);
                        c.x0 = Eigen::Map<const RealVector>(l.data(), static_cast<Eigen::Index>(l.size()));
                      },
                      [](const ExperimentConfig& c) {
                        return join(std::vector<double>(c.x0.data(), c.x0.data() + c.x0.size()));
                      }};
    integer("system.substeps", [](auto& c) -> auto& { return c.substeps; });
    dbl("system.sigma", [](auto& c) -> auto& { return c.system.lorenz.sigma; });
    dbl("system.r", [](auto& c) -> auto& { return c.system.lorenz.r; });
    dbl("system.b", [](auto& c) -> auto& { return c.system.lorenz.b; });
    dbl("system.d1", [](auto& c) -> auto& { return c.system.doublescroll.d1; });
    dbl("system.d2", [](auto& c) -> auto& { return c.system.doublescroll.d2; });
    dbl("system.d3", [](auto& c) -> auto& { return c.system.doublescroll.d3; });
    dbl("system.d4", [](auto& c) -> auto& { return c.system.doublescroll.d4; });
    dbl("system.d5", [](auto& c) -> auto& { return c.system.doublescroll.d5; });

    integer("features.taps", [](auto& c) -> auto& { return c.feature.taps; });
    integer("features.stride", [](auto& c) -> auto& { return c.feature.stride; });
    t["features.orders"] = {[](ExperimentConfig& c, const std::string& v) {
                              c.feature.orders.clear();
                              if (v == "none") return;
                              for (double o : parse_list(v)) {
                                if (o != std::floor(o)) throw ConfigError("orders must be integers");
                                c.feature.orders.push_back(static_cast<int>(o));
                              }
                            },
                            [](const ExperimentConfig& c) {
                              if (c.feature.orders.empty()) return std::string("none");
                              std::string s;
                              for (std::size_t i = 0; i < c.feature.orders.size(); ++i) {
                                s += (i ? ", " : "") + std::to_string(c.feature.orders[i]);
                              }
                              return s;
                            }};
    boolean("features.include_constant",
            [](auto& c) -> auto& { return c.feature.include_constant; });
    dbl("features.constant", [](auto& c) -> auto& { return c.feature.constant_value; });

    t["hamiltonian.diagonal_mode"] = {
        [](ExperimentConfig& c, const std::string& v) {
          if (v == "fixed") c.hamiltonian.diagonal_mode = DiagonalMode::fixed;
          else if (v == "random") c.hamiltonian.diagonal_mode = DiagonalMode::random;
          else throw ConfigError("expected fixed or random, got '" + v + "'");
        },
        [](const ExperimentConfig& c) {
          return std::string(c.hamiltonian.diagonal_mode == DiagonalMode::fixed ? "fixed" : "random");
        }};
    t["hamiltonian.diagonal"] = {
        [](ExperimentConfig& c, const std::string& v) { c.hamiltonian.diagonal = parse_list(v); },
        [](const ExperimentConfig& c) { return join(c.hamiltonian.diagonal); }};
    dbl("hamiltonian.diagonal_scale",
        [](auto& c) -> auto& { return c.hamiltonian.diagonal_scale; });
    dbl("hamiltonian.diagonal_min",
        [](auto& c) -> auto& { return c.hamiltonian.diagonal_min; });
    dbl("hamiltonian.diagonal_max",
        [](auto& c) -> auto& { return c.hamiltonian.diagonal_max; });
    t["hamiltonian.fill_constant"] = {
        [](ExperimentConfig& c, const std::string& v) {
          if (v == "none") c.hamiltonian.fill_constant.reset();
          else c.hamiltonian.fill_constant = parse_double(v);
        },
        [](const ExperimentConfig& c) {
          return c.hamiltonian.fill_constant ? format_double(*c.hamiltonian.fill_constant)
                                             : std::string("none");
        }};
    integer("hamiltonian.total_dim", [](auto& c) -> auto& { return c.hamiltonian.total_dim; });
    integer("hamiltonian.active_offset",
            [](auto& c) -> auto& { return c.hamiltonian.active_offset; });

    integer("reservoir.d_pad", [](auto& c) -> auto& { return c.d_pad; });
    dbl("reservoir.tau", [](auto& c) -> auto& { return c.reservoir_tau; });
    dbl("reservoir.g", [](auto& c) -> auto& { return c.g; });
    boolean("reservoir.check_spectrum", [](auto& c) -> auto& { return c.check_spectrum; });

    longint("pipeline.washout", [](auto& c) -> auto& { return c.washout; });
    longint("pipeline.train", [](auto& c) -> auto& { return c.train; });
    longint("pipeline.test", [](auto& c) -> auto& { return c.test; });
    dbl("pipeline.ridge", [](auto& c) -> auto& { return c.ridge; });
    t["pipeline.seed"] = {[](ExperimentConfig& c, const std::string& v) { c.seed = parse_u64(v); },
                          [](const ExperimentConfig& c) { return std::to_string(c.seed); }};
    boolean("pipeline.calibrate_g", [](auto& c) -> auto& { return c.calibration.enabled; });
    dbl("pipeline.g_min", [](auto& c) -> auto& { return c.calibration.g_min; });
    dbl("pipeline.g_max", [](auto& c) -> auto& { return c.calibration.g_max; });
    integer("pipeline.g_points", [](auto& c) -> auto& { return c.calibration.points; });
    dbl("pipeline.holdout_fraction",
        [](auto& c) -> auto& { return c.calibration.holdout_fraction; });
    dbl("pipeline.horizon_threshold", [](auto& c) -> auto& { return c.horizon_threshold; });
    dbl("pipeline.divergence_limit", [](auto& c) -> auto& { return c.divergence_limit; });

    boolean("metrics.enabled", [](auto& c) -> auto& { return c.metrics.enabled; });
    integer("metrics.ami_max_lag", [](auto& c) -> auto& { return c.metrics.ami_max_lag; });
    integer("metrics.ami_bins", [](auto& c) -> auto& { return c.metrics.ami_bins; });
    integer("metrics.embed_dim", [](auto& c) -> auto& { return c.metrics.embed_dim; });
    integer("metrics.lyapunov_component",
            [](auto& c) -> auto& { return c.metrics.lyapunov_component; });
    integer("metrics.lyapunov_max_steps",
            [](auto& c) -> auto& { return c.metrics.lyapunov_max_steps; });
    integer("metrics.lyapunov_fit_begin",
            [](auto& c) -> auto& { return c.metrics.lyapunov_fit_begin; });
    integer("metrics.lyapunov_fit_end",
            [](auto& c) -> auto& { return c.metrics.lyapunov_fit_end; });
    integer("metrics.decimation", [](auto& c) -> auto& { return c.metrics.decimation; });
    integer("metrics.psd_component", [](auto& c) -> auto& { return c.metrics.psd_component; });
    return t;
  }();
  return table;
}

struct Entry {
  std::string key;  // section.key
  std::string value;
  int line;
};

std::vector<Entry> tokenize(const std::string& text, const std::string& source) {
  std::vector<Entry> entries;
  std::istringstream is(text);
  std::string raw, section;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto comment = raw.find_first_of("#;");
    std::string line = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    if (section.empty()) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": key outside any section");
    }
    const std::string key = section + "." + trim(line.substr(0, eq));
    for (const auto& e : entries) {
      if (e.key == key) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": " + key +
                          ": duplicate key (first set on line " + std::to_string(e.line) + ")");
      }
    }
    entries.push_back({key, trim(line.substr(eq + 1)), line_no});
  }
  return entries;
}

}  // namespace

void validate_config(const ExperimentConfig& c) {
  auto fail = [](const std::string& field, const std::string& msg) {
    throw ConfigError(field + ": " + msg);
  };
  if (!(c.system.tau > 0.0)) fail("system.tau", "must be positive");
  if (c.x0.size() != SystemSpec::dimension) fail("system.x0", "needs 3 components");
  if (c.substeps < 1) fail("system.substeps", "must be >= 1");
  if (c.feature.input_dim != SystemSpec::dimension) fail("features", "input dimension must be 3");
  try {
    c.feature.validate();
  } catch (const ConfigError& e) {
    fail("features", e.what());
  }
  if (c.d_pad < SystemSpec::dimension) fail("reservoir.d_pad", "must be >= 3");
  if (c.reservoir_tau < 0.0) fail("reservoir.tau", "must be >= 0");
  if (c.washout < c.feature.warmup()) {
    fail("pipeline.washout", "must be >= (taps-1)*stride+1 = " + std::to_string(c.feature.warmup()));
  }
  if (c.test < 0) fail("pipeline.test", "must be >= 0");
  if (c.ridge < 0.0) fail("pipeline.ridge", "must be >= 0");
  if (c.calibration.enabled) {
    if (!(c.calibration.g_min > 0.0) || c.calibration.g_max < c.calibration.g_min) {
      fail("pipeline.g_min", "need 0 < g_min <= g_max");
    }
    if (c.calibration.points < 1) fail("pipeline.g_points", "must be >= 1");
    if (!(c.calibration.holdout_fraction > 0.0 && c.calibration.holdout_fraction < 1.0)) {
      fail("pipeline.holdout_fraction", "must lie in (0, 1)");
    }
  }
  if (!(c.horizon_threshold > 0.0)) fail("pipeline.horizon_threshold", "must be positive");
  if (!(c.divergence_limit > 0.0)) fail("pipeline.divergence_limit", "must be positive");
  if (c.hamiltonian.diagonal_mode == DiagonalMode::random &&
      !(c.hamiltonian.diagonal_max > c.hamiltonian.diagonal_min)) {
    fail("hamiltonian.diagonal_max", "must exceed diagonal_min");
  }
  if (c.metrics.lyapunov_component < 0 || c.metrics.lyapunov_component >= SystemSpec::dimension) {
    fail("metrics.lyapunov_component", "must be 0, 1 or 2");
  }
  if (c.metrics.psd_component < 0 || c.metrics.psd_component >= SystemSpec::dimension) {
    fail("metrics.psd_component", "must be 0, 1 or 2");
  }
}

void set_config_value(ExperimentConfig& cfg, const std::string& dotted_key,
                      const std::string& value) {
  const auto& table = fields();
  const auto it = table.find(dotted_key);
  if (it == table.end()) throw ConfigError(dotted_key + ": unknown key");
  try {
    it->second.set(cfg, value);
  } catch (const ConfigError& e) {
    throw ConfigError(dotted_key + ": " + e.what());
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  const std::vector<Entry> entries = tokenize(text, source);
  SystemKind kind = SystemKind::lorenz63;
  for (const auto& e : entries) {
    if (e.key == "system.name") {
      try {
        kind = system_kind_from_string(e.value);
      } catch (const ConfigError& err) {
        throw ConfigError(source + ":" + std::to_string(e.line) + ": system.name: " + err.what());
      }
    }
  }
  ExperimentConfig cfg = ExperimentConfig::preset(kind);
  for (const auto& e : entries) {
    try {
      set_config_value(cfg, e.key, e.value);
    } catch (const ConfigError& err) {
      throw ConfigError(source + ":" + std::to_string(e.line) + ": " + err.what());
    }
  }
  try {
    validate_config(cfg);
  } catch (const ConfigError& err) {
    throw ConfigError(source + ": " + err.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(cfg) + "\n";
  return out;
}

std::string preset_text(SystemKind kind) {
  const ExperimentConfig cfg = ExperimentConfig::preset(kind);
  std::string out;
  std::string section;
  for (const auto& [key, field] : fields()) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + sec + "]\n";
      section = sec;
    }
    out += key.substr(dot + 1) + " = " + field.get(cfg) + "\n";
  }
  return out;
}

void apply_smoke(ExperimentConfig& cfg) {
  cfg.washout = std::max<long>(100, cfg.feature.warmup());
  cfg.train = 500;
  cfg.test = 500;
}

}  // namespace qrc
