#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qrc/cli.hpp"
#include "qrc/csv.hpp"
#include "qrc/dynamics.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace qrc;

namespace {

const std::string kLorenz = QRC_PRESET_DIR "/lorenz63.preset";
const std::string kDoubleScroll = QRC_PRESET_DIR "/doublescroll.preset";

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome qrc_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qrc");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "exp.cfg";
  std::ofstream(p) << text;
  return p;
}

long data_rows(const fs::path& csv) { return static_cast<long>(read_csv(csv).rows.size()); }

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(qrc_cli({}).code == cli::kExitConfig);
  CHECK(qrc_cli({"frobnicate"}).code == cli::kExitConfig);
  CHECK(qrc_cli({"run", "--out", "/tmp/x"}).code == cli::kExitConfig);
  CHECK(qrc_cli({"--help"}).code == cli::kExitOk);

  const auto dir = testing::fresh_dir("cli_usage");
  const auto cfg = write_config(dir, "[pipeline]\nridge = -2\n");
  const Outcome o = qrc_cli({"run", "--config", cfg.string(), "--out", (dir / "o").string()});
  CHECK(o.code == cli::kExitConfig);
  CHECK(o.err.find("pipeline.ridge") != std::string::npos);

  const auto bad = write_config(dir, "[pipeline]\nwashout = ten\n");
  const Outcome b = qrc_cli({"generate", "--config", bad.string(), "--out",
                             (dir / "g.csv").string()});
  CHECK(b.code == cli::kExitConfig);
  CHECK(b.err.find("exp.cfg:2: pipeline.washout") != std::string::npos);
}

TEST_CASE("generate writes the full standardized series") {
  const auto dir = testing::fresh_dir("cli_generate");
  const fs::path out = dir / "lorenz.csv";
  REQUIRE(qrc_cli({"generate", "--config", kLorenz, "--out", out.string()}).code == 0);
  CHECK(data_rows(out) == 31601);
  const Trajectory t = read_trajectory_csv(out);
  CHECK(t.tau == doctest::Approx(0.025));
  CHECK(t.states.topRows(4600).colwise().mean().norm() < 1e-10);
  const auto stats = nlohmann::json::parse(slurp(dir / "lorenz.csv.stats.json"));
  CHECK(stats["samples"] == 31601);
  CHECK(stats["stddev"].size() == 3);

  const fs::path ds = dir / "ds.csv";
  REQUIRE(qrc_cli({"generate", "--config", kDoubleScroll, "--out", ds.string()}).code == 0);
  CHECK(data_rows(ds) == 65601);

  CHECK(qrc_cli({"generate", "--config", kLorenz, "--out", (dir / "missing/x.csv").string()})
            .code == cli::kExitConfig);
}

TEST_CASE("run emits artifacts and is reproducible") {
  const auto dir = testing::fresh_dir("cli_run");
  const auto a = dir / "a", b = dir / "b";
  REQUIRE(qrc_cli({"run", "--config", kLorenz, "--out", a.string(), "--smoke",
                   "--diagnostics"}).code == 0);
  REQUIRE(qrc_cli({"run", "--config", kLorenz, "--out", b.string(), "--smoke"}).code == 0);
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  CHECK(slurp(a / "predicted.csv") == slurp(b / "predicted.csv"));

  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["config_digest"].get<std::string>().size() == 64);
  CHECK(manifest["metrics"]["test_nrmse"].size() == 3);
  CHECK(manifest["parameters"]["pipeline.train"] == "500");
  CHECK(manifest["wall_clock_seconds"].get<double>() >= 0.0);
  for (const auto& [name, path] : manifest["files"].items()) {
    INFO(name);
    CHECK(fs::exists(path.get<std::string>()));
  }

  const Trajectory pred = read_trajectory_csv(a / "predicted.csv");
  CHECK(pred.length() == 500);
  std::ifstream pcsv(a / "predicted.csv");
  std::string header, first;
  std::getline(pcsv, header);
  std::getline(pcsv, first);
  CHECK(header == "t,c0,c1,c2");
  CHECK(std::stod(first) == doctest::Approx(600 * 0.025));

  const CsvTable diag = read_csv(a / "diagnostics.csv");
  CHECK(diag.header == std::vector<std::string>{"step", "trace", "min_eig", "purity"});
  // 599 teacher-forced steps, then 499 closed-loop steps.
  CHECK(diag.rows.size() == 1098);
  CHECK(read_csv(a / "psd1_target.csv").header == std::vector<std::string>{"freq", "value"});
  CHECK(read_csv(a / "calibration.csv").rows.size() == 13);

  // Different seed with a fixed diagonal changes nothing but the digest.
  const auto c = dir / "c";
  REQUIRE(qrc_cli({"run", "--config", kLorenz, "--out", c.string(), "--smoke", "--seed", "9"})
              .code == 0);
  const auto mc = nlohmann::json::parse(slurp(c / "manifest.json"));
  CHECK(mc["seed"] == 9);
  CHECK(mc["config_digest"] != manifest["config_digest"]);
}

TEST_CASE("smoke run finishes quickly") {
  const auto dir = testing::fresh_dir("cli_smoke_time");
  const auto start = std::chrono::steady_clock::now();
  REQUIRE(qrc_cli({"run", "--config", kLorenz, "--out", dir.string(), "--smoke"}).code == 0);
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() < 10.0);
}

TEST_CASE("runtime failures exit 1 and name the stage") {
  const auto dir = testing::fresh_dir("cli_runtime");
  const auto cfg = write_config(dir, "[system]\ntau = 10\n");
  const Outcome o = qrc_cli({"run", "--config", cfg.string(), "--out", (dir / "o").string(),
                             "--smoke"});
  CHECK(o.code == cli::kExitRuntime);
  CHECK(o.err.find("generate") != std::string::npos);
}

TEST_CASE("emitted CSVs round-trip at full precision") {
  const auto dir = testing::fresh_dir("cli_csv");
  CsvTable t{{"a", "b"}, {{1.0 / 3.0, -0.0}, {1e-300, 6.02214076e23}, {std::nan(""), -7.0}}};
  write_csv(dir / "t.csv", t);
  const CsvTable back = read_csv(dir / "t.csv");
  CHECK(back.header == t.header);
  CHECK(back.rows[0][0] == 1.0 / 3.0);
  CHECK(std::signbit(back.rows[0][1]));
  CHECK(back.rows[1][0] == 1e-300);
  CHECK(back.rows[1][1] == 6.02214076e23);
  CHECK(std::isnan(back.rows[2][0]));
  CHECK(back.column("b")[2] == -7.0);
  CHECK(slurp(dir / "t.csv").find('\r') == std::string::npos);

  std::ofstream(dir / "bad.csv") << "a,b\n1,2\n3\n";
  CHECK_THROWS_WITH(read_csv(dir / "bad.csv"), doctest::Contains("3"));

  REQUIRE(qrc_cli({"run", "--config", kLorenz, "--out", (dir / "run").string(), "--smoke"})
              .code == 0);
  for (const auto& entry : fs::directory_iterator(dir / "run")) {
    if (entry.path().extension() != ".csv") continue;
    INFO(entry.path().string());
    const CsvTable table = read_csv(entry.path());
    std::ostringstream os;
    write_csv(os, table);
    CHECK(os.str() == slurp(entry.path()));
  }
}

TEST_CASE("sweep spec parsing") {
  const auto pts = cli::parse_sweep_spec("g=logspace(-2,3,13);seed=0,1,2");
  REQUIRE(pts.size() == 39);
  CHECK(pts[0].assignments.size() == 2);
  CHECK(pts[0].assignments[0].first == "reservoir.g");
  CHECK(pts[0].assignments[1].first == "pipeline.seed");
  CHECK(std::stod(pts[0].assignments[0].second) == doctest::Approx(0.01));
  CHECK(std::stod(pts[38].assignments[0].second) == doctest::Approx(1000.0));
  CHECK(pts[1].assignments[1].second == "1");

  const auto lin = cli::parse_sweep_spec("ridge = linspace(0, 1, 3)");
  REQUIRE(lin.size() == 3);
  CHECK(lin[1].assignments[0].second == "0.5");

  const auto dir = testing::fresh_dir("cli_sweep_spec");
  std::ofstream(dir / "grid.txt") << "# grid\ndiagonal_scale = 0.5, 1\nseed = 3\n";
  const auto f = cli::parse_sweep_spec((dir / "grid.txt").string());
  REQUIRE(f.size() == 2);
  CHECK(f[0].assignments[0].first == "hamiltonian.diagonal_scale");

  CHECK_THROWS(cli::parse_sweep_spec(""));
  CHECK_THROWS(cli::parse_sweep_spec("g"));
  CHECK_THROWS(cli::parse_sweep_spec("g=logspace(1,2)"));
}

TEST_CASE("sweep over 13 g values and 3 seeds") {
  const auto dir = testing::fresh_dir("cli_sweep");
  const Outcome o = qrc_cli({"sweep", "--config", kLorenz, "--sweep",
                             "g=logspace(-2,3,13);seed=0,1,2", "--out", dir.string(), "--smoke"});
  REQUIRE(o.code == 0);
  long manifests = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (fs::exists(e.path() / "manifest.json")) ++manifests;
  }
  CHECK(manifests == 39);

  const CsvTable s = read_csv(dir / "summary.csv");
  REQUIRE(s.rows.size() == 39);
  const auto h = s.column("valid_horizon");
  std::vector<double> sorted = h;
  std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());
  CHECK(h == sorted);

  // Each summary row agrees with its point's manifest.
  const auto pt = s.column("point");
  const auto g = s.column("reservoir.g");
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    std::ostringstream name;
    name << "point_" << std::setw(4) << std::setfill('0') << static_cast<int>(pt[i]);
    const auto m = nlohmann::json::parse(slurp(dir / name.str() / "manifest.json"));
    CHECK(m["metrics"]["valid_horizon"].get<double>() == h[i]);
    CHECK(m["metrics"]["g"].get<double>() == doctest::Approx(g[i]));
    CHECK(m["calibrated_g"].is_null());
  }
}

TEST_CASE("single-point sweep reproduces run") {
  const auto dir = testing::fresh_dir("cli_sweep_single");
  REQUIRE(qrc_cli({"run", "--config", kLorenz, "--out", (dir / "run").string(), "--smoke"})
              .code == 0);
  REQUIRE(qrc_cli({"sweep", "--config", kLorenz, "--sweep", "seed=0", "--out",
                   (dir / "sweep").string(), "--smoke"}).code == 0);
  const fs::path point = dir / "sweep" / "point_0000";
  for (const char* f : {"metrics.csv", "predicted.csv", "target.csv", "calibration.csv",
                        "psd1_predicted.csv", "config.resolved"}) {
    INFO(f);
    CHECK(slurp(point / f) == slurp(dir / "run" / f));
  }
}

TEST_CASE("sweep records partial failures") {
  const auto dir = testing::fresh_dir("cli_sweep_partial");
  const Outcome o = qrc_cli({"sweep", "--config", kLorenz, "--sweep", "system.tau=0.025,10",
                             "--out", dir.string(), "--smoke"});
  CHECK(o.code == 0);
  CHECK(fs::exists(dir / "point_0000" / "manifest.json"));
  CHECK(fs::exists(dir / "point_0001" / "error.txt"));
  const CsvTable s = read_csv(dir / "summary.csv");
  CHECK(s.column("ok") == std::vector<double>{1.0, 0.0});

  const auto all_bad = testing::fresh_dir("cli_sweep_fail");
  CHECK(qrc_cli({"sweep", "--config", kLorenz, "--sweep", "system.tau=10", "--out",
                 all_bad.string(), "--smoke"}).code == cli::kExitRuntime);
  CHECK(qrc_cli({"sweep", "--config", kLorenz, "--sweep", "ridge=-1", "--out",
                 all_bad.string(), "--smoke"}).code == cli::kExitConfig);
  CHECK(qrc_cli({"sweep", "--config", kLorenz, "--sweep", "nope=1", "--out",
                 all_bad.string(), "--smoke"}).code == cli::kExitConfig);
}

TEST_CASE("metrics subcommand recomputes run metrics") {
  const auto dir = testing::fresh_dir("cli_metrics");
  REQUIRE(qrc_cli({"run", "--config", kLorenz, "--out", (dir / "run").string(), "--smoke"})
              .code == 0);
  REQUIRE(qrc_cli({"metrics", "--target", (dir / "run/target.csv").string(), "--predicted",
                   (dir / "run/predicted.csv").string(), "--out", (dir / "m").string()})
              .code == 0);
  const CsvTable run = read_csv(dir / "run/metrics.csv");
  const CsvTable again = read_csv(dir / "m/metrics.csv");
  for (const char* col : {"test_nrmse_c0", "test_nrmse_c1", "test_nrmse_c2", "ami_delay"}) {
    INFO(col);
    CHECK(again.column(col)[0] == doctest::Approx(run.column(col)[0]).epsilon(1e-12));
  }
  CHECK(slurp(dir / "m/psd2_predicted.csv") == slurp(dir / "run/psd2_predicted.csv"));
  CHECK(slurp(dir / "m/divergence_target.csv") == slurp(dir / "run/divergence_target.csv"));
  CHECK(qrc_cli({"metrics", "--target", (dir / "nope.csv").string(), "--predicted",
                 (dir / "run/predicted.csv").string(), "--out", (dir / "m2").string()})
            .code != 0);
}
