#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "../tools/cli.hpp"
#include "magpot/io.hpp"

using namespace magpot;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "magpot");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "magpot_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli({}).code == cli::kUsage);
  CHECK(run_cli({"no-such-command"}).code == cli::kUsage);
  CHECK(run_cli({"invisible-demo", "nosuch"}).code == cli::kUsage);
  CHECK(run_cli({"stability-sweep", "--n-list", "3,2", "--out", fresh_dir("bad").string()}).code == cli::kUsage);
  CHECK(run_cli({"forward", "--field", R"({"type":"dipole"})", "--out", fresh_dir("bad").string()}).code ==
        cli::kUsage);
  CHECK(run_cli({"--help"}).code == cli::kOk);
}

TEST_CASE("invisible triangle demo") {
  const fs::path dir = fresh_dir("demo");
  const Outcome r = run_cli({"--out", dir.string(), "invisible-demo", "triangle", "--points", "8"});
  CHECK(r.code == cli::kOk);
  const auto j = read_json(dir / "invisible_demo.json");
  CHECK(j["fixture"] == "triangle");
  CHECK(j["max_abs_potential"].get<double>() < 1e-12);
  CHECK(fs::exists(dir / "run_config.json"));
}

TEST_CASE("forward samples are odd under reflection for a z-magnetized cube") {
  const fs::path dir = fresh_dir("forward");
  const std::string field = R"({"type":"box_simple","parts":[{"lo":[-0.25,-0.25,-0.25],"hi":[0.25,0.25,0.25],"v":[0,0,1]}]})";
  REQUIRE(run_cli({"--out", dir.string(), "forward", "--field", field, "--k", "4"}).code == cli::kOk);
  const Samples s = read_samples_csv(dir / "forward_samples.csv");
  REQUIRE(s.points.size() == 96);
  std::map<std::tuple<double, double, double>, double> by_point;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    by_point[{s.points[i][0], s.points[i][1], s.points[i][2]}] = s.values(static_cast<Eigen::Index>(i));
  }
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const Vec3& p = s.points[i];
    const auto it = by_point.find({p[0], p[1], -p[2]});
    REQUIRE(it != by_point.end());
    CHECK(it->second == doctest::Approx(-s.values(static_cast<Eigen::Index>(i))).epsilon(1e-12));
  }
}

TEST_CASE("forward then invert recovers a lattice field") {
  const fs::path dir = fresh_dir("roundtrip");
  const std::string field = R"({"type":"lattice","n":2,"coeffs":[0.1,-0.2,0.3,0.4,-0.5,0.6,0.7,-0.8,0.9,1.0,-1.1,1.2,)"
                            R"(0.3,0.2,0.1,-0.4,0.5,-0.6,0.2,0.2,0.2,-1,0,1]})";
  REQUIRE(run_cli({"--out", dir.string(), "forward", "--field", field, "--k", "6"}).code == cli::kOk);
  const Outcome r = run_cli({"--out", dir.string(), "invert", "--samples", (dir / "forward_samples.csv").string(),
                             "--n", "2", "--k", "6", "--reference", field});
  REQUIRE(r.code == cli::kOk);
  const auto j = read_json(dir / "inverted_field.json");
  CHECK(j["relative_error"].get<double>() < 1e-6);
  // grid mismatch
  CHECK(run_cli({"--out", dir.string(), "invert", "--samples", (dir / "forward_samples.csv").string(), "--n", "2",
                 "--k", "5"})
            .code == cli::kUsage);
}

TEST_CASE("stability sweep output is byte-reproducible") {
  const fs::path a = fresh_dir("sweep_a"), b = fresh_dir("sweep_b");
  for (const fs::path& dir : {a, b}) {
    REQUIRE(run_cli({"--out", dir.string(), "stability-sweep", "--n-list", "1,2,3", "--k", "6"}).code == cli::kOk);
  }
  for (const char* file : {"stability_sweep.csv", "stability_plot.csv"}) {
    REQUIRE(fs::exists(a / file));
    CHECK(slurp(a / file) == slurp(b / file));
  }
  // configs differ only in the output directory
  auto ca = read_json(a / "run_config.json"), cb = read_json(b / "run_config.json");
  ca.erase("out");
  cb.erase("out");
  CHECK(ca == cb);
  const std::string csv = slurp(a / "stability_sweep.csv");
  CHECK(csv.rfind("delta,N,M,C_delta,C_delta_paper,Cf_a0.5,Cf_a0.25,sigma_min,precision_bits,wall_ms\n", 0) == 0);

  // the fit command reads the sweep back
  const fs::path f = fresh_dir("fit");
  CHECK(run_cli({"--out", f.string(), "fit", "--input", (a / "stability_sweep.csv").string()}).code == cli::kOk);
  CHECK(fs::exists(f / "fit.csv"));
}

TEST_CASE("config files are read and flags override them") {
  const fs::path dir = fresh_dir("config");
  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"command":"stability-sweep","n_list":[1,2],"k":4,"bump_a":[]})";
  REQUIRE(run_cli({"--config", cfg.string(), "--out", dir.string(), "stability-sweep", "--k", "5"}).code == cli::kOk);
  const auto used = read_json(dir / "run_config.json");
  CHECK(used["k"] == 5);
  CHECK(used["n_list"] == nlohmann::json::array({1, 2}));
  CHECK(slurp(dir / "stability_sweep.csv").find(",150,") != std::string::npos);  // M = 6 * 5^2

  std::ofstream(dir / "unknown.json") << R"({"colour":"red"})";
  CHECK(run_cli({"--config", (dir / "unknown.json").string(), "--out", dir.string(), "stability-sweep"}).code ==
        cli::kUsage);
  std::ofstream(dir / "other.json") << R"({"command":"fit"})";
  CHECK(run_cli({"--config", (dir / "other.json").string(), "--out", dir.string(), "stability-sweep"}).code ==
        cli::kUsage);
}

TEST_CASE("a sweep in which every record fails exits with 3") {
  const fs::path dir = fresh_dir("allfail");
  const Outcome r = run_cli({"--out", dir.string(), "stability-sweep", "--n-list", "6", "--k", "10", "--no-fields"});
  CHECK(r.code == cli::kNumerical);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("json format") {
  const fs::path dir = fresh_dir("json");
  REQUIRE(run_cli({"--out", dir.string(), "--format", "json", "stability-sweep", "--n-list", "1,2", "--k", "4",
                   "--no-fields"})
              .code == cli::kOk);
  const auto j = read_json(dir / "stability_sweep.json");
  CHECK(j["records"].size() == 2);
  CHECK(run_cli({"--out", dir.string(), "--format", "xml", "stability-sweep"}).code == cli::kUsage);
}
