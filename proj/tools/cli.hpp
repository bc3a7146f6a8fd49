#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace magpot::cli {

/// Everything a run depends on. Serialized next to the outputs so that a run
/// can be repeated from its config and seed.
struct RunConfig {
  std::string command;
  std::string field;  // inline JSON or path
  std::optional<int> n;
  std::optional<int> k;
  std::vector<int> n_list{2, 3, 4, 5, 6};
  std::string out = ".";
  std::string format = "csv";
  std::string precision = "auto";
  double rtol = 1e-10;
  std::uint64_t seed = 1;

  // invisible-demo
  std::string fixture;
  int points = 20;
  double r = 1.0;
  double alpha = 0.5;
  double a = 0.25;

  // invert
  std::string samples;
  double lambda = 0.0;
  std::string reference;

  // stability-sweep
  std::vector<double> bump_a{0.5, 0.25};
  bool timing = false;

  // fit
  std::string input;
  std::string column = "C_delta";
};

nlohmann::json to_json(const RunConfig& c);
/// Overwrites the fields present in `j`; unknown keys are a parse error.
void apply_json(RunConfig& c, const nlohmann::json& j);

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kNumerical = 3;

/// Runs one command. Human-readable text goes to `out`, diagnostics to `err`,
/// machine-readable results to files under --out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace magpot::cli
