#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "magpot/fields.hpp"
#include "magpot/stability.hpp"

namespace magpot {

using ParsedField = std::variant<BoxSimpleField, LatticeField, SmoothField>;

/// Field descriptions:
///   {"type":"box_simple","parts":[{"lo":[..],"hi":[..],"v":[..]}]}
///   {"type":"lattice","n":4,"coeffs":[...]}
///   {"type":"bump","a":0.25}
///   {"type":"nested_balls","r":..,"alpha":..,"v":[..]}
/// Anything else raises ParseError.
ParsedField parse_field(const nlohmann::json& j);
/// Inline JSON text when it starts with '{', otherwise a path to a JSON file.
ParsedField load_field(std::string_view text_or_path);

nlohmann::json to_json(const BoxSimpleField& f);
nlohmann::json to_json(const LatticeField& f);

/// Shortest round-trip decimal form.
std::string format_number(double x);

struct Samples {
  std::vector<Vec3> points;
  Eigen::VectorXd values;
};

/// CSV with header x,y,z,potential.
void write_samples_csv(const std::filesystem::path& path, const std::vector<Vec3>& points,
                       const Eigen::VectorXd& values);
Samples read_samples_csv(const std::filesystem::path& path);

/// delta,N,M,C_delta,C_delta_paper,Cf_<label>...,sigma_min,precision_bits,wall_ms
/// with empty cells for failed entries.
std::string sweep_csv(const SweepResult& result);
/// Records, errors and the per-series fits.
nlohmann::json sweep_json(const SweepResult& result);
/// series,delta,delta_pow_neg_alpha,log_value,log_fit: log C against
/// delta^-alpha for every series with a fit.
std::string plot_data_csv(const SweepResult& result);

nlohmann::json to_json(const FitResult& fit);

void write_text(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace magpot
