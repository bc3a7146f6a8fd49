#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "magpot/errors.hpp"
#include "magpot/fields.hpp"
#include "magpot/forward.hpp"

namespace magpot {

/// Underdetermined or ill-posed fit input.
class DegenerateFit : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

enum class PrecisionPolicy { automatic, double_only, extended };

PrecisionPolicy parse_precision(std::string_view text);
std::string to_string(PrecisionPolicy policy);

/// Discrete norms: ||v||_Omega = delta^{3/2} ||v||_2 and
/// ||s||_dOmega = sqrt(|dOmega| / M) ||s||_2.
struct FieldRatio {
  double consistent = 0.0;     // ||v||_Omega / ||P v||_dOmega
  double paper_literal = 0.0;  // |dOmega| / (M delta^3) * ||v|| / ||P v||
};

/// Throws ZeroField for v = 0 and PotentialNumericallyZero when
/// ||P v|| < 1e3 eps ||P||_F ||v||.
FieldRatio field_ratio_Cf(const ForwardMatrix& P, const LatticeField& f);

struct OperatorConstant {
  double C_delta = 0.0;        // delta^{3/2} / (sqrt(|dOmega|/M) sigma_min)
  double C_delta_paper = 0.0;  // delta^3 ||(P^T P)^{-1}||_2 = delta^3 / sigma_min^2
  double sigma_min = 0.0;      // smallest singular value of P (SVD path)
  double sigma_min_check = 0.0;  // same, by inverse iteration on P^T P
  double kappa = 0.0;
  int precision_bits = 53;
};

/// sigma_min by two independent methods that must agree to 1e-2 relative.
/// `automatic` starts in double and switches to double-double arithmetic when
/// kappa > 1e12 or the methods disagree. Throws CertificationFailure when P
/// is rank deficient at the working precision.
OperatorConstant operator_constant(const ForwardMatrix& P,
                                   PrecisionPolicy policy = PrecisionPolicy::automatic);

/// lambda = 0: minimum-norm least squares through the SVD (rank deficiency
/// raises CertificationFailure). lambda > 0: minimizer of
/// ||P v - s||_dOmega^2 + lambda ||v||_Omega^2.
LatticeField invert(const ForwardMatrix& P, const Eigen::VectorXd& samples, double lambda = 0.0);

struct FitResult {
  double gamma = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
  double residual_rms = 0.0;  // in log C
  std::size_t n_points = 0;
  bool alpha_at_bound = false;  // minimizer sits on the search interval's edge
};

struct FitPoint {
  double delta;
  double value;
};

/// Least squares of log C = gamma + beta delta^{-alpha}. (gamma, beta) are
/// solved exactly for each alpha; alpha in [0.05, 3] by a grid scan followed
/// by golden-section refinement. Ties go to the smallest alpha.
FitResult fit_exponential(std::span<const FitPoint> points);

struct ReferenceFit {
  const char* series;
  double gamma;
  double beta;
  double alpha;
};

/// Published parameters for the three series of the reference experiment
/// (M ~ 330000). Kept for comparison only; desk-scale runs differ.
inline constexpr std::array<ReferenceFit, 3> kReferenceFits{{
    {"C", -7.933, 4.562, 0.8044},
    {"Cf_a0.5", -5.493, 3.893, 0.4717},
    {"Cf_a0.25", -2.987, 1.944, 0.6859},
}};

struct SweepField {
  std::string label;  // column suffix, e.g. "a0.5"
  SmoothField field;
};

struct SweepConfig {
  std::vector<int> n_list;
  /// Grid points per face edge; per-n default when absent.
  std::optional<int> k;
  std::vector<SweepField> fields;
  PrecisionPolicy policy = PrecisionPolicy::automatic;
  /// Timing makes output nondeterministic, so it is opt-in.
  bool record_timing = false;
};

/// Smallest k >= 10 with M = 6k^2 >= 10 * 3 N_delta.
int default_points_per_edge(int n);

/// The bump fields at a = 1/2 and a = 1/4.
std::vector<SweepField> default_sweep_fields();

struct StabilityRecord {
  int n = 0;
  double delta = 0.0;
  std::size_t N = 0;
  std::size_t M = 0;
  int k = 0;
  std::optional<OperatorConstant> constant;
  std::vector<std::optional<FieldRatio>> field_ratios;  // one per SweepField
  std::optional<double> wall_ms;
  std::vector<std::string> errors;  // "label: message"
};

struct SeriesFit {
  std::string label;  // "C_delta" or "Cf_<label>"
  std::optional<FitResult> fit;
  std::string error;
};

struct SweepResult {
  std::vector<std::string> field_labels;
  std::vector<StabilityRecord> records;
  std::vector<SeriesFit> fits;
};

/// Records ordered by n. A failing record keeps its error messages and the
/// sweep continues.
SweepResult sweep(const SweepConfig& config);

/// (delta, value) pairs of a series, skipping records where it is missing.
std::vector<FitPoint> series_points(const SweepResult& result, std::size_t series);

}  // namespace magpot
