#include "magpot/stability.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "magpot/dense.hpp"

namespace magpot {

namespace {

constexpr double kBoundaryArea = 6.0;
constexpr double kKappaSwitch = 1e12;
constexpr double kAgreement = 1e-2;

double surface_weight(const ForwardMatrix& P) {
  return kBoundaryArea / static_cast<double>(P.rows());
}

OperatorConstant finish(const ForwardMatrix& P, double sigma_max, double sigma_min,
                        double sigma_check, int bits) {
  const double delta = P.lattice.delta();
  OperatorConstant out;
  out.sigma_min = sigma_min;
  out.sigma_min_check = sigma_check;
  out.kappa = sigma_max / sigma_min;
  out.C_delta = std::pow(delta, 1.5) / (std::sqrt(surface_weight(P)) * sigma_min);
  out.C_delta_paper = delta * delta * delta / (sigma_min * sigma_min);
  out.precision_bits = bits;
  return out;
}

bool agree(double a, double b) { return std::abs(a - b) <= kAgreement * std::max(a, b); }

[[noreturn]] void rank_deficient(double sigma_min, double sigma_max, int bits) {
  throw CertificationFailure("rank deficient to working precision: sigma_min / sigma_max = " +
                             std::to_string(sigma_min / sigma_max) + " at " +
                             std::to_string(bits) + " bits");
}

struct Estimate {
  double sigma_max;
  double sigma_min;
  double sigma_check;  // NaN when the second method broke down
};

Estimate estimate_double(const Eigen::MatrixXd& P) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(P);
  const Eigen::VectorXd& sv = svd.singularValues();
  Estimate e{sv(0), sv(sv.size() - 1), std::numeric_limits<double>::quiet_NaN()};

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(P);
  const auto n = P.cols();
  dense::Matrix<double> lower(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      lower(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = qr.matrixQR()(i, j);
    }
  }
  for (std::size_t i = 0; i < lower.rows(); ++i) {
    if (lower(i, i) == 0.0) return e;
  }
  const auto it = dense::smallest_eigenvalue(lower, 1e-12, 2000);
  if (it.eigenvalue > 0.0 && std::isfinite(it.eigenvalue)) e.sigma_check = std::sqrt(it.eigenvalue);
  return e;
}

Estimate estimate_extended(const Eigen::MatrixXd& P) {
  const auto a = dense::from_eigen<DoubleDouble>(P);
  const auto sv = dense::singular_values(a);
  Estimate e{static_cast<double>(sv.front()), static_cast<double>(sv.back()),
             std::numeric_limits<double>::quiet_NaN()};
  dense::Matrix<DoubleDouble> lower;
  if (!dense::cholesky(dense::gram(a), lower)) return e;
  const auto it = dense::smallest_eigenvalue(lower, 1e-12, 2000);
  if (it.eigenvalue > 0.0 && std::isfinite(it.eigenvalue)) e.sigma_check = std::sqrt(it.eigenvalue);
  return e;
}

double floor_for(const Eigen::MatrixXd& P, double sigma_max, double eps) {
  return 10.0 * static_cast<double>(P.cols()) * eps * sigma_max;
}

}  // namespace

PrecisionPolicy parse_precision(std::string_view text) {
  if (text == "auto") return PrecisionPolicy::automatic;
  if (text == "double") return PrecisionPolicy::double_only;
  if (text == "extended") return PrecisionPolicy::extended;
  throw InvalidInput("unknown precision policy '" + std::string(text) +
                     "' (expected auto, double or extended)");
}

std::string to_string(PrecisionPolicy policy) {
  switch (policy) {
    case PrecisionPolicy::automatic: return "auto";
    case PrecisionPolicy::double_only: return "double";
    case PrecisionPolicy::extended: return "extended";
  }
  return "auto";
}

FieldRatio field_ratio_Cf(const ForwardMatrix& P, const LatticeField& f) {
  if (!(f.lattice() == P.lattice)) throw DimensionMismatch("field lattice differs from matrix lattice");
  if (f.is_zero()) throw ZeroField("stability ratio needs a nonzero field");
  const Eigen::VectorXd& v = f.coeffs();
  const double vn = v.norm();
  const double pvn = (P.entries * v).norm();
  const double eps = std::numeric_limits<double>::epsilon();
  if (pvn < 1e3 * eps * P.entries.norm() * vn) {
    throw PotentialNumericallyZero("potential numerically zero: precision exhausted");
  }
  const double delta = P.lattice.delta();
  const double w = surface_weight(P);
  return FieldRatio{std::pow(delta, 1.5) * vn / (std::sqrt(w) * pvn),
                    w / (delta * delta * delta) * vn / pvn};
}

OperatorConstant operator_constant(const ForwardMatrix& P, PrecisionPolicy policy) {
  if (P.rows() < P.cols()) {
    throw CertificationFailure("rank deficient to working precision: M = " +
                               std::to_string(P.rows()) + " < 3N = " + std::to_string(P.cols()));
  }
  if (policy != PrecisionPolicy::extended) {
    const Estimate e = estimate_double(P.entries);
    const bool above = e.sigma_min > floor_for(P.entries, e.sigma_max, std::numeric_limits<double>::epsilon());
    const bool certified = above && agree(e.sigma_min, e.sigma_check);
    if (policy == PrecisionPolicy::double_only) {
      if (!above) rank_deficient(e.sigma_min, e.sigma_max, 53);
      if (!certified) {
        throw CertificationFailure("double-precision sigma_min estimates disagree (" +
                                   std::to_string(e.sigma_min) + " vs " +
                                   std::to_string(e.sigma_check) + ")");
      }
      return finish(P, e.sigma_max, e.sigma_min, e.sigma_check, 53);
    }
    if (certified && e.sigma_max / e.sigma_min <= kKappaSwitch) {
      return finish(P, e.sigma_max, e.sigma_min, e.sigma_check, 53);
    }
  }
  const Estimate e = estimate_extended(P.entries);
  if (!(e.sigma_min > floor_for(P.entries, e.sigma_max, DoubleDouble::epsilon().hi()))) {
    rank_deficient(e.sigma_min, e.sigma_max, 106);
  }
  if (!agree(e.sigma_min, e.sigma_check)) {
    throw CertificationFailure("extended-precision sigma_min estimates disagree (" +
                               std::to_string(e.sigma_min) + " vs " +
                               std::to_string(e.sigma_check) + ")");
  }
  return finish(P, e.sigma_max, e.sigma_min, e.sigma_check, 106);
}

LatticeField invert(const ForwardMatrix& P, const Eigen::VectorXd& samples, double lambda) {
  if (samples.size() != P.rows()) {
    throw DimensionMismatch("expected " + std::to_string(P.rows()) + " samples, got " +
                            std::to_string(samples.size()));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be finite and >= 0");
  if (!samples.allFinite()) throw InvalidInput("samples must be finite");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(P.entries, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::VectorXd projected = svd.matrixU().transpose() * samples;
  Eigen::VectorXd scaled(s.size());
  if (lambda == 0.0) {
    const double floor = floor_for(P.entries, s(0), std::numeric_limits<double>::epsilon());
    if (P.rows() < P.cols() || !(s(s.size() - 1) > floor)) {
      rank_deficient(s(s.size() - 1), s(0), 53);
    }
    scaled = projected.cwiseQuotient(s);
  } else {
    // Weighted normal equations: w P^T P + lambda delta^3 I, w = |dOmega|/M.
    const double delta = P.lattice.delta();
    const double shift = lambda * delta * delta * delta / surface_weight(P);
    for (Eigen::Index i = 0; i < s.size(); ++i) scaled(i) = projected(i) * s(i) / (s(i) * s(i) + shift);
  }
  return LatticeField(P.lattice, svd.matrixV() * scaled);
}

namespace {

struct Inner {
  double gamma;
  double beta;
  double sse;
};

Inner solve_inner(std::span<const FitPoint> pts, const std::vector<double>& y, double alpha) {
  const double n = static_cast<double>(pts.size());
  std::vector<double> t(pts.size());
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    t[i] = std::pow(pts[i].delta, -alpha);
    tm += t[i];
    ym += y[i];
  }
  tm /= n;
  ym /= n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    sty += (t[i] - tm) * (y[i] - ym);
  }
  const double beta = sty / stt;
  const double gamma = ym - beta * tm;
  double sse = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double r = y[i] - gamma - beta * t[i];
    sse += r * r;
  }
  return {gamma, beta, sse};
}

}  // namespace

FitResult fit_exponential(std::span<const FitPoint> points) {
  if (points.size() < 3) {
    throw DegenerateFit("degenerate fit: need at least 3 points, got " + std::to_string(points.size()));
  }
  std::vector<double> deltas;
  std::vector<double> y;
  for (const auto& p : points) {
    if (!(p.delta > 0.0) || !std::isfinite(p.delta)) throw DegenerateFit("degenerate fit: deltas must be positive");
    if (!(p.value > 0.0) || !std::isfinite(p.value)) throw DegenerateFit("degenerate fit: values must be positive");
    deltas.push_back(p.delta);
    y.push_back(std::log(p.value));
  }
  std::sort(deltas.begin(), deltas.end());
  if (std::adjacent_find(deltas.begin(), deltas.end()) != deltas.end()) {
    throw DegenerateFit("degenerate fit: deltas must be distinct");
  }

  constexpr double kLo = 0.05, kHi = 3.0, kStep = 0.005;
  const int steps = static_cast<int>(std::lround((kHi - kLo) / kStep));
  double best_alpha = kLo;
  double best = solve_inner(points, y, kLo).sse;
  for (int i = 1; i <= steps; ++i) {
    const double a = kLo + kStep * i;
    const double s = solve_inner(points, y, a).sse;
    if (s < best) {
      best = s;
      best_alpha = a;
    }
  }

  // Golden section on the neighbourhood of the best grid point.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::max(kLo, best_alpha - kStep);
  double b = std::min(kHi, best_alpha + kStep);
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = solve_inner(points, y, c).sse;
  double fd = solve_inner(points, y, d).sse;
  while (b - a > 1e-10) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = solve_inner(points, y, c).sse;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = solve_inner(points, y, d).sse;
    }
  }
  double alpha = 0.5 * (a + b);
  Inner inner = solve_inner(points, y, alpha);
  if (best < inner.sse) {
    alpha = best_alpha;
    inner = solve_inner(points, y, alpha);
  }

  FitResult out;
  out.gamma = inner.gamma;
  out.beta = inner.beta;
  out.alpha = alpha;
  out.residual_rms = std::sqrt(inner.sse / static_cast<double>(points.size()));
  out.n_points = points.size();
  out.alpha_at_bound = alpha - kLo < 1e-6 || kHi - alpha < 1e-6;
  return out;
}

int default_points_per_edge(int n) {
  if (n < 1) throw InvalidInput("lattice size n must be >= 1");
  const double columns = 3.0 * std::pow(static_cast<double>(n), 3);
  int k = 10;
  while (6.0 * k * k < 10.0 * columns) ++k;
  return k;
}

std::vector<SweepField> default_sweep_fields() {
  return {{"a0.5", bump_gradient(0.5)}, {"a0.25", bump_gradient(0.25)}};
}

SweepResult sweep(const SweepConfig& config) {
  if (config.n_list.empty()) throw InvalidInput("sweep needs at least one lattice size");
  for (std::size_t i = 0; i < config.n_list.size(); ++i) {
    if (config.n_list[i] < 1) throw InvalidInput("lattice sizes must be >= 1");
    if (i > 0 && config.n_list[i] <= config.n_list[i - 1]) {
      throw InvalidInput("lattice sizes must be strictly ascending");
    }
  }
  if (config.k && *config.k < 1) throw InvalidInput("k must be >= 1");

  SweepResult result;
  for (const auto& f : config.fields) result.field_labels.push_back(f.label);

  for (int n : config.n_list) {
    const auto start = std::chrono::steady_clock::now();
    StabilityRecord rec;
    rec.n = n;
    const Lattice lattice(n);
    rec.delta = lattice.delta();
    rec.N = lattice.cell_count();
    rec.k = config.k ? *config.k : default_points_per_edge(n);
    const SurfaceGrid grid = surface_grid(rec.k);
    rec.M = grid.size();
    rec.field_ratios.resize(config.fields.size());

    std::optional<ForwardMatrix> P;
    try {
      P = assemble(lattice, grid);
    } catch (const Error& e) {
      rec.errors.push_back(std::string("assemble: ") + e.what());
    }
    if (P) {
      try {
        rec.constant = operator_constant(*P, config.policy);
      } catch (const Error& e) {
        rec.errors.push_back(std::string("C_delta: ") + e.what());
      }
      for (std::size_t i = 0; i < config.fields.size(); ++i) {
        try {
          rec.field_ratios[i] = field_ratio_Cf(*P, discretize(config.fields[i].field, lattice));
        } catch (const Error& e) {
          rec.errors.push_back("Cf_" + config.fields[i].label + ": " + e.what());
        }
      }
    }
    if (config.record_timing) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    result.records.push_back(std::move(rec));
  }

  for (std::size_t s = 0; s <= config.fields.size(); ++s) {
    SeriesFit fit;
    fit.label = s == 0 ? "C_delta" : "Cf_" + config.fields[s - 1].label;
    try {
      const auto pts = series_points(result, s);
      fit.fit = fit_exponential(pts);
    } catch (const Error& e) {
      fit.error = e.what();
    }
    result.fits.push_back(std::move(fit));
  }
  return result;
}

std::vector<FitPoint> series_points(const SweepResult& result, std::size_t series) {
  std::vector<FitPoint> pts;
  for (const auto& rec : result.records) {
    if (series == 0) {
      if (rec.constant) pts.push_back({rec.delta, rec.constant->C_delta});
    } else if (series - 1 < rec.field_ratios.size() && rec.field_ratios[series - 1]) {
      pts.push_back({rec.delta, rec.field_ratios[series - 1]->consistent});
    }
  }
  return pts;
}

}  // namespace magpot
