#include "magpot/forward.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

#include <json.hpp>

#include "magpot/errors.hpp"

namespace magpot {

double potential(const BoxSimpleField& f, const Vec3& x) {
  double sum = 0.0;
  for (const auto& p : f.parts()) sum += prism_potential(p.box, p.v, x);
  return sum;
}

double potential(const LatticeField& f, const Vec3& x) {
  const Lattice& lattice = f.lattice();
  double sum = 0.0;
  for (std::size_t c = 0; c < lattice.cell_count(); ++c) {
    const Vec3 v = f.cell_value(c);
    if (v.isZero(0.0)) continue;
    sum += v.dot(prism_potential_basis(lattice.cell(c), x));
  }
  return sum;
}

QuadraturePotential potential_quadrature(std::span<const Chart> charts, const Vec3& x,
                                         const QuadratureSpec& spec) {
  if (!x.allFinite()) throw InvalidInput("evaluation point must be finite");
  const double factor = -1.0 / (4.0 * std::numbers::pi);
  auto integrand = [&x, factor](const ChartSample& s) {
    const Vec3 d = x - s.point;
    const double r = d.norm();
    return std::array<double, 3>{factor * d.dot(s.weighted_value) / (r * r * r), 0.0, 0.0};
  };
  const CubatureResult r = integrate(charts, integrand, 1, spec);
  return QuadraturePotential{r.value[0], r.magnitude[0], r.error[0], r.evaluations};
}

QuadraturePotential potential_quadrature(const SmoothField& f, const Vec3& x,
                                         const QuadratureSpec& spec) {
  if (!(f.support_distance(x) > 0.0)) {
    throw InvalidInput("quadrature potential needs x at positive distance from the support");
  }
  return potential_quadrature(std::span<const Chart>(f.charts()), x, spec);
}

ForwardMatrix assemble(const Lattice& lattice, const SurfaceGrid& grid,
                       const AssemblyLimits& limits) {
  const std::size_t m = grid.size();
  const std::size_t cells = lattice.cell_count();
  if (m == 0) throw InvalidInput("surface grid is empty");
  if (m * 3 * cells > limits.max_entries) {
    throw InvalidInput("forward matrix of " + std::to_string(m) + " x " +
                       std::to_string(3 * cells) + " exceeds the entry cap of " +
                       std::to_string(limits.max_entries) +
                       "; reduce k or n, or raise AssemblyLimits::max_entries");
  }
  std::vector<Box> boxes;
  boxes.reserve(cells);
  for (std::size_t c = 0; c < cells; ++c) boxes.push_back(lattice.cell(c));

  ForwardMatrix P{Eigen::MatrixXd(m, 3 * cells), grid, lattice};
  const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < rows; ++j) {
    const Vec3& x = grid.points[static_cast<std::size_t>(j)];
    for (std::size_t c = 0; c < cells; ++c) {
      const Vec3 basis = prism_potential_basis(boxes[c], x);
      for (int k = 0; k < 3; ++k) P.entries(j, static_cast<Eigen::Index>(3 * c + k)) = basis[k];
    }
  }
  if (!P.entries.allFinite()) throw NumericalFailure("forward matrix has non-finite entries");
  return P;
}

Eigen::VectorXd apply(const ForwardMatrix& P, const LatticeField& f) {
  if (!(f.lattice() == P.lattice)) throw DimensionMismatch("field lattice differs from matrix lattice");
  return P.entries * f.coeffs();
}

double boundary_l2_norm(const Eigen::VectorXd& samples, const SurfaceGrid& grid) {
  if (static_cast<std::size_t>(samples.size()) != grid.size()) {
    throw DimensionMismatch("sample count differs from the grid size");
  }
  return std::sqrt(grid.weight) * samples.norm();
}

MovedField::MovedField(BoxSimpleField original, RigidMotion motion)
    : original_(std::move(original)), motion_(motion) {}

Vec3 MovedField::value(const Vec3& x) const {
  return motion_.linear().transpose() * original_.value(motion_.apply(x));
}

std::optional<BoxSimpleField> MovedField::as_box_simple() const {
  if (!motion_.is_signed_permutation()) return std::nullopt;
  const RigidMotion inv = motion_.inverse();
  BoxSimpleField out;
  for (const auto& p : original_.parts()) {
    const Vec3 a = inv.apply(p.box.lo());
    const Vec3 b = inv.apply(p.box.hi());
    out.add(Box(a.cwiseMin(b), a.cwiseMax(b)), motion_.linear().transpose() * p.v);
  }
  return out;
}

std::vector<Chart> MovedField::charts() const {
  const RigidMotion inv = motion_.inverse();
  std::vector<Chart> out;
  for (const auto& p : original_.parts()) {
    const Vec3 w = motion_.linear().transpose() * p.v;
    out.push_back(Chart{p.box, [inv, w](const Vec3& z) { return ChartSample{inv.apply(z), w}; }});
  }
  return out;
}

MovedField transform_field(const BoxSimpleField& f, const RigidMotion& motion) {
  return MovedField(f, motion);
}

double potential(const MovedField& f, const Vec3& x, const QuadratureSpec& spec) {
  if (auto boxes = f.as_box_simple()) return potential(*boxes, x);
  const auto charts = f.charts();
  return potential_quadrature(std::span<const Chart>(charts), x, spec).value;
}

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto s = path;
  s += ".json";
  return s;
}

}  // namespace

void write_matrix_binary(const ForwardMatrix& P, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(P.entries.data()),
            static_cast<std::streamsize>(sizeof(double) * P.entries.size()));
  nlohmann::json meta{
      {"rows", P.rows()},
      {"cols", P.cols()},
      {"order", "column-major"},
      {"dtype", "float64"},
      {"n", P.lattice.n()},
      {"delta", P.lattice.delta()},
      {"k", P.grid.points_per_edge},
      {"convention", P.convention},
  };
  std::ofstream side(sidecar_path(path));
  if (!side) throw InvalidInput("cannot open sidecar for " + path.string());
  side << meta.dump(2) << '\n';
}

ForwardMatrix read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream side(sidecar_path(path));
  if (!side) throw ParseError("missing sidecar " + sidecar_path(path).string());
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad matrix sidecar: ") + e.what());
  }
  const auto rows = meta.at("rows").get<Eigen::Index>();
  const auto cols = meta.at("cols").get<Eigen::Index>();
  ForwardMatrix P{Eigen::MatrixXd(rows, cols), surface_grid(meta.at("k").get<int>()),
                  Lattice(meta.at("n").get<int>()), meta.at("convention").get<std::string>()};
  if (static_cast<std::size_t>(rows) != P.grid.size() ||
      static_cast<std::size_t>(cols) != 3 * P.lattice.cell_count()) {
    throw DimensionMismatch("matrix sidecar shape disagrees with n and k");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  in.read(reinterpret_cast<char*>(P.entries.data()),
          static_cast<std::streamsize>(sizeof(double) * P.entries.size()));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(double) * P.entries.size())) {
    throw ParseError("matrix file is shorter than its sidecar shape");
  }
  return P;
}

void write_matrix_csv(const ForwardMatrix& P, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      if (j) out << ',';
      out << P.entries(i, j);
    }
    out << '\n';
  }
}

}  // namespace magpot
