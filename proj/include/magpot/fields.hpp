#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "magpot/geometry.hpp"
#include "magpot/quadrature.hpp"

namespace magpot {

struct BoxPart {
  Box box;
  Vec3 v;
};

/// Piecewise-constant magnetization sum_i v_i chi_{box_i}. Overlapping parts
/// add; canonicalize() produces the equivalent disjoint representation.
class BoxSimpleField {
 public:
  BoxSimpleField() = default;
  explicit BoxSimpleField(std::vector<BoxPart> parts);

  void add(const Box& box, const Vec3& v);
  const std::vector<BoxPart>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }

  /// Pointwise value (sum over parts containing x in their interior).
  Vec3 value(const Vec3& x) const;
  /// Bounding box of the support; nullopt for the empty field.
  std::optional<Box> bounding_box() const;
  double sup_norm() const;

  BoxSimpleField operator-() const;
  friend BoxSimpleField operator+(const BoxSimpleField& a, const BoxSimpleField& b);
  friend BoxSimpleField operator-(const BoxSimpleField& a, const BoxSimpleField& b);
  friend BoxSimpleField operator*(double s, const BoxSimpleField& f);

 private:
  std::vector<BoxPart> parts_;
};

/// Resolves overlaps by splitting along every coordinate plane spanned by the
/// input faces and summing vectors per fragment. Zero fragments are dropped;
/// the result's parts are ordered lexicographically by fragment position.
BoxSimpleField canonicalize(const BoxSimpleField& f);

/// Coefficients v_delta in R^{3 N_delta}, blocked per cell as (v_x, v_y, v_z).
class LatticeField {
 public:
  explicit LatticeField(Lattice lattice);
  LatticeField(Lattice lattice, Eigen::VectorXd coeffs);

  const Lattice& lattice() const { return lattice_; }
  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  Eigen::VectorXd& coeffs() { return coeffs_; }

  Vec3 cell_value(std::size_t cell) const { return coeffs_.segment<3>(3 * cell); }
  void set_cell_value(std::size_t cell, const Vec3& v) { coeffs_.segment<3>(3 * cell) = v; }
  bool is_zero() const { return coeffs_.isZero(0.0); }

  /// Nonzero cells as box parts (lossless; zero cells dropped).
  BoxSimpleField to_box_simple() const;
  /// Inverse of to_box_simple for fields whose parts are lattice cells.
  static LatticeField from_box_simple(const Lattice& lattice, const BoxSimpleField& f);

 private:
  Lattice lattice_;
  Eigen::VectorXd coeffs_;
};

enum class Smoothness { piecewise_constant, continuous, smooth_compact };

/// Field known through a closed-form evaluator, integrated by charts.
class SmoothField {
 public:
  using Evaluator = std::function<Vec3(const Vec3&)>;
  using SupportDistance = std::function<double(const Vec3&)>;

  SmoothField(std::string name, Evaluator evaluator, Box support, Smoothness smoothness,
              std::vector<Chart> charts, double sup_norm, SupportDistance distance = {});

  const std::string& name() const { return name_; }
  Vec3 value(const Vec3& x) const;
  /// Bounding box of the support; the evaluator vanishes outside it.
  const Box& support() const { return support_; }
  Smoothness smoothness() const { return smoothness_; }
  const std::vector<Chart>& charts() const { return charts_; }
  double sup_norm() const { return sup_norm_; }
  /// Distance from x to the (exact) support.
  double support_distance(const Vec3& x) const;

 private:
  std::string name_;
  Evaluator evaluator_;
  Box support_;
  Smoothness smoothness_;
  std::vector<Chart> charts_;
  double sup_norm_;
  SupportDistance distance_;
};

/// Center-point samples of f on every lattice cell.
LatticeField discretize(const SmoothField& f, const Lattice& lattice);

/// Gradient of the product bump prod_k exp(-1/(a^2 - x_k^2)) on (-a, a)^3.
SmoothField bump_gradient(double a);
/// Scalar bump value (exposed for finite-difference checks).
double bump_value(double a, const Vec3& x);

/// Four triangular prisms tiling Q = [0,1]^3 with a field circulating in the
/// (x1, x2) plane: e1, e2, -e1, -e2 on the bottom, right, top and left
/// prisms. Divergence-free with zero normal component on dQ.
SmoothField invisible_triangle_field();
/// The four prisms with the vertex layout (0,0), (0,1), (1/2,1/2) for the
/// e1 prism, i.e. the radial (non-circulating) arrangement. Visible.
SmoothField radial_triangle_field();

/// v chi_{B_r(c)} - (v / alpha^3) chi_{B_{alpha r}(c)}.
SmoothField invisible_ball_field(double r, double alpha, const Vec3& v,
                                 const Vec3& center = Vec3::Zero());
/// v chi_{B_r(c)}.
SmoothField uniform_ball_field(double r, const Vec3& v, const Vec3& center = Vec3::Zero());
/// v chi_B as a chart field (for quadrature cross-checks of closed forms).
SmoothField uniform_box_field(const Box& box, const Vec3& v);

/// Net moment integral f dmu. Exact for the piecewise-constant types.
Vec3 net_moment(const BoxSimpleField& f);
Vec3 net_moment(const LatticeField& f);
/// Quadrature with absolute tolerance ~1e-12 relative to integral |f|.
Vec3 net_moment(const SmoothField& f, const QuadratureSpec& spec = {});

/// Positively separated grains with their moments.
struct Grain {
  Box region;
  Vec3 moment;
  double sup_norm;
};

struct GrainDecomposition {
  std::vector<Grain> grains;
};

/// Splits a box-simple field by region. Every part must lie in one region
/// and the regions must be pairwise at positive distance.
GrainDecomposition decompose(const BoxSimpleField& f, const std::vector<Box>& regions);
/// Restriction of a chart field to grain regions; moments by quadrature.
GrainDecomposition decompose(const SmoothField& f, const std::vector<Box>& regions,
                             const QuadratureSpec& spec = {});

/// Per grain: moment / |moment|, or nullopt when |moment| does not exceed
/// 1e-10 * sup_norm * vol(region).
std::vector<std::optional<Vec3>> recover_directions(const GrainDecomposition& g);

/// Smooth cutoff eta: 1 on `inner`, 0 outside `inner` grown by `margin`,
/// built from the transition t -> e(t)/(e(t)+e(1-t)), e(t) = exp(-1/t).
class Cutoff {
 public:
  Cutoff(Box inner, double margin);
  /// eta == 0 everywhere.
  static Cutoff zero();

  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
  bool is_zero() const { return !inner_.has_value(); }
  const std::optional<Box>& inner() const { return inner_; }
  double margin() const { return margin_; }

 private:
  Cutoff() = default;
  std::optional<Box> inner_;
  double margin_ = 0.0;
};

/// f = grad(phi) with phi(x) = x1 on the unit domain, and
/// g = grad(phi - eta phi), which vanishes on `inner`. Their exterior
/// potentials agree because eta phi has compact support in the domain.
/// The default cutoff uses margin = half the distance from inner to the
/// domain boundary.
std::pair<SmoothField, SmoothField> thickness_ambiguity_pair(const Box& inner);
std::pair<SmoothField, SmoothField> thickness_ambiguity_pair(const Box& inner, const Cutoff& eta);

}  // namespace magpot
