#include "magpot/fields.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "magpot/errors.hpp"

namespace magpot {

// ---------------------------------------------------------------------------
// BoxSimpleField

BoxSimpleField::BoxSimpleField(std::vector<BoxPart> parts) : parts_(std::move(parts)) {
  for (const auto& p : parts_) {
    if (!p.v.allFinite()) throw InvalidInput("box-simple field vectors must be finite");
  }
}

void BoxSimpleField::add(const Box& box, const Vec3& v) {
  if (!v.allFinite()) throw InvalidInput("box-simple field vectors must be finite");
  parts_.push_back({box, v});
}

Vec3 BoxSimpleField::value(const Vec3& x) const {
  Vec3 sum = Vec3::Zero();
  for (const auto& p : parts_) {
    if (p.box.contains_open(x)) sum += p.v;
  }
  return sum;
}

std::optional<Box> BoxSimpleField::bounding_box() const {
  if (parts_.empty()) return std::nullopt;
  Vec3 lo = parts_.front().box.lo();
  Vec3 hi = parts_.front().box.hi();
  for (const auto& p : parts_) {
    lo = lo.cwiseMin(p.box.lo());
    hi = hi.cwiseMax(p.box.hi());
  }
  return Box(lo, hi);
}

double BoxSimpleField::sup_norm() const {
  double s = 0.0;
  for (const auto& p : canonicalize(*this).parts()) s = std::max(s, p.v.norm());
  return s;
}

BoxSimpleField BoxSimpleField::operator-() const { return -1.0 * *this; }

BoxSimpleField operator+(const BoxSimpleField& a, const BoxSimpleField& b) {
  std::vector<BoxPart> parts = a.parts_;
  parts.insert(parts.end(), b.parts_.begin(), b.parts_.end());
  return BoxSimpleField(std::move(parts));
}

BoxSimpleField operator-(const BoxSimpleField& a, const BoxSimpleField& b) { return a + (-b); }

BoxSimpleField operator*(double s, const BoxSimpleField& f) {
  std::vector<BoxPart> parts = f.parts_;
  for (auto& p : parts) p.v *= s;
  return BoxSimpleField(std::move(parts));
}

namespace {

bool pairwise_disjoint(const std::vector<BoxPart>& parts) {
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (std::size_t j = i + 1; j < parts.size(); ++j) {
      if (intersect(parts[i].box, parts[j].box)) return false;
    }
  }
  return true;
}

}  // namespace

BoxSimpleField canonicalize(const BoxSimpleField& f) {
  const auto& parts = f.parts();
  if (pairwise_disjoint(parts)) {
    std::vector<BoxPart> kept;
    for (const auto& p : parts) {
      if (!p.v.isZero(0.0)) kept.push_back(p);
    }
    return BoxSimpleField(std::move(kept));
  }

  std::array<std::vector<double>, 3> planes;
  for (int a = 0; a < 3; ++a) {
    std::set<double> s;
    for (const auto& p : parts) {
      s.insert(p.box.lo()[a]);
      s.insert(p.box.hi()[a]);
    }
    planes[a].assign(s.begin(), s.end());
  }
  auto slot = [&](int a, double c) {
    return static_cast<std::size_t>(std::lower_bound(planes[a].begin(), planes[a].end(), c) -
                                    planes[a].begin());
  };

  std::map<std::array<std::size_t, 3>, Vec3> fragments;
  for (const auto& p : parts) {
    std::array<std::size_t, 3> first{}, last{};
    for (int a = 0; a < 3; ++a) {
      first[a] = slot(a, p.box.lo()[a]);
      last[a] = slot(a, p.box.hi()[a]);
    }
    for (auto i = first[0]; i < last[0]; ++i) {
      for (auto j = first[1]; j < last[1]; ++j) {
        for (auto k = first[2]; k < last[2]; ++k) {
          auto [it, inserted] = fragments.try_emplace({i, j, k}, Vec3::Zero());
          it->second += p.v;
        }
      }
    }
  }

  std::vector<BoxPart> out;
  for (const auto& [key, v] : fragments) {
    if (v.isZero(0.0)) continue;
    const Vec3 lo(planes[0][key[0]], planes[1][key[1]], planes[2][key[2]]);
    const Vec3 hi(planes[0][key[0] + 1], planes[1][key[1] + 1], planes[2][key[2] + 1]);
    out.push_back({Box(lo, hi), v});
  }
  return BoxSimpleField(std::move(out));
}

// ---------------------------------------------------------------------------
// LatticeField

LatticeField::LatticeField(Lattice lattice)
    : lattice_(lattice), coeffs_(Eigen::VectorXd::Zero(3 * lattice.cell_count())) {}

LatticeField::LatticeField(Lattice lattice, Eigen::VectorXd coeffs)
    : lattice_(lattice), coeffs_(std::move(coeffs)) {
  if (static_cast<std::size_t>(coeffs_.size()) != 3 * lattice_.cell_count()) {
    throw DimensionMismatch("lattice field needs 3 N_delta = " +
                            std::to_string(3 * lattice_.cell_count()) + " coefficients, got " +
                            std::to_string(coeffs_.size()));
  }
  if (!coeffs_.allFinite()) throw InvalidInput("lattice coefficients must be finite");
}

BoxSimpleField LatticeField::to_box_simple() const {
  BoxSimpleField f;
  for (std::size_t c = 0; c < lattice_.cell_count(); ++c) {
    const Vec3 v = cell_value(c);
    if (!v.isZero(0.0)) f.add(lattice_.cell(c), v);
  }
  return f;
}

LatticeField LatticeField::from_box_simple(const Lattice& lattice, const BoxSimpleField& f) {
  LatticeField out(lattice);
  const int n = lattice.n();
  for (const auto& p : f.parts()) {
    std::array<int, 3> t{};
    for (int a = 0; a < 3; ++a) t[a] = static_cast<int>(std::lround((p.box.lo()[a] + 0.5) * n));
    std::size_t idx = 0;
    try {
      idx = lattice.index(t[0], t[1], t[2]);
    } catch (const InvalidInput&) {
      throw InvalidInput("box part does not lie on the lattice");
    }
    if (!(lattice.cell(idx) == p.box)) throw InvalidInput("box part is not a lattice cell");
    out.set_cell_value(idx, out.cell_value(idx) + p.v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SmoothField

SmoothField::SmoothField(std::string name, Evaluator evaluator, Box support,
                         Smoothness smoothness, std::vector<Chart> charts, double sup_norm,
                         SupportDistance distance)
    : name_(std::move(name)),
      evaluator_(std::move(evaluator)),
      support_(support),
      smoothness_(smoothness),
      charts_(std::move(charts)),
      sup_norm_(sup_norm),
      distance_(std::move(distance)) {}

Vec3 SmoothField::value(const Vec3& x) const {
  if (!support_.contains(x)) return Vec3::Zero();
  return evaluator_(x);
}

double SmoothField::support_distance(const Vec3& x) const {
  return distance_ ? distance_(x) : support_.distance(x);
}

LatticeField discretize(const SmoothField& f, const Lattice& lattice) {
  if (!intersect(f.support(), lattice.domain())) {
    throw InvalidInput("field support does not meet the lattice domain");
  }
  LatticeField out(lattice);
  for (std::size_t c = 0; c < lattice.cell_count(); ++c) {
    out.set_cell_value(c, f.value(lattice.cell_center(c)));
  }
  return out;
}

namespace {

Chart identity_chart(const Box& box, std::function<Vec3(const Vec3&)> value) {
  return Chart{box, [value = std::move(value)](const Vec3& s) {
                 return ChartSample{s, value(s)};
               }};
}

Box cube(double half) { return Box(Vec3::Constant(-half), Vec3::Constant(half)); }

double bump_factor(double a, double x) {
  const double h = a * a - x * x;
  return h > 0.0 ? std::exp(-1.0 / h) : 0.0;
}

Vec3 bump_gradient_value(double a, const Vec3& x) {
  for (int k = 0; k < 3; ++k) {
    if (!(std::abs(x[k]) < a)) return Vec3::Zero();
  }
  const double f = bump_factor(a, x[0]) * bump_factor(a, x[1]) * bump_factor(a, x[2]);
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    const double h = a * a - x[k] * x[k];
    g[k] = -2.0 * x[k] / (h * h) * f;
  }
  return g;
}

}  // namespace

double bump_value(double a, const Vec3& x) {
  for (int k = 0; k < 3; ++k) {
    if (!(std::abs(x[k]) < a)) return 0.0;
  }
  return bump_factor(a, x[0]) * bump_factor(a, x[1]) * bump_factor(a, x[2]);
}

SmoothField bump_gradient(double a) {
  if (!(a > 0.0 && a <= 0.5)) throw InvalidInput("bump parameter a must lie in (0, 1/2]");
  auto eval = [a](const Vec3& x) { return bump_gradient_value(a, x); };
  // The 1-D factor of |grad| peaks where d/dx [x exp(-1/h)/h^2] = 0; sampling
  // a fine grid is enough for a tolerance scale.
  double sup = 0.0;
  constexpr int kSamples = 48;
  for (int i = 0; i < kSamples; ++i) {
    for (int j = 0; j < kSamples; ++j) {
      const Vec3 x(-a + (i + 0.5) * 2 * a / kSamples, -a + (j + 0.5) * 2 * a / kSamples, 0.0);
      sup = std::max(sup, bump_gradient_value(a, x).norm());
    }
  }
  std::vector<Chart> charts{identity_chart(cube(a), eval)};
  return SmoothField("bump(a=" + std::to_string(a) + ")", eval, cube(a), Smoothness::smooth_compact,
                     std::move(charts), sup);
}

namespace {

using Point2 = Eigen::Vector2d;

struct Triangle {
  Point2 a, b, c;
  Vec3 v;
};

Chart triangle_prism_chart(const Triangle& t) {
  const Point2 ba = t.b - t.a;
  const Point2 cb = t.c - t.b;
  const double det = std::abs(ba[0] * cb[1] - ba[1] * cb[0]);
  return Chart{Box(Vec3::Zero(), Vec3::Ones()), [t, ba, cb, det](const Vec3& s) {
                 const Point2 p = t.a + s[0] * (ba + s[1] * cb);
                 return ChartSample{Vec3(p[0], p[1], s[2]), t.v * (s[0] * det)};
               }};
}

// (x, y) -> (1 - y, x): rotation by pi/2 about (1/2, 1/2).
Point2 quarter_turn(const Point2& p) { return Point2(1.0 - p[1], p[0]); }

SmoothField four_prism_field(std::string name, const Point2& a, const Point2& b,
                             const std::array<Vec3, 4>& vectors) {
  std::vector<Triangle> tris;
  Point2 pa = a, pb = b;
  const Point2 center(0.5, 0.5);
  for (int i = 0; i < 4; ++i) {
    tris.push_back({pa, pb, center, vectors[i]});
    pa = quarter_turn(pa);
    pb = quarter_turn(pb);
  }
  std::vector<Chart> charts;
  for (const auto& t : tris) charts.push_back(triangle_prism_chart(t));

  auto eval = [tris](const Vec3& x) -> Vec3 {
    const Point2 p(x[0], x[1]);
    for (const auto& t : tris) {
      // barycentric containment
      const Point2 e0 = t.b - t.a, e1 = t.c - t.a, d = p - t.a;
      const double den = e0[0] * e1[1] - e0[1] * e1[0];
      const double l1 = (d[0] * e1[1] - d[1] * e1[0]) / den;
      const double l2 = (e0[0] * d[1] - e0[1] * d[0]) / den;
      if (l1 > 0.0 && l2 > 0.0 && l1 + l2 < 1.0) return t.v;
    }
    return Vec3::Zero();
  };
  return SmoothField(std::move(name), eval, Box(Vec3::Zero(), Vec3::Ones()),
                     Smoothness::piecewise_constant, std::move(charts), 1.0);
}

}  // namespace

SmoothField invisible_triangle_field() {
  const Vec3 e1 = Vec3::UnitX(), e2 = Vec3::UnitY();
  return four_prism_field("triangle", Point2(0.0, 0.0), Point2(1.0, 0.0), {e1, e2, -e1, -e2});
}

SmoothField radial_triangle_field() {
  const Vec3 e1 = Vec3::UnitX(), e2 = Vec3::UnitY();
  return four_prism_field("triangle-radial", Point2(0.0, 0.0), Point2(0.0, 1.0),
                          {e1, e2, -e1, -e2});
}

namespace {

Chart ball_chart(double r, const Vec3& center, const Vec3& v) {
  const Box params(Vec3(0.0, 0.0, 0.0), Vec3(r, std::numbers::pi, 2.0 * std::numbers::pi));
  return Chart{params, [center, v](const Vec3& s) {
                 const double rho = s[0], st = std::sin(s[1]), ct = std::cos(s[1]);
                 const Vec3 dir(st * std::cos(s[2]), st * std::sin(s[2]), ct);
                 return ChartSample{center + rho * dir, v * (rho * rho * st)};
               }};
}

}  // namespace

SmoothField uniform_ball_field(double r, const Vec3& v, const Vec3& center) {
  if (!(r > 0.0)) throw InvalidInput("ball radius must be positive");
  auto eval = [r, v, center](const Vec3& x) -> Vec3 {
    return (x - center).norm() < r ? v : Vec3::Zero();
  };
  auto dist = [r, center](const Vec3& x) { return std::max((x - center).norm() - r, 0.0); };
  return SmoothField("ball", eval, Box(center.array() - r, center.array() + r),
                     Smoothness::piecewise_constant, {ball_chart(r, center, v)}, v.norm(), dist);
}

SmoothField invisible_ball_field(double r, double alpha, const Vec3& v, const Vec3& center) {
  if (!(r > 0.0)) throw InvalidInput("ball radius must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
  if (v.isZero(0.0)) throw InvalidInput("ball magnetization must be nonzero");
  const Vec3 inner = -v / (alpha * alpha * alpha);
  auto eval = [r, alpha, v, inner, center](const Vec3& x) -> Vec3 {
    const double d = (x - center).norm();
    if (d < alpha * r) return v + inner;
    return d < r ? v : Vec3::Zero();
  };
  auto dist = [r, center](const Vec3& x) { return std::max((x - center).norm() - r, 0.0); };
  std::vector<Chart> charts{ball_chart(r, center, v), ball_chart(alpha * r, center, inner)};
  return SmoothField("nested_balls", eval, Box(center.array() - r, center.array() + r),
                     Smoothness::piecewise_constant, std::move(charts), (v + inner).norm(), dist);
}

SmoothField uniform_box_field(const Box& box, const Vec3& v) {
  auto eval = [v](const Vec3&) { return v; };
  return SmoothField("box", eval, box, Smoothness::piecewise_constant, {identity_chart(box, eval)},
                     v.norm());
}

// ---------------------------------------------------------------------------
// Moments and grains

Vec3 net_moment(const BoxSimpleField& f) {
  Vec3 m = Vec3::Zero();
  for (const auto& p : f.parts()) m += p.v * p.box.volume();
  return m;
}

Vec3 net_moment(const LatticeField& f) {
  const double vol = std::pow(f.lattice().delta(), 3);
  Vec3 m = Vec3::Zero();
  for (std::size_t c = 0; c < f.lattice().cell_count(); ++c) m += f.cell_value(c);
  return m * vol;
}

namespace {

Vec3 chart_moment(std::span<const Chart> charts, const QuadratureSpec& spec) {
  const auto r = integrate(
      charts,
      [](const ChartSample& s) {
        return std::array<double, 3>{s.weighted_value[0], s.weighted_value[1], s.weighted_value[2]};
      },
      3, spec);
  return Vec3(r.value[0], r.value[1], r.value[2]);
}

void require_separated(const std::vector<Box>& regions) {
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (std::size_t j = i + 1; j < regions.size(); ++j) {
      if (!(regions[i].distance(regions[j]) > 0.0)) {
        throw InvalidInput("grain regions must be positively separated");
      }
    }
  }
}

}  // namespace

Vec3 net_moment(const SmoothField& f, const QuadratureSpec& spec) {
  return chart_moment(f.charts(), spec);
}

GrainDecomposition decompose(const BoxSimpleField& f, const std::vector<Box>& regions) {
  require_separated(regions);
  GrainDecomposition g;
  for (const auto& region : regions) g.grains.push_back({region, Vec3::Zero(), 0.0});
  std::vector<BoxSimpleField> pieces(regions.size());
  for (const auto& p : f.parts()) {
    bool placed = false;
    for (std::size_t i = 0; i < regions.size(); ++i) {
      if (regions[i].contains(p.box.lo()) && regions[i].contains(p.box.hi())) {
        pieces[i].add(p.box, p.v);
        placed = true;
        break;
      }
    }
    if (!placed) throw InvalidInput("box part does not lie inside any grain region");
  }
  for (std::size_t i = 0; i < regions.size(); ++i) {
    g.grains[i].moment = net_moment(pieces[i]);
    g.grains[i].sup_norm = pieces[i].sup_norm();
  }
  return g;
}

GrainDecomposition decompose(const SmoothField& f, const std::vector<Box>& regions,
                             const QuadratureSpec& spec) {
  require_separated(regions);
  std::vector<std::vector<Chart>> assigned(regions.size());
  for (const auto& chart : f.charts()) {
    const Box& d = chart.domain;
    // A chart belongs to the region holding its center and corner images.
    std::vector<Vec3> probes{d.center()};
    for (int c = 0; c < 8; ++c) {
      Vec3 s;
      for (int a = 0; a < 3; ++a) s[a] = ((c >> a) & 1) ? d.hi()[a] : d.lo()[a];
      probes.push_back(s);
    }
    std::optional<std::size_t> owner;
    for (std::size_t i = 0; i < regions.size() && !owner; ++i) {
      const bool inside = std::all_of(probes.begin(), probes.end(), [&](const Vec3& s) {
        return regions[i].contains(chart.sample(s).point);
      });
      if (inside) owner = i;
    }
    if (!owner) throw InvalidInput("field chart does not lie inside any grain region");
    assigned[*owner].push_back(chart);
  }
  GrainDecomposition g;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Vec3 m = assigned[i].empty() ? Vec3::Zero() : chart_moment(assigned[i], spec);
    g.grains.push_back({regions[i], m, f.sup_norm()});
  }
  return g;
}

std::vector<std::optional<Vec3>> recover_directions(const GrainDecomposition& g) {
  std::vector<std::optional<Vec3>> out;
  for (const auto& grain : g.grains) {
    const double tol = 1e-10 * grain.sup_norm * grain.region.volume();
    const double norm = grain.moment.norm();
    if (norm > tol && norm > 0.0) {
      out.emplace_back(grain.moment / norm);
    } else {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cutoff and the thickness ambiguity

namespace {

double transition_e(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
double transition_de(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

// Smooth step S(t): 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = transition_e(t), b = transition_e(1.0 - t);
  return a / (a + b);
}

double smooth_step_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double a = transition_e(t), b = transition_e(1.0 - t);
  const double da = transition_de(t), db = transition_de(1.0 - t);
  const double s = a + b;
  return (da * b + a * db) / (s * s);
}

// One-dimensional plateau on [lo, hi] with ramps of width m.
double plateau(double x, double lo, double hi, double m) {
  if (x < lo) return smooth_step((x - (lo - m)) / m);
  if (x > hi) return smooth_step((hi + m - x) / m);
  return 1.0;
}

double plateau_derivative(double x, double lo, double hi, double m) {
  if (x < lo) return smooth_step_derivative((x - (lo - m)) / m) / m;
  if (x > hi) return -smooth_step_derivative((hi + m - x) / m) / m;
  return 0.0;
}

}  // namespace

Cutoff::Cutoff(Box inner, double margin) : inner_(inner), margin_(margin) {
  if (!(margin > 0.0)) throw InvalidInput("cutoff margin must be positive");
}

Cutoff Cutoff::zero() { return Cutoff(); }

double Cutoff::value(const Vec3& x) const {
  if (!inner_) return 0.0;
  double v = 1.0;
  for (int k = 0; k < 3; ++k) v *= plateau(x[k], inner_->lo()[k], inner_->hi()[k], margin_);
  return v;
}

Vec3 Cutoff::gradient(const Vec3& x) const {
  if (!inner_) return Vec3::Zero();
  Vec3 p, dp;
  for (int k = 0; k < 3; ++k) {
    p[k] = plateau(x[k], inner_->lo()[k], inner_->hi()[k], margin_);
    dp[k] = plateau_derivative(x[k], inner_->lo()[k], inner_->hi()[k], margin_);
  }
  return Vec3(dp[0] * p[1] * p[2], p[0] * dp[1] * p[2], p[0] * p[1] * dp[2]);
}

namespace {

void require_strictly_inside_domain(const Box& inner) {
  const Box omega = Box::unit_domain();
  for (int k = 0; k < 3; ++k) {
    if (!(inner.lo()[k] > omega.lo()[k] && inner.hi()[k] < omega.hi()[k])) {
      throw InvalidInput("inner box must lie strictly inside the domain");
    }
  }
}

double default_margin(const Box& inner) {
  double gap = 1.0;
  for (int k = 0; k < 3; ++k) gap = std::min({gap, inner.lo()[k] + 0.5, 0.5 - inner.hi()[k]});
  return 0.5 * gap;
}

}  // namespace

std::pair<SmoothField, SmoothField> thickness_ambiguity_pair(const Box& inner) {
  require_strictly_inside_domain(inner);
  return thickness_ambiguity_pair(inner, Cutoff(inner, default_margin(inner)));
}

std::pair<SmoothField, SmoothField> thickness_ambiguity_pair(const Box& inner, const Cutoff& eta) {
  require_strictly_inside_domain(inner);
  const Box omega = Box::unit_domain();
  const Vec3 e1 = Vec3::UnitX();

  auto f_eval = [e1](const Vec3&) { return e1; };
  SmoothField f("harmonic_gradient", f_eval, omega, Smoothness::continuous,
                {identity_chart(omega, f_eval)}, 1.0);

  auto g_eval = [eta, e1](const Vec3& x) -> Vec3 {
    return (1.0 - eta.value(x)) * e1 - x[0] * eta.gradient(x);
  };
  // Charts follow the ramp breakpoints so each piece is smooth.
  std::array<std::vector<double>, 3> cuts;
  for (int k = 0; k < 3; ++k) {
    std::set<double> s{-0.5, 0.5};
    if (!eta.is_zero()) {
      const Box& plateau_box = *eta.inner();
      const double m = eta.margin();
      for (double c : {plateau_box.lo()[k] - m, plateau_box.lo()[k], plateau_box.hi()[k],
                       plateau_box.hi()[k] + m}) {
        if (c > -0.5 && c < 0.5) s.insert(c);
      }
    }
    cuts[k].assign(s.begin(), s.end());
  }
  std::vector<Chart> charts;
  double sup = 0.0;
  for (std::size_t i = 0; i + 1 < cuts[0].size(); ++i) {
    for (std::size_t j = 0; j + 1 < cuts[1].size(); ++j) {
      for (std::size_t k = 0; k + 1 < cuts[2].size(); ++k) {
        const Box piece(Vec3(cuts[0][i], cuts[1][j], cuts[2][k]),
                        Vec3(cuts[0][i + 1], cuts[1][j + 1], cuts[2][k + 1]));
        charts.push_back(identity_chart(piece, g_eval));
        sup = std::max(sup, g_eval(piece.center()).norm());
      }
    }
  }
  // |g| <= 1 + |x1| |grad eta|; the ramp slope bounds |grad eta|.
  sup = std::max(sup, 1.0);
  SmoothField g("cutoff_gradient", g_eval, omega, Smoothness::continuous, std::move(charts), sup);
  return {std::move(f), std::move(g)};
}

}  // namespace magpot
