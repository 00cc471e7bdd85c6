#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "walsh/errors.hpp"
#include "walsh/extended_real.hpp"
#include "walsh/tree_geometry.hpp"

namespace walsh {

// Finite discrete probability measure on ray angles.
class AngularMeasure {
 public:
  // Atoms (theta, weight) with positive weights summing to 1 within 1e-12
  // and strictly distinct angles in [0, 2*pi).
  explicit AngularMeasure(std::vector<std::pair<double, double>> atoms);

  const std::vector<std::pair<double, double>>& atoms() const { return atoms_; }
  double weight(double theta) const;  // 0 for angles outside the support
  double mass(const std::vector<double>& angles) const;

 private:
  std::vector<std::pair<double, double>> atoms_;
};

enum class FieldKind { Constant, Piecewise, Grid, Switched };

// Radial coefficient field on one ray: r in (0, ell) -> value. Evaluation at
// r <= 0 returns the limit from the right; values beyond the last knot extend
// constantly.
class RayField {
 public:
  static RayField constant(double v);
  // values[i] on [breaks[i-1], breaks[i]); values has one more entry than breaks.
  static RayField piecewise(std::vector<double> breaks, std::vector<double> values);
  // Linear interpolation through (radii, values), constant beyond the ends.
  static RayField grid(std::vector<double> radii, std::vector<double> values);
  // lo on (0, at), hi on [at, ell).
  static RayField switched(RayField lo, RayField hi, double at);

  double operator()(double r) const;
  FieldKind kind() const { return kind_; }
  // Radii where the field may kink or jump; integration panels split there.
  void collect_breakpoints(std::vector<double>& out) const;
  // True iff the field is the constant zero (drift test for scheme selection).
  bool is_zero() const;

  const std::vector<double>& knots() const { return a_; }
  const std::vector<double>& values() const { return v_; }

 private:
  RayField() = default;
  FieldKind kind_ = FieldKind::Constant;
  std::vector<double> a_;  // breaks or radii
  std::vector<double> v_;  // values
  std::shared_ptr<const RayField> lo_, hi_;
  double at_ = 0.0;
};

// One ray of a model: angle, excursion weight nu({theta}), radial extent and
// the drift/dispersion fields on (0, ell). Weight 0 keeps a ray in the state
// space (reachable only as a start ray) without giving it excursion mass.
struct RayModel {
  double theta = 0.0;
  double weight = 0.0;
  XReal ell = XReal::infinity();
  RayField b = RayField::constant(0.0);
  RayField s = RayField::constant(1.0);
};

class ModelSpec {
 public:
  explicit ModelSpec(std::vector<RayModel> rays);

  const std::vector<RayModel>& rays() const { return rays_; }
  int ray_index(double theta) const;
  const RayModel& ray(double theta) const;  // throws UnsupportedRayError

  AngularMeasure nu() const;
  Domain domain() const;
  double floor() const;  // min finite ell, +inf when all rays are infinite
  bool driftless() const;

 private:
  std::vector<RayModel> rays_;
};

struct ConditionClause {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ConditionReport {
  std::vector<ConditionClause> clauses;
  bool all_pass() const;
};

// Regularity checks behind well-posedness: nonvanishing dispersion, local
// integrability of b/s^2 and 1/s^2 on ray interiors, and boundedness of
// (1+|b|)/s^2 on a ring (0, eta] with eta = min(floor, 1)/2.
ConditionReport validate_conditions(const ModelSpec& spec);

// Per-ray tabulation of the scale function p, its derivative, the speed
// measure cdf m([0, .]), the Feller function v and the u-series on a graded
// radial grid, together with the limits at ell(theta)-.
class RayProfile {
 public:
  double theta = 0.0;
  std::vector<double> grid;     // r_0 = 0 < r_1 < ... < r_N
  std::vector<double> p;        // p(r_i)
  std::vector<double> p_prime;  // p'(r_i)
  std::vector<double> m_cdf;    // m([0, r_i])
  std::vector<double> v;        // v(r_i)
  std::vector<double> u;        // u-series values; valid on [0, u_valid)
  std::size_t u_valid = 0;      // nodes where the series converged within budget
  XReal p_limit, v_limit, vp_ratio_limit;

  // Quadrature-accurate evaluation between grid nodes (r in [0, grid.back()]).
  double eval_p(double r) const;
  double eval_p_prime(double r) const;
  double eval_m(double r) const;
  double eval_v(double r) const;
  // Inverse of p by monotone bracketing; y in [0, p(grid.back())].
  double eval_q(double y) const;

 private:
  friend RayProfile build_profile(const ModelSpec&, double, int, double);
  RayField b_ = RayField::constant(0.0);
  RayField s_ = RayField::constant(1.0);
  std::vector<double> exponent_;  // E(r_i) = int_0^{r_i} b/s^2
};

// Scale function p_theta(r) by composite adaptive quadrature.
double scale_function(const ModelSpec& spec, double theta, double r);

// Inverse q_theta(y) with p(q(y)) = y within 1e-10.
double scale_inverse(const ModelSpec& spec, double theta, double y);

// m_theta([a, r]); infinite tag when the integral diverges at the left end.
XReal speed_cdf(const ModelSpec& spec, double theta, double a, double r);

// Feller function v_theta(r) via the nested-integral form.
double feller_v(const ModelSpec& spec, double theta, double r);

// Truncated u-series at (r, theta); throws TruncationError if 64 terms do
// not reach the tolerance.
double feller_u(const ModelSpec& spec, double theta, double r, double tol = 1e-10);

// Driftless image: b = 0, radii p_theta(ell-), dispersion s~ = p'(q(y)) s(q(y))
// tabulated as a grid field.
ModelSpec remove_drift(const ModelSpec& spec, int n_grid = 512);

// Profile one ray; the grid is graded toward 0 and ell(theta) and refined at
// field breakpoints. r_cover extends the gridded range (infinite rays only).
RayProfile build_profile(const ModelSpec& spec, double theta, int n_grid = 512,
                         double r_cover = 0.0);

// All rays; independent builds run in parallel.
std::vector<RayProfile> build_profiles(const ModelSpec& spec, int n_grid = 512,
                                       double r_cover = 0.0);

const RayProfile& profile_for(const std::vector<RayProfile>& profiles, double theta);

// Divergence thresholds for the finite/infinite classification of limits.
struct LimitPolicy {
  static constexpr double kValueCap = 1e12;     // beyond this, call it infinite
  static constexpr double kCauchyRel = 1e-6;    // tail-increment stall test
  static constexpr double kTailRadius = 1048576.0;  // 2^20, outermost tail node
};

}  // namespace walsh
