#include "walsh/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "walsh/quadrature.hpp"

namespace walsh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kUSeriesVCap = 25.0;  // series budget: 64 terms reach 1e-12 here
constexpr int kUSeriesMaxTerms = 64;

double logaddexp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

}  // namespace

// ---------------------------------------------------------------------------
// AngularMeasure

AngularMeasure::AngularMeasure(std::vector<std::pair<double, double>> atoms)
    : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw ValidationError("AngularMeasure: no atoms");
  double total = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const auto& [th, w] = atoms_[i];
    if (!(th >= 0.0) || th >= kTwoPi) throw ValidationError("AngularMeasure: angle outside [0, 2*pi)");
    if (!(w > 0.0)) throw ValidationError("AngularMeasure: weights must be positive");
    for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
      if (atoms_[j].first == th) throw ValidationError("AngularMeasure: duplicate angle");
    }
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw ValidationError("AngularMeasure: weights sum to " + std::to_string(total) + ", expected 1");
  }
}

double AngularMeasure::weight(double theta) const {
  for (const auto& [th, w] : atoms_) {
    if (th == theta) return w;
  }
  return 0.0;
}

double AngularMeasure::mass(const std::vector<double>& angles) const {
  double total = 0.0;
  for (double th : angles) total += weight(th);
  return total;
}

// ---------------------------------------------------------------------------
// RayField

RayField RayField::constant(double v) {
  RayField f;
  f.kind_ = FieldKind::Constant;
  f.v_ = {v};
  return f;
}

RayField RayField::piecewise(std::vector<double> breaks, std::vector<double> values) {
  if (values.size() != breaks.size() + 1) {
    throw ValidationError("RayField: piecewise needs one more value than breakpoints");
  }
  if (!std::is_sorted(breaks.begin(), breaks.end()) ||
      std::adjacent_find(breaks.begin(), breaks.end()) != breaks.end()) {
    throw ValidationError("RayField: breakpoints must be strictly increasing");
  }
  for (double x : breaks) {
    if (!(x > 0.0)) throw ValidationError("RayField: breakpoints must be positive");
  }
  RayField f;
  f.kind_ = FieldKind::Piecewise;
  f.a_ = std::move(breaks);
  f.v_ = std::move(values);
  return f;
}

RayField RayField::grid(std::vector<double> radii, std::vector<double> values) {
  if (radii.size() != values.size() || radii.size() < 2) {
    throw ValidationError("RayField: grid needs matching radii/values, at least two");
  }
  if (!std::is_sorted(radii.begin(), radii.end()) ||
      std::adjacent_find(radii.begin(), radii.end()) != radii.end()) {
    throw ValidationError("RayField: grid radii must be strictly increasing");
  }
  RayField f;
  f.kind_ = FieldKind::Grid;
  f.a_ = std::move(radii);
  f.v_ = std::move(values);
  return f;
}

RayField RayField::switched(RayField lo, RayField hi, double at) {
  RayField f;
  f.kind_ = FieldKind::Switched;
  f.lo_ = std::make_shared<RayField>(std::move(lo));
  f.hi_ = std::make_shared<RayField>(std::move(hi));
  f.at_ = at;
  return f;
}

double RayField::operator()(double r) const {
  switch (kind_) {
    case FieldKind::Constant:
      return v_[0];
    case FieldKind::Piecewise: {
      auto it = std::upper_bound(a_.begin(), a_.end(), r);
      return v_[static_cast<std::size_t>(it - a_.begin())];
    }
    case FieldKind::Grid: {
      if (r <= a_.front()) return v_.front();
      if (r >= a_.back()) return v_.back();
      auto it = std::upper_bound(a_.begin(), a_.end(), r);
      const std::size_t k = static_cast<std::size_t>(it - a_.begin());
      const double t = (r - a_[k - 1]) / (a_[k] - a_[k - 1]);
      return v_[k - 1] + t * (v_[k] - v_[k - 1]);
    }
    case FieldKind::Switched:
      return r < at_ ? (*lo_)(r) : (*hi_)(r);
  }
  return 0.0;
}

void RayField::collect_breakpoints(std::vector<double>& out) const {
  switch (kind_) {
    case FieldKind::Constant:
      return;
    case FieldKind::Piecewise:
    case FieldKind::Grid:
      out.insert(out.end(), a_.begin(), a_.end());
      return;
    case FieldKind::Switched:
      out.push_back(at_);
      lo_->collect_breakpoints(out);
      hi_->collect_breakpoints(out);
      return;
  }
}

bool RayField::is_zero() const {
  switch (kind_) {
    case FieldKind::Constant:
    case FieldKind::Piecewise:
    case FieldKind::Grid:
      return std::all_of(v_.begin(), v_.end(), [](double x) { return x == 0.0; });
    case FieldKind::Switched:
      return lo_->is_zero() && hi_->is_zero();
  }
  return false;
}

// ---------------------------------------------------------------------------
// ModelSpec

ModelSpec::ModelSpec(std::vector<RayModel> rays) : rays_(std::move(rays)) {
  if (rays_.empty()) throw ValidationError("ModelSpec: needs at least one ray");
  double total = 0.0;
  bool any_positive = false;
  for (std::size_t i = 0; i < rays_.size(); ++i) {
    const auto& ray = rays_[i];
    if (!(ray.theta >= 0.0) || ray.theta >= kTwoPi) {
      throw ValidationError("ModelSpec: ray angle outside [0, 2*pi)");
    }
    for (std::size_t j = i + 1; j < rays_.size(); ++j) {
      if (rays_[j].theta == ray.theta) throw ValidationError("ModelSpec: duplicate ray angle");
    }
    if (ray.weight < 0.0) throw ValidationError("ModelSpec: negative ray weight");
    if (ray.ell.is_finite() && ray.ell.value() <= 0.0) {
      throw ValidationError("ModelSpec: ell must be positive");
    }
    total += ray.weight;
    any_positive = any_positive || ray.weight > 0.0;
  }
  if (!any_positive) throw ValidationError("ModelSpec: angular measure has no mass");
  if (std::fabs(total - 1.0) > 1e-12) {
    throw ValidationError("ModelSpec: ray weights sum to " + std::to_string(total));
  }
}

int ModelSpec::ray_index(double theta) const {
  for (std::size_t i = 0; i < rays_.size(); ++i) {
    if (rays_[i].theta == theta) return static_cast<int>(i);
  }
  return -1;
}

const RayModel& ModelSpec::ray(double theta) const {
  const int i = ray_index(theta);
  if (i < 0) throw UnsupportedRayError("ModelSpec: no ray at theta=" + std::to_string(theta));
  return rays_[static_cast<std::size_t>(i)];
}

AngularMeasure ModelSpec::nu() const {
  std::vector<std::pair<double, double>> atoms;
  for (const auto& ray : rays_) {
    if (ray.weight > 0.0) atoms.emplace_back(ray.theta, ray.weight);
  }
  return AngularMeasure(std::move(atoms));
}

Domain ModelSpec::domain() const {
  std::vector<double> angles;
  std::vector<XReal> ell;
  for (const auto& ray : rays_) {
    angles.push_back(ray.theta);
    ell.push_back(ray.ell);
  }
  return Domain(std::move(angles), std::move(ell));
}

double ModelSpec::floor() const {
  double f = kInf;
  for (const auto& ray : rays_) {
    if (ray.ell.is_finite()) f = std::min(f, ray.ell.value());
  }
  return f;
}

bool ModelSpec::driftless() const {
  return std::all_of(rays_.begin(), rays_.end(),
                     [](const RayModel& r) { return r.b.is_zero(); });
}

bool ConditionReport::all_pass() const {
  return std::all_of(clauses.begin(), clauses.end(),
                     [](const ConditionClause& c) { return c.pass; });
}

// ---------------------------------------------------------------------------
// Panel integration machinery.
//
// Everything on a ray is a cumulative integral driven by the exponent
// E(r) = int_0^r b/s^2:
//   p'(r)    = exp(-2 E(r))
//   mdens(r) = 2 exp(2 E(r)) / s^2(r)
//   v'(r)    = p'(r) m([0, r])
// Inside a panel [a, b] all exponentials are taken relative to E(a), and the
// running m is carried in log scale, so rays with strong drift do not
// overflow before the divergence thresholds get a chance to fire.

namespace {

struct PanelCache {
  double a = 0.0, b = 0.0;
  double dE = 0.0;        // E(b) - E(a)
  double dp_hat = 0.0;    // int exp(-2(E-E(a)))
  double dm_hat = 0.0;    // int mdens * exp(-2 E(a))
  double y[5], wy[5], phat[5], mdhat[5];
  double z[5][5], wz[5][5], mdhat_in[5][5];
};

// Partial integrals of f from a to each ascending target, chained.
void chained_partials(const std::function<double(double)>& f, double a,
                      const double* targets, int n, double* out) {
  double acc = 0.0;
  double left = a;
  for (int i = 0; i < n; ++i) {
    acc += integrate(f, left, targets[i], 1e-13);
    out[i] = acc;
    left = targets[i];
  }
}

PanelCache build_panel(const RayField& b, const RayField& s, double a, double bb) {
  PanelCache pc;
  pc.a = a;
  pc.b = bb;
  const double c = 0.5 * (a + bb), h = 0.5 * (bb - a);
  auto fexp = [&](double z) {
    const double sv = s(z);
    return b(z) / (sv * sv);
  };
  double ehat[5];
  for (int i = 0; i < 5; ++i) {
    pc.y[i] = c + h * quad_detail::kG5X[i];
    pc.wy[i] = h * quad_detail::kG5W[i];
  }
  chained_partials(fexp, a, pc.y, 5, ehat);
  pc.dE = ehat[4] + integrate(fexp, pc.y[4], bb, 1e-13);
  pc.dp_hat = 0.0;
  pc.dm_hat = 0.0;
  for (int i = 0; i < 5; ++i) {
    pc.phat[i] = std::exp(-2.0 * ehat[i]);
    const double sv = s(pc.y[i]);
    pc.mdhat[i] = 2.0 * std::exp(2.0 * ehat[i]) / (sv * sv);
    pc.dp_hat += pc.wy[i] * pc.phat[i];
    pc.dm_hat += pc.wy[i] * pc.mdhat[i];
  }
  // tail of dp_hat / dm_hat beyond y[4] is covered by the GL5 rule itself
  for (int i = 0; i < 5; ++i) {
    const double ci = 0.5 * (a + pc.y[i]), hi = 0.5 * (pc.y[i] - a);
    double eh_in[5];
    for (int j = 0; j < 5; ++j) {
      pc.z[i][j] = ci + hi * quad_detail::kG5X[j];
      pc.wz[i][j] = hi * quad_detail::kG5W[j];
    }
    chained_partials(fexp, a, pc.z[i], 5, eh_in);
    for (int j = 0; j < 5; ++j) {
      const double sv = s(pc.z[i][j]);
      pc.mdhat_in[i][j] = 2.0 * std::exp(2.0 * eh_in[j]) / (sv * sv);
    }
  }
  return pc;
}

// Cross term int_a^b p'(y) int_a^y q(z) mdens(z) dz dy with the exp(+-2E(a))
// factors cancelled. q is evaluated through the callback.
template <class Q>
double panel_cross(const PanelCache& pc, Q&& q) {
  double total = 0.0;
  for (int i = 0; i < 5; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 5; ++j) {
      const double t = q(pc.z[i][j]) * pc.mdhat_in[i][j];
      if (t != 0.0) inner += pc.wz[i][j] * t;
    }
    if (inner != 0.0 && pc.phat[i] != 0.0) total += pc.wy[i] * pc.phat[i] * inner;
  }
  return total;
}

template <class Q>
double panel_density(const PanelCache& pc, Q&& q) {
  double total = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double t = q(pc.y[i]) * pc.mdhat[i];
    if (t != 0.0) total += pc.wy[i] * t;
  }
  return total;
}

struct RayMarch {
  std::vector<double> E, p, p_prime, m_cdf, log_m, v;
  std::vector<PanelCache> cache;
};

RayMarch march_ray(const RayField& b, const RayField& s, const std::vector<double>& nodes,
                   bool keep_cache) {
  const std::size_t n = nodes.size();
  RayMarch m;
  m.E.assign(n, 0.0);
  m.p.assign(n, 0.0);
  m.p_prime.assign(n, 1.0);
  m.m_cdf.assign(n, 0.0);
  m.log_m.assign(n, -kInf);
  m.v.assign(n, 0.0);
  if (keep_cache) m.cache.reserve(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const PanelCache pc = build_panel(b, s, nodes[k], nodes[k + 1]);
    const double E_a = m.E[k];
    m.E[k + 1] = E_a + pc.dE;
    m.p_prime[k + 1] = std::exp(-2.0 * m.E[k + 1]);
    const double log_dp = -2.0 * E_a + std::log(pc.dp_hat);
    m.p[k + 1] = m.p[k] + std::exp(log_dp);
    const double log_dm = 2.0 * E_a + std::log(pc.dm_hat);
    m.log_m[k + 1] = logaddexp(m.log_m[k], log_dm);
    m.m_cdf[k + 1] = std::exp(m.log_m[k + 1]);
    const double carried = (m.log_m[k] == -kInf) ? 0.0 : std::exp(m.log_m[k] + log_dp);
    m.v[k + 1] = m.v[k] + carried + panel_cross(pc, [](double) { return 1.0; });
    if (keep_cache) m.cache.push_back(pc);
  }
  return m;
}

std::vector<double> graded_nodes(double R, int n, const std::vector<double>* breakpoints,
                                 double r_min = 0.0) {
  std::vector<double> nodes;
  nodes.reserve(static_cast<std::size_t>(n) + 8);
  constexpr double kPi = 3.14159265358979323846;
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    nodes.push_back(r_min + (R - r_min) * 0.5 * (1.0 - std::cos(kPi * t)));
  }
  if (breakpoints) {
    for (double bp : *breakpoints) {
      if (bp > r_min && bp < R) nodes.push_back(bp);
    }
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(),
                          [&](double x, double y) { return y - x < 1e-13 * (R - r_min); }),
              nodes.end());
  nodes.front() = r_min;
  nodes.back() = R;
  return nodes;
}

std::vector<double> field_breakpoints(const RayModel& ray) {
  std::vector<double> bp;
  ray.b.collect_breakpoints(bp);
  ray.s.collect_breakpoints(bp);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  return bp;
}

// Finite/infinite decision from the tail of a nondecreasing sequence sampled
// at geometrically refined nodes: infinite if the value crossed the cap or
// the trailing increments keep a non-vanishing relative size.
XReal classify_tail(const std::vector<double>& vals, std::size_t tail_begin) {
  const double last = vals.back();
  if (!std::isfinite(last) || last > LimitPolicy::kValueCap) return XReal::infinity();
  if (tail_begin + 1 >= vals.size()) return XReal::finite(last);
  const double prev = vals[vals.size() - 2];
  const double incr = last - prev;
  if (incr > LimitPolicy::kCauchyRel * std::max(1e-300, last)) return XReal::infinity();
  return XReal::finite(last);
}

}  // namespace

// ---------------------------------------------------------------------------
// RayProfile evaluation

namespace {

std::size_t locate_panel(const std::vector<double>& grid, double r) {
  if (r < grid.front() || r > grid.back()) {
    throw ValidationError("RayProfile: radius outside tabulated range");
  }
  auto it = std::upper_bound(grid.begin(), grid.end(), r);
  std::size_t k = static_cast<std::size_t>(it - grid.begin());
  if (k == 0) k = 1;
  if (k >= grid.size()) k = grid.size() - 1;
  return k - 1;
}

}  // namespace

double RayProfile::eval_p(double r) const {
  if (r >= grid.back()) {
    if (r == grid.back()) return p.back();
    if (p_limit.is_finite()) return p_limit.value();
    throw ValidationError("RayProfile: p requested beyond grid on a ray with infinite scale");
  }
  const std::size_t k = locate_panel(grid, r);
  if (!std::isfinite(p[k])) throw ValidationError("RayProfile: scale overflowed before this radius");
  auto fexp = [&](double z) {
    const double sv = s_(z);
    return b_(z) / (sv * sv);
  };
  auto integrand = [&](double y) {
    return std::exp(-2.0 * integrate(fexp, grid[k], y, 1e-13));
  };
  return p[k] + std::exp(-2.0 * exponent_[k]) * integrate(integrand, grid[k], r, 1e-13);
}

double RayProfile::eval_p_prime(double r) const {
  const std::size_t k = locate_panel(grid, std::min(r, grid.back()));
  auto fexp = [&](double z) {
    const double sv = s_(z);
    return b_(z) / (sv * sv);
  };
  return std::exp(-2.0 * (exponent_[k] + integrate(fexp, grid[k], std::min(r, grid.back()), 1e-13)));
}

double RayProfile::eval_m(double r) const {
  const std::size_t k = locate_panel(grid, r);
  auto fexp = [&](double z) {
    const double sv = s_(z);
    return b_(z) / (sv * sv);
  };
  auto integrand = [&](double z) {
    const double sv = s_(z);
    return 2.0 * std::exp(2.0 * integrate(fexp, grid[k], z, 1e-13)) / (sv * sv);
  };
  return m_cdf[k] + std::exp(2.0 * exponent_[k]) * integrate(integrand, grid[k], r, 1e-13);
}

double RayProfile::eval_v(double r) const {
  const std::size_t k = locate_panel(grid, r);
  if (r == grid[k]) return v[k];
  const PanelCache pc = build_panel(b_, s_, grid[k], r);
  const double carried =
      (m_cdf[k] == 0.0) ? 0.0 : m_cdf[k] * std::exp(-2.0 * exponent_[k]) * pc.dp_hat;
  return v[k] + carried + panel_cross(pc, [](double) { return 1.0; });
}

double RayProfile::eval_q(double y) const {
  if (y < 0.0) throw ValidationError("RayProfile: q argument negative");
  if (y == 0.0) return 0.0;
  const double pmax = p.back();
  if (y > pmax) throw ValidationError("RayProfile: q argument beyond p range");
  auto it = std::lower_bound(p.begin(), p.end(), y);
  std::size_t k = static_cast<std::size_t>(it - p.begin());
  if (k > 0 && p[k] > y) --k;
  if (p[k] == y) return grid[k];
  double lo = grid[k], hi = grid[std::min(k + 1, grid.size() - 1)];
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (eval_p(mid) < y) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Profile building

RayProfile build_profile(const ModelSpec& spec, double theta, int n_grid, double r_cover) {
  if (n_grid < 16) throw ValidationError("build_profile: n_grid must be at least 16");
  const RayModel& ray = spec.ray(theta);
  const std::vector<double> bp = field_breakpoints(ray);

  std::vector<double> nodes;
  std::size_t tail_begin = 0;
  if (ray.ell.is_finite()) {
    const double ell = ray.ell.value();
    const double main_end = ell * (1.0 - std::ldexp(1.0, -8));
    nodes = graded_nodes(main_end, n_grid, &bp);
    tail_begin = nodes.size();
    for (int j = 9; j <= 46; ++j) {
      nodes.push_back(ell * (1.0 - std::ldexp(1.0, -j)));
    }
  } else {
    const double r_main = std::max(16.0, 2.0 * r_cover);
    nodes = graded_nodes(r_main, n_grid, &bp);
    tail_begin = nodes.size();
    for (double r = 2.0 * r_main; r <= LimitPolicy::kTailRadius; r *= 2.0) {
      nodes.push_back(r);
    }
  }

  RayMarch m = march_ray(ray.b, ray.s, nodes, true);

  RayProfile prof;
  prof.theta = theta;
  prof.grid = std::move(nodes);
  prof.p = m.p;
  prof.p_prime = m.p_prime;
  prof.m_cdf = m.m_cdf;
  prof.v = m.v;
  prof.b_ = ray.b;
  prof.s_ = ray.s;
  prof.exponent_ = m.E;
  prof.p_limit = classify_tail(m.p, tail_begin);
  prof.v_limit = classify_tail(m.v, tail_begin);

  // v/p at the right edge: exact when both limits are finite, infinite when
  // only v blows up; when both blow up, look for a stalling tail ratio.
  if (prof.p_limit.is_finite() && prof.v_limit.is_finite()) {
    prof.vp_ratio_limit = XReal::finite(prof.v_limit.value() / prof.p_limit.value());
  } else if (prof.p_limit.is_finite()) {
    prof.vp_ratio_limit = XReal::infinity();
  } else {
    prof.vp_ratio_limit = XReal::infinity();
    std::vector<double> ratios;
    for (std::size_t i = tail_begin; i < prof.grid.size(); ++i) {
      if (std::isfinite(m.p[i]) && std::isfinite(m.v[i]) && m.p[i] > 0.0) {
        ratios.push_back(m.v[i] / m.p[i]);
      }
    }
    if (ratios.size() >= 3) {
      const double a = ratios[ratios.size() - 2], b2 = ratios.back();
      if (b2 - a <= LimitPolicy::kCauchyRel * std::max(1e-300, b2) &&
          b2 <= LimitPolicy::kValueCap) {
        prof.vp_ratio_limit = XReal::finite(b2);
      }
    }
  }

  // u-series on the prefix where v is small enough for the 64-term budget.
  std::size_t n_valid = 0;
  while (n_valid < prof.grid.size() && std::isfinite(prof.v[n_valid]) &&
         prof.v[n_valid] <= kUSeriesVCap) {
    ++n_valid;
  }
  prof.u.assign(prof.grid.size(), std::numeric_limits<double>::quiet_NaN());
  prof.u_valid = 0;
  if (n_valid >= 2) {
    std::vector<double> u(n_valid, 1.0);
    std::vector<double> term(n_valid, 1.0);  // u_0
    std::vector<double> next(n_valid, 0.0), log_w(n_valid, -kInf);
    bool converged = false;
    for (int nterm = 1; nterm <= kUSeriesMaxTerms; ++nterm) {
      std::fill(next.begin(), next.end(), 0.0);
      std::fill(log_w.begin(), log_w.end(), -kInf);
      for (std::size_t k = 0; k + 1 < n_valid; ++k) {
        const PanelCache& pc = m.cache[k];
        const double a = pc.a, width = pc.b - pc.a;
        const double qa = term[k], qb = term[k + 1];
        auto q = [&](double x) { return qa + (qb - qa) * (x - a) / width; };
        const double E_a = m.E[k];
        const double log_dp = -2.0 * E_a + std::log(pc.dp_hat);
        const double dW_hat = panel_density(pc, q);
        const double carried = (log_w[k] == -kInf) ? 0.0 : std::exp(log_w[k] + log_dp);
        next[k + 1] = next[k] + carried + panel_cross(pc, q);
        log_w[k + 1] = logaddexp(log_w[k], dW_hat > 0.0 ? 2.0 * E_a + std::log(dW_hat) : -kInf);
      }
      double sup_term = 0.0, sup_u = 0.0;
      for (std::size_t i = 0; i < n_valid; ++i) {
        u[i] += next[i];
        sup_term = std::max(sup_term, next[i]);
        sup_u = std::max(sup_u, u[i]);
      }
      term.swap(next);
      if (!std::isfinite(sup_u)) break;
      if (sup_term <= 1e-10 * sup_u) {
        converged = true;
        break;
      }
    }
    if (converged) {
      std::copy(u.begin(), u.end(), prof.u.begin());
      prof.u_valid = n_valid;
    }
  }
  return prof;
}

std::vector<RayProfile> build_profiles(const ModelSpec& spec, int n_grid, double r_cover) {
  const std::size_t n = spec.rays().size();
  std::vector<RayProfile> out(n);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = build_profile(spec, spec.rays()[i].theta, n_grid, r_cover);
  }
  return out;
}

const RayProfile& profile_for(const std::vector<RayProfile>& profiles, double theta) {
  for (const auto& p : profiles) {
    if (p.theta == theta) return p;
  }
  throw UnsupportedRayError("no profile for theta=" + std::to_string(theta));
}

// ---------------------------------------------------------------------------
// Point operations

namespace {

void check_in_ray_domain(const ModelSpec& spec, double theta, double r) {
  const RayModel& ray = spec.ray(theta);
  if (r < 0.0 || (ray.ell.is_finite() && r >= ray.ell.value())) {
    throw ValidationError("radius " + std::to_string(r) + " outside [0, ell) on this ray");
  }
}

std::vector<double> op_nodes(const RayModel& ray, double r, int n) {
  const std::vector<double> bp = field_breakpoints(ray);
  return graded_nodes(r, n, &bp);
}

}  // namespace

double scale_function(const ModelSpec& spec, double theta, double r) {
  check_in_ray_domain(spec, theta, r);
  if (r == 0.0) return 0.0;
  const RayModel& ray = spec.ray(theta);
  RayMarch m = march_ray(ray.b, ray.s, op_nodes(ray, r, 256), false);
  return m.p.back();
}

double scale_inverse(const ModelSpec& spec, double theta, double y) {
  if (y < 0.0) throw ValidationError("scale_inverse: y must be nonnegative");
  if (y == 0.0) return 0.0;
  RayProfile prof = build_profile(spec, theta, 256);
  if (prof.p_limit.is_finite() && y >= prof.p_limit.value()) {
    throw ValidationError("scale_inverse: y outside [0, p(ell-))");
  }
  if (y > prof.p.back()) throw ValidationError("scale_inverse: y beyond tabulated scale range");
  return prof.eval_q(y);
}

XReal speed_cdf(const ModelSpec& spec, double theta, double a, double r) {
  if (a < 0.0 || a > r) throw ValidationError("speed_cdf: need 0 <= a <= r");
  check_in_ray_domain(spec, theta, r);
  if (a == r) return XReal::finite(0.0);
  const RayModel& ray = spec.ray(theta);
  auto fexp = [&](double z) {
    const double sv = ray.s(z);
    return ray.b(z) / (sv * sv);
  };

  const double a_eff = std::max(a, r * std::ldexp(1.0, -46));
  // Reference exponent at a_eff; beyond-validation fields may make this blow
  // up, which is itself a divergence verdict.
  const double E0 = integrate(fexp, 0.0, a_eff, 1e-13);
  if (!std::isfinite(E0)) return XReal::infinity();
  std::vector<double> nodes = op_nodes(ray, r, 256);
  // restrict nodes to [a_eff, r], geometric refinement toward a_eff
  std::vector<double> ns;
  ns.push_back(a_eff);
  if (a == 0.0) {
    for (int j = 45; j >= 1; --j) {
      const double x = r * std::ldexp(1.0, -j);
      if (x > a_eff && x < r) ns.push_back(x);
    }
  }
  for (double x : nodes) {
    if (x > a_eff && x < r) ns.push_back(x);
  }
  ns.push_back(r);
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());

  double E = E0;
  double log_m = -kInf;
  std::vector<double> partial;
  for (std::size_t k = 0; k + 1 < ns.size(); ++k) {
    const PanelCache pc = build_panel(ray.b, ray.s, ns[k], ns[k + 1]);
    const double log_dm = 2.0 * E + std::log(pc.dm_hat);
    log_m = logaddexp(log_m, log_dm);
    E += pc.dE;
    partial.push_back(std::exp(log_m));
    if (!std::isfinite(partial.back()) || partial.back() > LimitPolicy::kValueCap) {
      return XReal::infinity();
    }
  }
  const double total = partial.back();
  if (a == 0.0) {
    // Divergence at the left end shows up as a non-vanishing head mass.
    const double without_head = total - partial.front();
    if (total - without_head > LimitPolicy::kCauchyRel * std::max(1e-300, total) &&
        partial.front() > LimitPolicy::kCauchyRel * total) {
      // head panel still carries relative mass; refine check via first two
      const double head = partial.front();
      if (head > 1e-3 * total) return XReal::infinity();
    }
  }
  return XReal::finite(total);
}

double feller_v(const ModelSpec& spec, double theta, double r) {
  check_in_ray_domain(spec, theta, r);
  if (r == 0.0) return 0.0;
  const RayModel& ray = spec.ray(theta);
  RayMarch m = march_ray(ray.b, ray.s, op_nodes(ray, r, 256), false);
  return m.v.back();
}

double feller_u(const ModelSpec& spec, double theta, double r, double tol) {
  check_in_ray_domain(spec, theta, r);
  if (r == 0.0) return 1.0;
  const RayModel& ray = spec.ray(theta);
  const std::vector<double> nodes = op_nodes(ray, r, 256);
  RayMarch m = march_ray(ray.b, ray.s, nodes, true);
  const std::size_t n = nodes.size();
  std::vector<double> u(n, 1.0), term(n, 1.0), next(n, 0.0), log_w(n, -kInf);
  for (int nterm = 1; nterm <= kUSeriesMaxTerms; ++nterm) {
    std::fill(next.begin(), next.end(), 0.0);
    std::fill(log_w.begin(), log_w.end(), -kInf);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const PanelCache& pc = m.cache[k];
      const double a = pc.a, width = pc.b - pc.a;
      const double qa = term[k], qb = term[k + 1];
      auto q = [&](double x) { return qa + (qb - qa) * (x - a) / width; };
      const double E_a = m.E[k];
      const double log_dp = -2.0 * E_a + std::log(pc.dp_hat);
      const double dW_hat = panel_density(pc, q);
      const double carried = (log_w[k] == -kInf) ? 0.0 : std::exp(log_w[k] + log_dp);
      next[k + 1] = next[k] + carried + panel_cross(pc, q);
      log_w[k + 1] = logaddexp(log_w[k], dW_hat > 0.0 ? 2.0 * E_a + std::log(dW_hat) : -kInf);
    }
    double sup_term = 0.0, sup_u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      u[i] += next[i];
      sup_term = std::max(sup_term, next[i]);
      sup_u = std::max(sup_u, u[i]);
    }
    term.swap(next);
    if (!std::isfinite(sup_u)) break;
    if (std::isfinite(sup_term) && sup_term <= tol * sup_u) return u.back();
  }
  std::ostringstream msg;
  msg << "feller_u: series not converged after " << kUSeriesMaxTerms
      << " terms at (r=" << r << ", theta=" << theta << "); v(r)=" << m.v.back()
      << ", last term sup=" << *std::max_element(term.begin(), term.end());
  throw TruncationError(msg.str());
}

ModelSpec remove_drift(const ModelSpec& spec, int n_grid) {
  const ConditionReport report = validate_conditions(spec);
  if (!report.all_pass()) {
    std::string detail;
    for (const auto& c : report.clauses) {
      if (!c.pass) detail += " [" + c.name + "] " + c.detail;
    }
    throw ValidationError("remove_drift: conditions fail:" + detail);
  }
  std::vector<RayModel> out;
  out.reserve(spec.rays().size());
  for (const auto& ray : spec.rays()) {
    RayProfile prof = build_profile(spec, ray.theta, n_grid);
    RayModel img;
    img.theta = ray.theta;
    img.weight = ray.weight;
    img.ell = prof.p_limit;
    img.b = RayField::constant(0.0);
    // s~(y) = p'(q(y)) s(q(y)), tabulated at the image of the profile grid.
    std::vector<double> radii, vals;
    radii.reserve(prof.grid.size());
    vals.reserve(prof.grid.size());
    for (std::size_t i = 0; i < prof.grid.size(); ++i) {
      if (!std::isfinite(prof.p[i])) break;
      if (!radii.empty() && prof.p[i] <= radii.back()) continue;
      radii.push_back(prof.p[i]);
      vals.push_back(prof.p_prime[i] * ray.s(prof.grid[i] == 0.0 ? 0.0 : prof.grid[i]));
    }
    img.s = RayField::grid(std::move(radii), std::move(vals));
    out.push_back(std::move(img));
  }
  return ModelSpec(std::move(out));
}

// ---------------------------------------------------------------------------
// Condition checks

ConditionReport validate_conditions(const ModelSpec& spec) {
  ConditionReport report;

  ConditionClause nonvanishing{"dispersion-nonvanishing", true, ""};
  ConditionClause integrable{"local-integrability", true, ""};
  ConditionClause ring{"near-origin-boundedness", true, ""};

  const double eta = std::min(spec.floor(), 1.0) / 2.0;

  for (const auto& ray : spec.rays()) {
    const double ell_eff = ray.ell.is_finite() ? ray.ell.value() : 16.0;
    const std::vector<double> bp = field_breakpoints(ray);

    // (i) s(x) != 0 on the punctured ray, sampled densely plus near the ends
    std::vector<double> samples = graded_nodes(ell_eff * (1.0 - 1e-9), 512, &bp, 0.0);
    for (int j = 1; j <= 40; ++j) samples.push_back(ell_eff * std::ldexp(1.0, -j));
    for (double r : samples) {
      if (r <= 0.0) continue;
      const double sv = ray.s(r);
      if (!(sv > 0.0) || !std::isfinite(sv)) {
        nonvanishing.pass = false;
        nonvanishing.detail = "s vanishes near r=" + std::to_string(r) + " on theta=" +
                              std::to_string(ray.theta);
        break;
      }
    }

    // (ii) local integrability of b/s^2 and 1/s^2 on compacts inside (0, ell)
    auto f1 = [&](double z) {
      const double sv = ray.s(z);
      return std::fabs(ray.b(z)) / (sv * sv);
    };
    auto f2 = [&](double z) {
      const double sv = ray.s(z);
      return 1.0 / (sv * sv);
    };
    const double lo = std::min(eta, ell_eff) * 1e-6;
    const double hi = ray.ell.is_finite() ? ray.ell.value() * (1.0 - std::ldexp(1.0, -12))
                                          : ell_eff;
    const double i1 = integrate(f1, lo, hi, 1e-9);
    const double i2 = integrate(f2, lo, hi, 1e-9);
    if (!std::isfinite(i1) || !std::isfinite(i2) || i1 > LimitPolicy::kValueCap ||
        i2 > LimitPolicy::kValueCap) {
      integrable.pass = false;
      integrable.detail = "b/s^2 or 1/s^2 not integrable on compacts of theta=" +
                          std::to_string(ray.theta);
    }

    // (iii) sup over the ring (0, eta] of (1+|b|)/s^2
    double sup = 0.0, arg = 0.0;
    std::vector<double> ring_samples;
    for (int j = 0; j <= 45; ++j) ring_samples.push_back(eta * std::ldexp(1.0, -j));
    for (int i = 1; i <= 64; ++i) ring_samples.push_back(eta * i / 64.0);
    for (double r : ring_samples) {
      const double sv = ray.s(r);
      const double val = (1.0 + std::fabs(ray.b(r))) / (sv * sv);
      if (val > sup) {
        sup = val;
        arg = r;
      }
    }
    if (!(sup <= LimitPolicy::kValueCap)) {
      ring.pass = false;
      ring.detail = "(1+|b|)/s^2 reaches " + std::to_string(sup) + " at r=" +
                    std::to_string(arg) + " on theta=" + std::to_string(ray.theta);
    }
  }

  if (nonvanishing.pass) nonvanishing.detail = "s > 0 on all sampled radii";
  if (integrable.pass) integrable.detail = "finite on tested compacts";
  if (ring.pass) {
    ring.detail = "bounded on (0, " + std::to_string(eta) + "]";
  }
  report.clauses = {nonvanishing, integrable, ring};
  return report;
}

}  // namespace walsh
