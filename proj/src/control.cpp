#include "walsh/control.hpp"

#include <algorithm>
#include <cmath>

namespace walsh {

ControlSpec::ControlSpec(std::vector<ControlRay> rays) : rays_(std::move(rays)) {
  if (rays_.empty()) throw ValidationError("ControlSpec: no rays");
  for (std::size_t i = 0; i < rays_.size(); ++i) {
    for (std::size_t j = i + 1; j < rays_.size(); ++j) {
      if (rays_[j].theta == rays_[i].theta) {
        throw ValidationError("ControlSpec: duplicate ray angle");
      }
    }
    // ratio ordering b0/s0^2 <= b1/s1^2, sampled along the ray
    const ControlRay& r = rays_[i];
    for (int k = 1; k <= 64; ++k) {
      const double x = static_cast<double>(k) / 65.0;
      const double s0 = r.s0(x), s1 = r.s1(x);
      if (!(s0 > 0.0) || !(s1 > 0.0)) {
        throw ValidationError("ControlSpec: dispersion must be positive");
      }
      if (r.b0(x) / (s0 * s0) > r.b1(x) / (s1 * s1) + 1e-12) {
        throw ValidationError("ControlSpec: signal-to-noise ordering violated at r=" +
                              std::to_string(x));
      }
    }
  }
}

const ControlRay& ControlSpec::ray(double theta) const {
  for (const auto& r : rays_) {
    if (r.theta == theta) return r;
  }
  throw UnsupportedRayError("ControlSpec: no ray at theta=" + std::to_string(theta));
}

RayExtremum ray_extremum(const Reward& reward, double theta) {
  const Reward::RayGrid& g = reward.ray(theta);
  RayExtremum ex;
  ex.theta = theta;
  ex.u_star = *std::max_element(g.values.begin(), g.values.end());
  const double tie = 1e-12 * (1.0 + std::fabs(ex.u_star));
  ex.lambda = 1.0;
  ex.rho = 0.0;
  for (std::size_t i = 0; i < g.radii.size(); ++i) {
    if (g.values[i] >= ex.u_star - tie) {
      ex.lambda = std::min(ex.lambda, g.radii[i]);
      ex.rho = std::max(ex.rho, g.radii[i]);
    }
  }
  return ex;
}

namespace {

const RayExtremum& extremum_for(const std::vector<RayExtremum>& extrema, double theta) {
  for (const auto& e : extrema) {
    if (e.theta == theta) return e;
  }
  throw UnsupportedRayError("no extremum for theta=" + std::to_string(theta));
}

// Per-ray selection: pair 0 for c >= U*_theta (pinned there so the slope map
// stays continuous in c), otherwise pair 1 on (0, lambda) and pair 0 beyond.
RayModel select_ray(const RayModel& base, const ControlRay& ctrl, const RayExtremum& ex,
                    double c) {
  RayModel out;
  out.theta = base.theta;
  out.weight = base.weight;
  out.ell = XReal::finite(1.0);
  if (c >= ex.u_star) {
    out.b = ctrl.b0;
    out.s = ctrl.s0;
  } else if (ex.lambda <= 0.0) {
    out.b = ctrl.b0;
    out.s = ctrl.s0;
  } else if (ex.lambda >= 1.0) {
    out.b = ctrl.b1;
    out.s = ctrl.s1;
  } else {
    out.b = RayField::switched(ctrl.b1, ctrl.b0, ex.lambda);
    out.s = RayField::switched(ctrl.s1, ctrl.s0, ex.lambda);
  }
  return out;
}

}  // namespace

ModelSpec candidate_control(const ModelSpec& base, const ControlSpec& ctrl,
                            const std::vector<RayExtremum>& extrema, double c) {
  std::vector<RayModel> rays;
  rays.reserve(base.rays().size());
  for (const auto& ray : base.rays()) {
    rays.push_back(select_ray(ray, ctrl.ray(ray.theta), extremum_for(extrema, ray.theta), c));
  }
  return ModelSpec(std::move(rays));
}

std::vector<RayPencil> u_cpc(const ModelSpec& base, const ControlSpec& ctrl,
                             const Reward& reward, double c, int n_grid) {
  std::vector<RayExtremum> extrema;
  for (const auto& ray : base.rays()) extrema.push_back(ray_extremum(reward, ray.theta));
  const ModelSpec spec = candidate_control(base, ctrl, extrema, c);
  const std::vector<RayProfile> profiles = build_profiles(spec, n_grid);
  std::vector<RayPencil> out;
  for (const auto& ray : base.rays()) {
    RayPencil pencil;
    pencil.theta = ray.theta;
    pencil.hull = ray_pencil_hull(profile_for(profiles, ray.theta), reward.ray(ray.theta), c);
    pencil.initial_slope = pencil.hull.initial_slope;
    out.push_back(std::move(pencil));
  }
  return out;
}

ControlSolution solve_cstar(const ModelSpec& base, const ControlSpec& ctrl,
                            const Reward& reward, double tol, int n_grid) {
  reward.validate();
  for (const auto& ray : base.rays()) {
    if (!ray.ell.is_finite() || ray.ell.value() != 1.0) {
      throw NotApplicableError("control: the state space must be the unit disc (ell == 1)");
    }
  }
  std::vector<RayExtremum> extrema;
  for (const auto& ray : base.rays()) extrema.push_back(ray_extremum(reward, ray.theta));

  // The selection per ray takes only two values as c moves, so both profiles
  // can be built once and the bisection reuses them.
  struct RayCache {
    double theta = 0.0, weight = 0.0, u_star = 0.0;
    RayProfile low;   // selection for c < U*
    RayProfile high;  // selection for c >= U* (pair 0 everywhere)
    bool distinct = false;
  };
  std::vector<RayCache> cache;
  for (std::size_t i = 0; i < base.rays().size(); ++i) {
    const RayModel& ray = base.rays()[i];
    RayCache rc;
    rc.theta = ray.theta;
    rc.weight = ray.weight;
    rc.u_star = extrema[i].u_star;
    RayModel hr = select_ray(ray, ctrl.ray(ray.theta), extrema[i], extrema[i].u_star);
    hr.weight = 1.0;
    rc.high = build_profile(ModelSpec({hr}), ray.theta, n_grid);
    rc.distinct = extrema[i].lambda > 0.0;
    if (rc.distinct) {
      RayModel lr = select_ray(ray, ctrl.ray(ray.theta), extrema[i], extrema[i].u_star - 1.0);
      lr.weight = 1.0;
      rc.low = build_profile(ModelSpec({lr}), ray.theta, n_grid);
    } else {
      rc.low = rc.high;
    }
    cache.push_back(std::move(rc));
  }

  auto slope_integral = [&](double c) {
    double total = 0.0;
    for (const auto& rc : cache) {
      if (rc.weight <= 0.0) continue;
      const RayProfile& prof = (c >= rc.u_star) ? rc.high : rc.low;
      const MajorantHull hull = ray_pencil_hull(prof, reward.ray(rc.theta), c);
      total += rc.weight * hull.initial_slope;
    }
    return total;
  };

  double lo = reward.at_origin;
  double c_star;
  if (slope_integral(lo) <= 0.0) {
    c_star = lo;
  } else {
    double hi = reward.max_value();
    while (hi - lo > tol * (1.0 + std::fabs(hi))) {
      const double mid = 0.5 * (lo + hi);
      if (slope_integral(mid) <= 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    c_star = hi;
  }

  ControlSolution sol{c_star, {}, candidate_control(base, ctrl, extrema, c_star), {}};
  sol.value.c0 = c_star;
  sol.value.origin_in_region =
      c_star <= reward.at_origin + tol * (1.0 + std::fabs(reward.at_origin));
  sol.value.origin_slope_integral = slope_integral(c_star);
  for (const auto& rc : cache) {
    const Reward::RayGrid& grid = reward.ray(rc.theta);
    const RayProfile& prof = (c_star >= rc.u_star) ? rc.high : rc.low;
    const MajorantHull hull = ray_pencil_hull(prof, grid, c_star);
    StoppingSolution::RaySolution ray;
    ray.theta = rc.theta;
    ray.radii = grid.radii;
    ray.q.resize(grid.radii.size());
    std::vector<int> contact;
    for (std::size_t i = 0; i < grid.radii.size(); ++i) {
      const double x =
          (grid.radii[i] >= 1.0) ? prof.p_limit.value() : prof.eval_p(grid.radii[i]);
      ray.q[i] = hull.eval(x);
      if (ray.q[i] - grid.values[i] <= 1e-9 * (1.0 + std::fabs(grid.values[i]))) {
        contact.push_back(static_cast<int>(i));
      }
    }
    std::size_t a = 0;
    while (a < contact.size()) {
      std::size_t b = a;
      while (b + 1 < contact.size() && contact[b + 1] == contact[b] + 1) ++b;
      ray.stop_intervals.emplace_back(grid.radii[static_cast<std::size_t>(contact[a])],
                                      grid.radii[static_cast<std::size_t>(contact[b])]);
      a = b + 1;
    }
    sol.value.rays.push_back(std::move(ray));
  }
  sol.strategy = strategy_report(reward, c_star);
  return sol;
}

std::vector<std::pair<double, std::string>> strategy_report(const Reward& reward,
                                                            double c_star) {
  std::vector<std::pair<double, std::string>> out;
  for (const auto& g : reward.rays) {
    const RayExtremum ex = ray_extremum(reward, g.theta);
    const double tie = 1e-9 * (1.0 + std::fabs(ex.u_star));
    std::string label;
    if (ex.u_star > c_star + tie) {
      label = "max-then-min";
    } else if (ex.u_star >= c_star - tie) {
      label = "min-after-plateau";
    } else {
      label = "min-everywhere";
    }
    out.emplace_back(g.theta, label);
  }
  return out;
}

}  // namespace walsh
