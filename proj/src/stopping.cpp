#include "walsh/stopping.hpp"

#include <algorithm>
#include <cmath>

namespace walsh {

const Reward::RayGrid& Reward::ray(double theta) const {
  const int i = ray_index(theta);
  if (i < 0) throw UnsupportedRayError("Reward: no grid for theta=" + std::to_string(theta));
  return rays[static_cast<std::size_t>(i)];
}

int Reward::ray_index(double theta) const {
  for (std::size_t i = 0; i < rays.size(); ++i) {
    if (rays[i].theta == theta) return static_cast<int>(i);
  }
  return -1;
}

double Reward::max_value() const {
  double m = at_origin;
  for (const auto& g : rays) {
    for (double v : g.values) m = std::max(m, v);
  }
  return m;
}

double Reward::eval(double r, double theta) const {
  if (r == 0.0) return at_origin;
  const RayGrid& g = ray(theta);
  if (r <= g.radii.front()) return g.values.front();
  if (r >= g.radii.back()) return g.values.back();
  auto it = std::upper_bound(g.radii.begin(), g.radii.end(), r);
  const std::size_t k = static_cast<std::size_t>(it - g.radii.begin());
  const double t = (r - g.radii[k - 1]) / (g.radii[k] - g.radii[k - 1]);
  return g.values[k - 1] + t * (g.values[k] - g.values[k - 1]);
}

void Reward::validate() const {
  if (rays.empty()) throw ValidationError("Reward: no ray grids");
  if (!std::isfinite(at_origin)) throw ValidationError("Reward: origin value not finite");
  for (const auto& g : rays) {
    if (g.radii.size() != g.values.size() || g.radii.size() < 2) {
      throw ValidationError("Reward: ray grid needs matching radii/values, at least two");
    }
    if (g.radii.front() != 0.0 || g.radii.back() != 1.0) {
      throw ValidationError("Reward: ray grids must span [0, 1]");
    }
    if (!std::is_sorted(g.radii.begin(), g.radii.end()) ||
        std::adjacent_find(g.radii.begin(), g.radii.end()) != g.radii.end()) {
      throw ValidationError("Reward: ray radii must be strictly increasing");
    }
    for (double v : g.values) {
      if (!std::isfinite(v)) throw ValidationError("Reward: non-finite value");
    }
    // continuity in the tree-topology pins the value at r=0 to the origin value
    if (std::fabs(g.values.front() - at_origin) > 1e-9 * (1.0 + std::fabs(at_origin))) {
      throw ValidationError("Reward: ray value at r=0 must match the origin value");
    }
  }
}

MajorantHull ray_pencil_hull(const RayProfile& prof, const Reward::RayGrid& grid, double c) {
  if (!prof.p_limit.is_finite()) {
    throw NotApplicableError("stopping: scale limit p(1-) is infinite on theta=" +
                             std::to_string(prof.theta));
  }
  std::vector<double> xs(grid.radii.size());
  for (std::size_t i = 0; i < grid.radii.size(); ++i) {
    xs[i] = (grid.radii[i] >= 1.0) ? prof.p_limit.value() : prof.eval_p(grid.radii[i]);
  }
  return least_concave_majorant(xs, grid.values, c);
}

double phi(const std::vector<RayProfile>& profiles, const AngularMeasure& nu,
           const Reward& reward, double c) {
  if (c < reward.at_origin - 1e-12 * (1.0 + std::fabs(reward.at_origin))) {
    throw ValidationError("phi: c below the origin reward");
  }
  double total = 0.0;
  for (const auto& [theta, w] : nu.atoms()) {
    const MajorantHull hull = ray_pencil_hull(profile_for(profiles, theta), reward.ray(theta), c);
    total += w * hull.initial_slope;
  }
  return total;
}

double solve_c0(const std::vector<RayProfile>& profiles, const AngularMeasure& nu,
                const Reward& reward, double tol) {
  double lo = reward.at_origin;
  if (phi(profiles, nu, reward, lo) <= 0.0) return lo;
  double hi = reward.max_value();
  if (hi <= lo) return lo;
  // strict decrease of phi makes plain bisection valid
  while (hi - lo > tol * (1.0 + std::fabs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (phi(profiles, nu, reward, mid) <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

namespace {

std::vector<std::pair<double, double>> contact_intervals(const std::vector<double>& radii,
                                                         const std::vector<int>& contact) {
  std::vector<std::pair<double, double>> out;
  std::size_t i = 0;
  while (i < contact.size()) {
    std::size_t j = i;
    while (j + 1 < contact.size() && contact[j + 1] == contact[j] + 1) ++j;
    out.emplace_back(radii[static_cast<std::size_t>(contact[i])],
                     radii[static_cast<std::size_t>(contact[j])]);
    i = j + 1;
  }
  return out;
}

}  // namespace

StoppingSolution value_function(const std::vector<RayProfile>& profiles,
                                const AngularMeasure& nu, const Reward& reward,
                                double tol) {
  reward.validate();
  StoppingSolution sol;
  sol.c0 = solve_c0(profiles, nu, reward, tol);
  sol.origin_in_region = sol.c0 <= reward.at_origin + tol * (1.0 + std::fabs(reward.at_origin));
  sol.origin_slope_integral = 0.0;
  for (const auto& [theta, w] : nu.atoms()) {
    const MajorantHull hull =
        ray_pencil_hull(profile_for(profiles, theta), reward.ray(theta), sol.c0);
    sol.origin_slope_integral += w * hull.initial_slope;
  }
  // Q is defined on every ray of the state space, including rays the angular
  // measure does not charge.
  for (const auto& grid : reward.rays) {
    const double theta = grid.theta;
    const MajorantHull hull = ray_pencil_hull(profile_for(profiles, theta), grid, sol.c0);
    StoppingSolution::RaySolution ray;
    ray.theta = theta;
    ray.radii = grid.radii;
    ray.q.resize(grid.radii.size());
    const RayProfile& prof = profile_for(profiles, theta);
    for (std::size_t i = 0; i < grid.radii.size(); ++i) {
      const double x = (grid.radii[i] >= 1.0) ? prof.p_limit.value() : prof.eval_p(grid.radii[i]);
      ray.q[i] = hull.eval(x);
    }
    ray.stop_intervals = contact_intervals(grid.radii, hull.contact);
    sol.rays.push_back(std::move(ray));
  }
  return sol;
}

}  // namespace walsh
