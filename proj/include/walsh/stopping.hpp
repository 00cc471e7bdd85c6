#pragma once

#include <string>
#include <utility>
#include <vector>

#include "walsh/hull.hpp"
#include "walsh/model.hpp"

namespace walsh {

// Bounded reward on the closed unit disc, tabulated per supported ray with a
// shared origin value. Grids run from r = 0 to r = 1.
struct Reward {
  struct RayGrid {
    double theta = 0.0;
    std::vector<double> radii;   // strictly increasing, radii.front()==0, back()==1
    std::vector<double> values;
  };

  double at_origin = 0.0;
  std::vector<RayGrid> rays;

  const RayGrid& ray(double theta) const;
  int ray_index(double theta) const;
  double max_value() const;
  void validate() const;
  // Linear interpolation along the ray grid.
  double eval(double r, double theta) const;
};

struct StoppingSolution {
  struct RaySolution {
    double theta = 0.0;
    std::vector<double> radii;
    std::vector<double> q;  // value function along the grid
    std::vector<std::pair<double, double>> stop_intervals;
  };

  double c0 = 0.0;
  std::vector<RaySolution> rays;
  bool origin_in_region = false;
  double origin_slope_integral = 0.0;  // int D+ Q_theta(0) nu(dtheta)
};

// Hull of one ray's reward in its scale coordinate with origin floor c.
MajorantHull ray_pencil_hull(const RayProfile& prof, const Reward::RayGrid& grid, double c);

// nu-average of the initial hull slopes (the scale coordinate has unit
// derivative at 0, so no correction is needed).
double phi(const std::vector<RayProfile>& profiles, const AngularMeasure& nu,
           const Reward& reward, double c);

// Root of phi by bisection on [U(0), max U]; phi(max U) <= 0 always holds.
double solve_c0(const std::vector<RayProfile>& profiles, const AngularMeasure& nu,
                const Reward& reward, double tol = 1e-10);

// Value function Q = pencil hull at c0 and the contact (stopping) region.
StoppingSolution value_function(const std::vector<RayProfile>& profiles,
                                const AngularMeasure& nu, const Reward& reward,
                                double tol = 1e-10);

}  // namespace walsh
