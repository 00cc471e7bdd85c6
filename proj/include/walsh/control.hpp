#pragma once

#include <string>
#include <vector>

#include "walsh/model.hpp"
#include "walsh/stopping.hpp"

namespace walsh {

// Extremal signal-to-noise selections available to the controller: pair 0
// minimizes b/s^2, pair 1 maximizes it, per ray.
struct ControlRay {
  double theta = 0.0;
  RayField b0 = RayField::constant(0.0), s0 = RayField::constant(1.0);
  RayField b1 = RayField::constant(0.0), s1 = RayField::constant(1.0);
};

class ControlSpec {
 public:
  explicit ControlSpec(std::vector<ControlRay> rays);
  const std::vector<ControlRay>& rays() const { return rays_; }
  const ControlRay& ray(double theta) const;

 private:
  std::vector<ControlRay> rays_;
};

// Per-ray maximum of the reward and the extremes of its argmax set.
struct RayExtremum {
  double theta = 0.0;
  double u_star = 0.0;
  double lambda = 0.0;  // left-most argmax
  double rho = 0.0;     // right-most argmax
};

RayExtremum ray_extremum(const Reward& reward, double theta);

// The switched drift/dispersion selection for candidate origin value c:
// pair 1 below the left-most argmax on rays whose maximum beats c, pair 0
// elsewhere. base supplies the angular weights; radii are pinned to 1.
ModelSpec candidate_control(const ModelSpec& base, const ControlSpec& ctrl,
                            const std::vector<RayExtremum>& extrema, double c);

struct RayPencil {
  double theta = 0.0;
  MajorantHull hull;
  double initial_slope = 0.0;
};

// Per-ray hulls of the reward in the candidate scale coordinate.
std::vector<RayPencil> u_cpc(const ModelSpec& base, const ControlSpec& ctrl,
                             const Reward& reward, double c, int n_grid = 512);

struct ControlSolution {
  double c_star = 0.0;
  StoppingSolution value;  // V along the reward grids + stop region
  ModelSpec switched_spec;
  std::vector<std::pair<double, std::string>> strategy;  // per-ray label
};

ControlSolution solve_cstar(const ModelSpec& base, const ControlSpec& ctrl,
                            const Reward& reward, double tol = 1e-10, int n_grid = 512);

// Labels per the three-way comparison of the ray maximum against V(0).
std::vector<std::pair<double, std::string>> strategy_report(const Reward& reward,
                                                            double c_star);

}  // namespace walsh
