#pragma once

#include <vector>

#include "walsh/errors.hpp"
#include "walsh/extended_real.hpp"

namespace walsh {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Point of the plane in polar form. All points with r = 0 are the same
// point; the canonical form stores theta = 0 there, so equality is
// componentwise.
struct RayPoint {
  double r = 0.0;
  double theta = 0.0;

  static RayPoint origin() { return RayPoint{}; }

  // Canonicalizes: wraps theta into [0, 2*pi), collapses r = 0 onto theta = 0.
  static RayPoint make(double r, double theta);

  bool is_origin() const { return r == 0.0; }

  bool operator==(const RayPoint& o) const { return r == o.r && theta == o.theta; }
};

// Distance along rays through the origin: |r1 - r2| on a common ray,
// r1 + r2 across distinct rays.
double tree_distance(const RayPoint& a, const RayPoint& b);

// Radial extents ell(theta) over a finite set of supported angles, each
// bounded away from zero.
class Domain {
 public:
  Domain(std::vector<double> angles, std::vector<XReal> ell);

  const std::vector<double>& angles() const { return angles_; }
  bool supports(double theta) const;
  XReal ell(double theta) const;        // throws UnsupportedRayError
  XReal ell_by_index(int i) const { return ell_[i]; }
  int index_of(double theta) const;     // -1 if unsupported

  // Lower bound of ell over supported angles (+inf when every ray is infinite).
  double floor() const { return floor_; }

 private:
  std::vector<double> angles_;
  std::vector<XReal> ell_;
  double floor_;
};

// True iff x is the origin or 0 < r < ell(theta). Points with r > 0 on an
// unsupported ray are an error, not "outside".
bool in_domain(const RayPoint& x, const Domain& d);

}  // namespace walsh
