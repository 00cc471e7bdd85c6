#include "walsh/tree_geometry.hpp"

#include <algorithm>
#include <cmath>

namespace walsh {

RayPoint RayPoint::make(double r, double theta) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw ValidationError("RayPoint: radius must be finite and nonnegative");
  }
  if (!std::isfinite(theta)) {
    throw ValidationError("RayPoint: angle must be finite");
  }
  if (r == 0.0) return RayPoint{0.0, 0.0};
  theta = std::fmod(theta, kTwoPi);
  if (theta < 0.0) theta += kTwoPi;
  return RayPoint{r, theta};
}

double tree_distance(const RayPoint& a, const RayPoint& b) {
  if (a.r == 0.0 || b.r == 0.0 || a.theta == b.theta) {
    return std::fabs(a.r - b.r);
  }
  return a.r + b.r;
}

Domain::Domain(std::vector<double> angles, std::vector<XReal> ell)
    : angles_(std::move(angles)), ell_(std::move(ell)) {
  if (angles_.size() != ell_.size() || angles_.empty()) {
    throw ValidationError("Domain: angle and radius lists must match and be nonempty");
  }
  floor_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < angles_.size(); ++i) {
    const double th = angles_[i];
    if (!(th >= 0.0) || th >= kTwoPi) {
      throw ValidationError("Domain: angles must lie in [0, 2*pi)");
    }
    for (std::size_t j = i + 1; j < angles_.size(); ++j) {
      if (angles_[j] == th) throw ValidationError("Domain: duplicate angle");
    }
    if (ell_[i].is_finite()) {
      if (ell_[i].value() <= 0.0) {
        throw ValidationError("Domain: ell(theta) must be positive");
      }
      floor_ = std::min(floor_, ell_[i].value());
    }
  }
}

bool Domain::supports(double theta) const { return index_of(theta) >= 0; }

int Domain::index_of(double theta) const {
  for (std::size_t i = 0; i < angles_.size(); ++i) {
    if (angles_[i] == theta) return static_cast<int>(i);
  }
  return -1;
}

XReal Domain::ell(double theta) const {
  const int i = index_of(theta);
  if (i < 0) {
    throw UnsupportedRayError("Domain: angle " + std::to_string(theta) + " is not supported");
  }
  return ell_[i];
}

bool in_domain(const RayPoint& x, const Domain& d) {
  if (x.is_origin()) return true;
  const int i = d.index_of(x.theta);
  if (i < 0) {
    throw UnsupportedRayError("in_domain: point lies on unsupported ray theta=" +
                              std::to_string(x.theta));
  }
  const XReal l = d.ell_by_index(i);
  return !l.is_finite() || x.r < l.value();
}

}  // namespace walsh
