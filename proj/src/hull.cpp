#include "walsh/hull.hpp"

#include <algorithm>
#include <cmath>

namespace walsh {

namespace {

double cross(double ox, double oy, double ax, double ay, double bx, double by) {
  return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox);
}

}  // namespace

double MajorantHull::eval(double x) const {
  if (x <= knot_x.front()) return knot_y.front();
  if (x >= knot_x.back()) return knot_y.back();
  auto it = std::upper_bound(knot_x.begin(), knot_x.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - knot_x.begin());
  const double t = (x - knot_x[k - 1]) / (knot_x[k] - knot_x[k - 1]);
  return knot_y[k - 1] + t * (knot_y[k] - knot_y[k - 1]);
}

MajorantHull least_concave_majorant(const std::vector<double>& abscissae,
                                    const std::vector<double>& ordinates, double c) {
  const std::size_t n = abscissae.size();
  if (n == 0 || ordinates.size() != n) {
    throw ValidationError("least_concave_majorant: empty or mismatched inputs");
  }
  if (abscissae.front() != 0.0) {
    throw ValidationError("least_concave_majorant: abscissae must start at 0");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(abscissae[i] > abscissae[i - 1])) {
      throw ValidationError("least_concave_majorant: abscissae must be strictly increasing");
    }
  }

  MajorantHull hull;
  std::vector<double> xs(abscissae), ys(ordinates);
  ys[0] = std::max(ys[0], c);

  // upper concave envelope; pops on left turns and on collinear triples
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < n; ++i) {
    while (stack.size() >= 2) {
      const std::size_t a = stack[stack.size() - 2], b = stack.back();
      if (cross(xs[a], ys[a], xs[b], ys[b], xs[i], ys[i]) >= 0.0) {
        stack.pop_back();
      } else {
        break;
      }
    }
    stack.push_back(i);
  }

  hull.knot_x.reserve(stack.size());
  hull.knot_y.reserve(stack.size());
  for (std::size_t idx : stack) {
    hull.knot_x.push_back(xs[idx]);
    hull.knot_y.push_back(ys[idx]);
  }
  hull.initial_slope = hull.knot_x.size() >= 2
                           ? (hull.knot_y[1] - hull.knot_y[0]) / (hull.knot_x[1] - hull.knot_x[0])
                           : 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const double gap = hull.eval(xs[i]) - ordinates[i];
    if (gap <= 1e-9 * (1.0 + std::fabs(ordinates[i]))) {
      hull.contact.push_back(static_cast<int>(i));
    }
  }
  return hull;
}

}  // namespace walsh
