#pragma once

#include <vector>

#include "walsh/errors.hpp"

namespace walsh {

// Least concave majorant of grid ordinates with a floor c on the value at 0,
// computed in whatever abscissa coordinate the caller supplies (the scale
// coordinate, for the stopping problems). Between knots the hull is affine.
struct MajorantHull {
  std::vector<double> knot_x;  // increasing, knot_x.front() == 0
  std::vector<double> knot_y;
  double initial_slope = 0.0;   // right slope at 0
  std::vector<int> contact;     // input indices where hull meets the ordinate

  double eval(double x) const;
};

// abscissae must be strictly increasing and start at 0. The point at 0 is
// raised to max(ordinate[0], c) before taking the upper concave envelope
// (single monotone sweep).
MajorantHull least_concave_majorant(const std::vector<double>& abscissae,
                                    const std::vector<double>& ordinates, double c);

}  // namespace walsh
