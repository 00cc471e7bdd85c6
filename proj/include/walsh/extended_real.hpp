#pragma once

#include <cassert>
#include <cmath>
#include <string>

namespace walsh {

// Nonnegative quantity that is either a finite double or +infinity.
// The explosion classifiers branch on exact finite/infinite dichotomies,
// so the tag is explicit instead of relying on IEEE infinities produced
// by overflow. Stipulates 1/inf = 0.
class XReal {
 public:
  XReal() : value_(0.0), finite_(true) {}

  static XReal finite(double v) {
    assert(std::isfinite(v));
    XReal x;
    x.value_ = v;
    x.finite_ = true;
    return x;
  }

  static XReal infinity() {
    XReal x;
    x.value_ = std::numeric_limits<double>::infinity();
    x.finite_ = false;
    return x;
  }

  bool is_finite() const { return finite_; }

  // Finite value; asserts the tag.
  double value() const {
    assert(finite_);
    return value_;
  }

  // Value as a plain double, +inf when infinite.
  double as_double() const {
    return finite_ ? value_ : std::numeric_limits<double>::infinity();
  }

  // 1/x with 1/inf = 0.
  double reciprocal() const { return finite_ ? 1.0 / value_ : 0.0; }

  std::string str() const {
    return finite_ ? std::to_string(value_) : std::string("inf");
  }

 private:
  double value_;
  bool finite_;
};

}  // namespace walsh
