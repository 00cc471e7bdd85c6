#pragma once

#include <stdexcept>
#include <string>

namespace walsh {

// Input or model-spec violated a structural requirement.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A theorem's hypothesis does not hold for this model; the requested
// quantity has no meaning here.
class NotApplicableError : public std::runtime_error {
 public:
  explicit NotApplicableError(const std::string& msg) : std::runtime_error(msg) {}
};

// Run parameters (step size, scheme choice, ...) incompatible with the model.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class UnsupportedRayError : public ValidationError {
 public:
  explicit UnsupportedRayError(const std::string& msg) : ValidationError(msg) {}
};

// Iterative scheme failed to meet its tolerance within the allowed budget.
class TruncationError : public std::runtime_error {
 public:
  explicit TruncationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace walsh
