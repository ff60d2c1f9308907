#pragma once

#include <stdexcept>
#include <string>

namespace gdc {

// Error categories. Values double as process exit codes and C-API statuses,
// so they must stay in sync with include/gdc.h.
enum class errc : int {
  ok = 0,
  internal = 1,
  invalid_input = 2,
  training_diverged = 3,
  propagation_failed = 4,
  certification_failed = 5,
};

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

private:
  errc code_;
};

struct InvalidInput : Error {
  explicit InvalidInput(const std::string& what) : Error(errc::invalid_input, what) {}
};

struct IoError : InvalidInput {
  explicit IoError(const std::string& what) : InvalidInput(what) {}
};

struct DimensionError : InvalidInput {
  explicit DimensionError(const std::string& what) : InvalidInput(what) {}
};

struct TrainingError : Error {
  explicit TrainingError(const std::string& what) : Error(errc::training_diverged, what) {}
};

struct PropagationError : Error {
  explicit PropagationError(const std::string& what) : Error(errc::propagation_failed, what) {}
};

}  // namespace gdc
