#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "gdc/common.hpp"

namespace gdc {

// Flat key=value run configuration.  Every key has a default; unknown keys
// are rejected at set time so typos fail fast.  `echo()` serializes the full
// effective configuration; feeding that text back reproduces the run.
class RunConfig {
public:
  RunConfig();  // all defaults

  static RunConfig from_file(const std::string& path);
  static RunConfig from_text(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has_nondefault(const std::string& key) const;

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  uint64_t get_seed() const;
  bool get_flag(const std::string& key) const;  // on/off, true/false, 1/0

  std::string echo() const;

private:
  std::map<std::string, std::string> values_;
};

}  // namespace gdc
