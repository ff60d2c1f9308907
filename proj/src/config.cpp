#include "gdc/config.hpp"

#include <fstream>
#include <sstream>

namespace gdc {

namespace {

const std::map<std::string, std::string>& default_values() {
  static const std::map<std::string, std::string> defaults = {
      // task selection and inputs
      {"task", "smoothing"},          // deconvolution | blind_deblur | interpolation | smoothing | rain_pdm
      {"scheme", "gdc"},              // ablation arm: g | gd | gc | gdc
      {"input", ""},                  // observed image path
      {"gt", ""},                     // optional reference image
      {"kernel", ""},                 // blur kernel path (deconvolution; reference for blind)
      {"mask", ""},                   // observation mask path (interpolation)
      {"gm_checkpoint", ""},
      {"dm_checkpoint", ""},
      // optimization
      {"lambda", "-1"},               // prior weight; negative = task default
      {"gamma0", "1.0"},
      {"eta", "1.5"},
      {"alpha_d", "0.1"},
      {"max_iters", "30"},
      {"residual_tol", "-1"},         // negative disables
      {"reconstruction_tol", "-1"},   // negative disables
      {"wavelet_levels", "2"},
      {"init", "observation"},        // observation | penalized
      {"l_cap_scale", "1.0"},
      {"timing", "off"},              // on writes wall-clock ms into traces
      // training
      {"corpus", ""},                 // directory of clean images
      {"train_domain", "image"},      // image | gradient (2-channel modules)
      {"sigma", "0.02"},
      {"epochs", "30"},
      {"step_size", "0.05"},
      {"patch_size", "32"},
      {"patches", "40"},
      {"channels", "16"},             // module width
      {"depth", "-1"},                // conv layers; negative = role default (7 gm / 4 dm)
      {"delta", "0"},                 // spectral target; 0 skips normalization
      // blind deblurring
      {"kernel_size", "7"},
      {"pyramid_levels", "3"},
      {"pyramid_scale", "0.75"},
      {"t_inner", "5"},
      {"inner_iters", "8"},
      {"mu", "1e-3"},
      // synthesis
      {"kind", "noise"},              // noise | blur | mask | text_mask
      {"count", "10"},
      {"height", "64"},
      {"width", "64"},
      {"missing", "0.6"},
      {"kernel_sigma", "1.5"},
      {"kernel_kind", "gaussian"},    // gaussian | motion
      // certification
      {"c_budget", "-1"},             // negative = fit from the trace
      {"lipschitz", "2"},             // data-term L for CSV-based certification
      // reproducibility
      {"seed", "0"},
  };
  return defaults;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig::RunConfig() : values_(default_values()) {}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidInput("unknown config key: " + key);
  it->second = value;
}

bool RunConfig::has_nondefault(const std::string& key) const {
  return get(key) != default_values().at(key);
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw InvalidInput("unknown config key: " + key);
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw InvalidInput("config key '" + key + "' is not a number: " + v);
  }
}

int RunConfig::get_int(const std::string& key) const {
  const std::string& v = get(key);
  try {
    size_t pos = 0;
    int i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw InvalidInput("config key '" + key + "' is not an integer: " + v);
  }
}

uint64_t RunConfig::get_seed() const {
  const std::string& v = get("seed");
  try {
    size_t pos = 0;
    uint64_t s = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return s;
  } catch (const std::exception&) {
    throw InvalidInput("config key 'seed' is not a nonnegative integer: " + v);
  }
}

bool RunConfig::get_flag(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw InvalidInput("config key '" + key + "' is not a flag (on/off): " + v);
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(lineno) + " is not key=value: " + line);
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

std::string RunConfig::echo() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << "=" << v << "\n";
  return out.str();
}

}  // namespace gdc
