// Command-line front end.  Links only the public C interface; all GDC
// functionality flows through the shared library.
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gdc.h"

namespace {

int fail(gdc_status status) {
  std::fprintf(stderr, "error: %s\n", gdc_last_error());
  return static_cast<int>(status);
}

struct ConfigHandle {
  gdc_config* cfg = nullptr;
  ~ConfigHandle() { gdc_config_destroy(cfg); }
};

// Builds the effective config: file (if any), then --set overrides, then
// --seed.
gdc_status build_config(const std::string& config_path, const std::vector<std::string>& sets,
                        const std::string& seed, ConfigHandle& out) {
  gdc_status st = config_path.empty() ? gdc_config_create(&out.cfg)
                                      : gdc_config_load(config_path.c_str(), &out.cfg);
  if (st != GDC_OK) return st;
  for (const std::string& kv : sets) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return GDC_ERR_INPUT;
    }
    st = gdc_config_set(out.cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (st != GDC_OK) return st;
  }
  if (!seed.empty()) {
    st = gdc_config_set(out.cfg, "seed", seed.c_str());
    if (st != GDC_OK) return st;
  }
  return GDC_OK;
}

void print_metric(const gdc_result* res, const char* name, bool quiet) {
  if (quiet) return;
  double v = 0.0;
  if (gdc_result_metric(res, name, &v) == GDC_OK) std::printf("%s: %.6f\n", name, v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guided image propagation: learned modules with certified control"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", seed;
  std::vector<std::string> sets;
  bool quiet = false;
  app.add_option("--config", config_path, "Path to a key=value config file")->capture_default_str();
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--set", sets, "Override one config key (key=value, repeatable)");
  app.add_flag("--quiet", quiet, "Suppress normal output");

  auto* train = app.add_subcommand("train", "Train a generative or discriminative module");
  std::string role;
  train->add_option("role", role, "Module role: gm or dm")->required();

  auto* run = app.add_subcommand("run", "Run the configured restoration task");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");

  auto* certify = app.add_subcommand("certify", "Re-check a serialized trace");
  std::string trace_path, kind = "descent";
  certify->add_option("trace", trace_path, "trace.csv produced by a run")->required();
  certify->add_option("--kind", kind, "descent or fixed-point")->capture_default_str();

  auto* bench = app.add_subcommand("bench", "Run the task across a dataset directory");
  std::string dataset_dir;
  bench->add_option("dataset", dataset_dir, "Dataset directory (img_*.pgm + gt/)")->required();

  CLI11_PARSE(app, argc, argv);

  ConfigHandle cfg;
  gdc_status st = build_config(config_path, sets, seed, cfg);
  if (st != GDC_OK) return fail(st);

  if (train->parsed()) {
    st = gdc_train(cfg.cfg, role.c_str(), out_dir.c_str());
    if (st != GDC_OK) return fail(st);
    if (!quiet) std::printf("wrote %s/%s.gdcw\n", out_dir.c_str(), role.c_str());
    return 0;
  }

  if (run->parsed()) {
    gdc_result* res = nullptr;
    st = gdc_run(cfg.cfg, out_dir.c_str(), &res);
    if (st != GDC_OK) return fail(st);
    print_metric(res, "psnr", quiet);
    print_metric(res, "ssim", quiet);
    print_metric(res, "psnr_input", quiet);
    print_metric(res, "iterations", quiet);
    int certs = 0, ok = 1;
    gdc_result_certificates(res, &certs, &ok);
    if (!quiet && certs > 0)
      std::printf("certificates: %d (%s)\n", certs, ok ? "all passed" : "FAILED");
    gdc_result_destroy(res);
    if (!quiet) std::printf("outputs in %s\n", out_dir.c_str());
    return 0;
  }

  if (synth->parsed()) {
    st = gdc_synth(cfg.cfg, out_dir.c_str());
    if (st != GDC_OK) return fail(st);
    if (!quiet) std::printf("dataset in %s\n", out_dir.c_str());
    return 0;
  }

  if (certify->parsed()) {
    st = gdc_certify(cfg.cfg, trace_path.c_str(), kind.c_str());
    if (st == GDC_OK) {
      if (!quiet) std::printf("certificate: pass\n");
      return 0;
    }
    if (st == GDC_ERR_CERTIFICATION) {
      std::fprintf(stderr, "certificate: FAIL (%s)\n", gdc_last_error());
      return static_cast<int>(st);
    }
    return fail(st);
  }

  if (bench->parsed()) {
    st = gdc_bench(cfg.cfg, dataset_dir.c_str(), out_dir.c_str());
    if (st != GDC_OK) return fail(st);
    if (!quiet) std::printf("benchmark results in %s\n", out_dir.c_str());
    return 0;
  }

  return 0;
}
