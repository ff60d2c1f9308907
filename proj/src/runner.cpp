#include "gdc/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "gdc/metrics.hpp"
#include "gdc/synth.hpp"

namespace fs = std::filesystem;

namespace gdc {

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir);
}

void write_echo(const RunConfig& cfg, const std::string& out_dir) {
  write_file_atomic(out_dir + "/effective_config.txt", cfg.echo());
}

std::vector<std::string> corpus_images(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("corpus directory not found: " + dir);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name.size() > 4 && name.substr(name.size() - 4) == ".pgm" &&
        name.find(".mask.") == std::string::npos)
      files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .pgm images in corpus: " + dir);
  return files;
}

// Cuts deterministic patch pairs out of the corpus for module training.
struct TrainData {
  std::vector<ImageGrid> inputs;
  std::vector<ImageGrid> targets;  // clean counterparts (generative)
  std::vector<int> labels;         // degraded flags (discriminative)
};

TrainData build_corpus(const RunConfig& cfg, bool discriminative) {
  std::string dir = cfg.get("corpus");
  if (dir.empty()) throw InvalidInput("training needs corpus=<dir>");
  bool gradient_domain = cfg.get("train_domain") == "gradient";
  if (!gradient_domain && cfg.get("train_domain") != "image")
    throw InvalidInput("train_domain must be image or gradient");
  int patch = cfg.get_int("patch_size");
  int total = cfg.get_int("patches");
  double sigma = cfg.get_double("sigma");
  if (patch < 8 || total < 1) throw InvalidInput("need patch_size >= 8 and patches >= 1");
  uint64_t seed = cfg.get_seed();

  std::vector<ImageGrid> images;
  for (const auto& f : corpus_images(dir)) images.push_back(load_image(f));

  Rng pos_rng(seed, "mask");
  Rng noise_rng(seed, "noise");
  TrainData data;
  for (int s = 0; s < total; ++s) {
    const ImageGrid& src = images[s % images.size()];
    if (src.c != 1) throw InvalidInput("training corpus must be single-channel");
    if (src.h < patch || src.w < patch)
      throw InvalidInput("corpus image smaller than patch_size");
    int i0 = static_cast<int>(pos_rng.below(src.h - patch + 1));
    int j0 = static_cast<int>(pos_rng.below(src.w - patch + 1));
    ImageGrid clean(patch, patch, 1);
    for (int i = 0; i < patch; ++i)
      for (int j = 0; j < patch; ++j) clean.at(0, i, j) = src.at(0, i0 + i, j0 + j);
    ImageGrid noisy = add_noise(clean, sigma, noise_rng);
    if (gradient_domain) {
      clean = grad_pair(clean);
      noisy = grad_pair(noisy);
    }
    if (discriminative) {
      // Alternate degraded / clean samples.
      bool degraded = s % 2 == 0;
      data.inputs.push_back(degraded ? noisy : clean);
      data.labels.push_back(degraded ? 1 : 0);
    } else {
      data.inputs.push_back(noisy);
      data.targets.push_back(clean);
    }
  }
  return data;
}

std::optional<ConvNetModule> load_module(const RunConfig& cfg, const std::string& key) {
  std::string path = cfg.get(key);
  if (path.empty()) return std::nullopt;
  return ConvNetModule::load(path);
}

TaskSpec build_task_spec(const RunConfig& cfg, const ImageGrid& y) {
  TaskSpec spec;
  spec.task = parse_task(cfg.get("task"));
  spec.scheme = parse_scheme(cfg.get("scheme"));
  spec.y = y;
  spec.lambda = cfg.get_double("lambda");
  spec.schedule.gamma0 = cfg.get_double("gamma0");
  spec.schedule.eta = cfg.get_double("eta");
  spec.alpha_d = cfg.get_double("alpha_d");
  spec.stop.max_iters = cfg.get_int("max_iters");
  spec.stop.residual_tol = cfg.get_double("residual_tol");
  spec.stop.reconstruction_tol = cfg.get_double("reconstruction_tol");
  spec.wavelet_levels = cfg.get_int("wavelet_levels");
  spec.timing = cfg.get_flag("timing");
  spec.l_cap_scale = cfg.get_double("l_cap_scale");
  const std::string& init = cfg.get("init");
  if (init == "penalized")
    spec.init_penalized = true;
  else if (init != "observation")
    throw InvalidInput("init must be observation or penalized");
  spec.kernel_size = cfg.get_int("kernel_size");
  spec.pyramid_levels = cfg.get_int("pyramid_levels");
  spec.pyramid_scale = cfg.get_double("pyramid_scale");
  spec.t_inner = cfg.get_int("t_inner");
  spec.inner_iters = cfg.get_int("inner_iters");
  spec.mu = cfg.get_double("mu");
  return spec;
}

struct RunOutcome {
  TaskResult result;
  int channels = 1;
};

RunOutcome run_from_config(const RunConfig& cfg) {
  std::string input = cfg.get("input");
  if (input.empty()) throw InvalidInput("run needs input=<image path>");
  ImageGrid y = load_image(input);
  TaskSpec spec = build_task_spec(cfg, y);
  if (!cfg.get("kernel").empty()) spec.kernel = load_kernel(cfg.get("kernel"));
  if (!cfg.get("mask").empty()) spec.mask = binarize_mask(load_image(cfg.get("mask")));
  if (!cfg.get("gt").empty()) spec.gt = load_image(cfg.get("gt"));
  std::optional<ConvNetModule> gm = load_module(cfg, "gm_checkpoint");
  std::optional<ConvNetModule> dm = load_module(cfg, "dm_checkpoint");
  if (gm) spec.gm = &*gm;
  if (dm) spec.dm = &*dm;
  RunOutcome out;
  out.channels = y.c;
  out.result = run_task(spec);
  return out;
}

void write_run_outputs(const RunOutcome& out, const std::string& out_dir) {
  const TaskResult& res = out.result;
  save_image(res.u, out_dir + (res.u.c == 3 ? "/u_final.ppm" : "/u_final.pgm"));
  write_file_atomic(out_dir + "/trace.csv", res.trace.to_csv());
  std::ostringstream certs;
  for (const auto& cert : res.certificates) certs << cert.to_text() << "\n";
  write_file_atomic(out_dir + "/certificate.txt", certs.str());
  write_file_atomic(out_dir + "/metrics.txt", res.metrics_text());
  if (res.estimated_kernel) save_kernel(*res.estimated_kernel, out_dir + "/kernel_estimate.kernel");
  if (!res.level_traces.empty()) {
    for (size_t i = 0; i < res.level_traces.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "/trace_level_%02zu.csv", i);
      write_file_atomic(out_dir + name, res.level_traces[i].to_csv());
    }
  }
}

}  // namespace

double cmd_train(const RunConfig& cfg, const std::string& role, const std::string& out_dir) {
  if (role != "gm" && role != "dm") throw InvalidInput("training role must be gm or dm");
  ensure_dir(out_dir);
  write_echo(cfg, out_dir);

  bool discriminative = role == "dm";
  TrainData data = build_corpus(cfg, discriminative);
  int channels = data.inputs.front().c;
  int width = cfg.get_int("channels");
  int depth = cfg.get_int("depth");
  if (depth < 0) depth = discriminative ? 4 : 7;
  uint64_t seed = cfg.get_seed();

  TrainOptions opt;
  opt.epochs = cfg.get_int("epochs");
  opt.step_size = cfg.get_double("step_size");
  opt.seed = seed;
  if (opt.epochs < 1) throw InvalidInput("epochs must be >= 1");

  ConvNetModule module = discriminative
                             ? ConvNetModule::make_discriminative(channels, depth, width, seed)
                             : ConvNetModule::make_generative(channels, depth, width, seed);
  TrainReport report = discriminative
                           ? module.train_discriminative(data.inputs, data.labels, opt)
                           : module.train_generative(data.inputs, data.targets, opt);

  double delta = cfg.get_double("delta");
  if (delta > 0.0) module.spectral_normalize(delta);

  module.save(out_dir + "/" + role + ".gdcw");
  std::ostringstream csv;
  csv << "epoch,loss\n";
  for (size_t e = 0; e < report.epoch_loss.size(); ++e) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", e, report.epoch_loss[e]);
    csv << buf;
  }
  write_file_atomic(out_dir + "/training_loss.csv", csv.str());
  if (report.accuracy >= 0.0) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "accuracy: %.6f\n", report.accuracy);
    write_file_atomic(out_dir + "/accuracy.txt", buf);
  }
  return report.epoch_loss.back();
}

TaskResult cmd_run(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  write_echo(cfg, out_dir);
  RunOutcome out = run_from_config(cfg);
  write_run_outputs(out, out_dir);
  return std::move(out.result);
}

void cmd_synth(const RunConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  write_echo(cfg, out_dir);
  SynthOptions opt;
  opt.kind = cfg.get("kind");
  opt.count = cfg.get_int("count");
  opt.height = cfg.get_int("height");
  opt.width = cfg.get_int("width");
  opt.sigma = cfg.get_double("sigma");
  opt.missing = cfg.get_double("missing");
  opt.kernel_size = cfg.get_int("kernel_size");
  opt.kernel_sigma = cfg.get_double("kernel_sigma");
  opt.kernel_kind = cfg.get("kernel_kind");
  opt.seed = cfg.get_seed();
  synth_dataset(opt, out_dir);
}

Certificate cmd_certify(const RunConfig& cfg, const std::string& trace_path,
                        const std::string& kind) {
  std::ifstream in(trace_path);
  if (!in) throw IoError("cannot open trace: " + trace_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  PropagationTrace trace = PropagationTrace::from_csv(buf.str());
  double L = cfg.get_double("lipschitz");
  Certificate cert;
  if (kind == "descent")
    cert = certify_descent(trace, L);
  else if (kind == "fixed-point")
    cert = certify_fixed_point(trace, L, cfg.get_double("c_budget"));
  else
    throw InvalidInput("certify kind must be descent or fixed-point");
  write_file_atomic(trace_path + ".cert.txt", cert.to_text());
  return cert;
}

std::map<std::string, double> cmd_bench(const RunConfig& cfg, const std::string& dataset_dir,
                                        const std::string& out_dir) {
  ensure_dir(out_dir);
  write_echo(cfg, out_dir);
  if (!fs::is_directory(dataset_dir)) throw IoError("dataset directory not found: " + dataset_dir);

  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(dataset_dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name.size() > 4 && name.substr(name.size() - 4) == ".pgm" &&
        name.find(".mask.") == std::string::npos)
      stems.push_back(name.substr(0, name.size() - 4));
  }
  std::sort(stems.begin(), stems.end());
  if (stems.empty()) throw IoError("no observations in dataset: " + dataset_dir);

  struct Row {
    std::string stem;
    std::map<std::string, double> metrics;
    std::string error;
  };
  std::vector<Row> rows(stems.size());

  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= stems.size()) return;
      rows[i].stem = stems[i];
      try {
        RunConfig local = cfg;
        local.set("input", dataset_dir + "/" + stems[i] + ".pgm");
        std::string gt = dataset_dir + "/gt/" + stems[i] + ".pgm";
        if (fs::exists(gt)) local.set("gt", gt);
        std::string kernel = dataset_dir + "/" + stems[i] + ".kernel";
        if (fs::exists(kernel) && cfg.get("kernel").empty()) local.set("kernel", kernel);
        std::string mask = dataset_dir + "/" + stems[i] + ".mask.pgm";
        if (fs::exists(mask) && cfg.get("mask").empty()) local.set("mask", mask);
        std::string sub = out_dir + "/" + stems[i];
        rows[i].metrics = cmd_run(local, sub).metrics;
      } catch (const std::exception& e) {
        rows[i].error = e.what();
      }
    }
  };

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("GDC_THREADS")) {
    try {
      unsigned cap = static_cast<unsigned>(std::stoul(env));
      if (cap >= 1) hw = std::min(hw, cap);
    } catch (const std::exception&) {
      throw InvalidInput("GDC_THREADS must be a positive integer");
    }
  }
  unsigned n_workers = std::min<size_t>(hw, stems.size());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  std::ostringstream csv;
  csv << "file,psnr,ssim,psnr_input,iterations,status\n";
  std::map<std::string, double> sums;
  int ok = 0;
  for (const auto& row : rows) {
    auto metric = [&](const char* key) {
      auto it = row.metrics.find(key);
      return it == row.metrics.end() ? std::nan("") : it->second;
    };
    if (row.error.empty()) {
      ++ok;
      for (const auto& [k, v] : row.metrics) sums[k] += v;
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%d,ok\n", row.stem.c_str(),
                    metric("psnr"), metric("ssim"), metric("psnr_input"),
                    static_cast<int>(metric("iterations")));
      csv << buf;
    } else {
      csv << row.stem << ",,,,," << "error: " << row.error << "\n";
    }
  }
  if (ok == 0) throw PropagationError("benchmark failed on every input");

  std::map<std::string, double> summary;
  for (const auto& [k, v] : sums) summary["mean_" + k] = v / ok;
  summary["images"] = static_cast<double>(rows.size());
  summary["failures"] = static_cast<double>(rows.size() - ok);
  write_file_atomic(out_dir + "/bench.csv", csv.str());
  std::ostringstream sm;
  for (const auto& [k, v] : summary) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s: %.12g\n", k.c_str(), v);
    sm << buf;
  }
  write_file_atomic(out_dir + "/summary.txt", sm.str());
  return summary;
}

}  // namespace gdc
