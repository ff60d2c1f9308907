#include "gdc.h"

#include <cstring>
#include <string>

#include "gdc/common.hpp"
#include "gdc/config.hpp"
#include "gdc/metrics.hpp"
#include "gdc/neural.hpp"
#include "gdc/runner.hpp"
#include "gdc/tasks.hpp"

// Thin extern-C shell: every call unwraps opaque handles, forwards to the C++
// core and maps exceptions onto status codes.

namespace {

thread_local std::string g_last_error;

gdc_status set_error(gdc_status code, const char* what) {
  g_last_error = what ? what : "unknown error";
  return code;
}

gdc_status from_exception(const std::exception& e) {
  if (const auto* err = dynamic_cast<const gdc::Error*>(&e))
    return set_error(static_cast<gdc_status>(static_cast<int>(err->code())), err->what());
  return set_error(GDC_ERR_INTERNAL, e.what());
}

template <typename Fn>
gdc_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return from_exception(e);
  } catch (...) {
    return set_error(GDC_ERR_INTERNAL, "unknown failure");
  }
}

gdc_status require(bool ok, const char* what) {
  return ok ? GDC_OK : set_error(GDC_ERR_INPUT, what);
}

}  // namespace

struct gdc_image {
  gdc::ImageGrid grid;
};
struct gdc_kernel {
  gdc::BlurKernel kernel;
};
struct gdc_config {
  gdc::RunConfig cfg;
};
struct gdc_module {
  gdc::ConvNetModule module;
};
struct gdc_result {
  gdc::TaskResult result;
};

extern "C" {

const char* gdc_version(void) { return "1.0.0"; }

const char* gdc_last_error(void) { return g_last_error.c_str(); }

/* ---- images ---- */

gdc_status gdc_image_load(const char* path, gdc_image** out) {
  if (require(path && out, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    *out = new gdc_image{gdc::load_image(path)};
    return GDC_OK;
  });
}

gdc_status gdc_image_create(int h, int w, int c, const double* data, gdc_image** out) {
  if (require(out != nullptr, "null output handle") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    gdc::ImageGrid grid(h, w, c);
    if (data) std::memcpy(grid.data.data(), data, grid.data.size() * sizeof(double));
    *out = new gdc_image{std::move(grid)};
    return GDC_OK;
  });
}

gdc_status gdc_image_save(const gdc_image* img, const char* path) {
  if (require(img && path, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    gdc::save_image(img->grid, path);
    return GDC_OK;
  });
}

gdc_status gdc_image_dims(const gdc_image* img, int* h, int* w, int* c) {
  if (require(img != nullptr, "null image handle") != GDC_OK) return GDC_ERR_INPUT;
  if (h) *h = img->grid.h;
  if (w) *w = img->grid.w;
  if (c) *c = img->grid.c;
  return GDC_OK;
}

gdc_status gdc_image_data(const gdc_image* img, double* buf, size_t buf_len) {
  if (require(img && buf, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  if (require(buf_len >= img->grid.data.size(), "buffer too small") != GDC_OK)
    return GDC_ERR_INPUT;
  std::memcpy(buf, img->grid.data.data(), img->grid.data.size() * sizeof(double));
  return GDC_OK;
}

void gdc_image_destroy(gdc_image* img) { delete img; }

gdc_status gdc_psnr(const gdc_image* a, const gdc_image* b, double* out) {
  if (require(a && b && out, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    *out = gdc::psnr(a->grid, b->grid);
    return GDC_OK;
  });
}

gdc_status gdc_ssim(const gdc_image* a, const gdc_image* b, double* out) {
  if (require(a && b && out, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    *out = gdc::ssim(a->grid, b->grid);
    return GDC_OK;
  });
}

/* ---- kernels ---- */

gdc_status gdc_kernel_load(const char* path, gdc_kernel** out) {
  if (require(path && out, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    *out = new gdc_kernel{gdc::load_kernel(path)};
    return GDC_OK;
  });
}

gdc_status gdc_kernel_create(int kh, int kw, const double* data, gdc_kernel** out) {
  if (require(out != nullptr, "null output handle") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    gdc::BlurKernel k(kh, kw);
    if (data) std::memcpy(k.data.data(), data, k.data.size() * sizeof(double));
    k.project_simplex();
    *out = new gdc_kernel{std::move(k)};
    return GDC_OK;
  });
}

gdc_status gdc_kernel_save(const gdc_kernel* k, const char* path) {
  if (require(k && path, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    gdc::save_kernel(k->kernel, path);
    return GDC_OK;
  });
}

gdc_status gdc_kernel_dims(const gdc_kernel* k, int* kh, int* kw) {
  if (require(k != nullptr, "null kernel handle") != GDC_OK) return GDC_ERR_INPUT;
  if (kh) *kh = k->kernel.kh;
  if (kw) *kw = k->kernel.kw;
  return GDC_OK;
}

gdc_status gdc_kernel_data(const gdc_kernel* k, double* buf, size_t buf_len) {
  if (require(k && buf, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  if (require(buf_len >= k->kernel.data.size(), "buffer too small") != GDC_OK)
    return GDC_ERR_INPUT;
  std::memcpy(buf, k->kernel.data.data(), k->kernel.data.size() * sizeof(double));
  return GDC_OK;
}

void gdc_kernel_destroy(gdc_kernel* k) { delete k; }

/* ---- config ---- */

gdc_status gdc_config_create(gdc_config** out) {
  if (require(out != nullptr, "null output handle") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    *out = new gdc_config{};
    return GDC_OK;
  });
}

gdc_status gdc_config_load(const char* path, gdc_config** out) {
  if (require(path && out, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    *out = new gdc_config{gdc::RunConfig::from_file(path)};
    return GDC_OK;
  });
}

gdc_status gdc_config_set(gdc_config* cfg, const char* key, const char* value) {
  if (require(cfg && key && value, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    cfg->cfg.set(key, value);
    return GDC_OK;
  });
}

gdc_status gdc_config_get(const gdc_config* cfg, const char* key, char* buf, size_t buf_len) {
  if (require(cfg && key && buf && buf_len > 0, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    const std::string& v = cfg->cfg.get(key);
    size_t n = std::min(buf_len - 1, v.size());
    std::memcpy(buf, v.data(), n);
    buf[n] = '\0';
    return GDC_OK;
  });
}

void gdc_config_destroy(gdc_config* cfg) { delete cfg; }

/* ---- modules ---- */

gdc_status gdc_module_load(const char* path, gdc_module** out) {
  if (require(path && out, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    *out = new gdc_module{gdc::ConvNetModule::load(path)};
    return GDC_OK;
  });
}

gdc_status gdc_module_save(const gdc_module* m, const char* path) {
  if (require(m && path, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    m->module.save(path);
    return GDC_OK;
  });
}

void gdc_module_destroy(gdc_module* m) { delete m; }

/* ---- commands ---- */

gdc_status gdc_train(const gdc_config* cfg, const char* role, const char* out_dir) {
  if (require(cfg && role && out_dir, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    gdc::cmd_train(cfg->cfg, role, out_dir);
    return GDC_OK;
  });
}

gdc_status gdc_run(const gdc_config* cfg, const char* out_dir, gdc_result** out) {
  if (require(cfg && out_dir, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    gdc::TaskResult res = gdc::cmd_run(cfg->cfg, out_dir);
    if (out) *out = new gdc_result{std::move(res)};
    return GDC_OK;
  });
}

gdc_status gdc_synth(const gdc_config* cfg, const char* out_dir) {
  if (require(cfg && out_dir, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    gdc::cmd_synth(cfg->cfg, out_dir);
    return GDC_OK;
  });
}

gdc_status gdc_certify(const gdc_config* cfg, const char* trace_path, const char* kind) {
  if (require(cfg && trace_path && kind, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&]() -> gdc_status {
    gdc::Certificate cert = gdc::cmd_certify(cfg->cfg, trace_path, kind);
    if (cert.verdict == gdc::Verdict::fail)
      return set_error(GDC_ERR_CERTIFICATION, "certificate failed; see the written witnesses");
    return GDC_OK;
  });
}

gdc_status gdc_bench(const gdc_config* cfg, const char* dataset_dir, const char* out_dir) {
  if (require(cfg && dataset_dir && out_dir, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    gdc::cmd_bench(cfg->cfg, dataset_dir, out_dir);
    return GDC_OK;
  });
}

/* ---- results ---- */

gdc_status gdc_result_metric(const gdc_result* res, const char* name, double* out) {
  if (require(res && name && out, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  auto it = res->result.metrics.find(name);
  if (it == res->result.metrics.end()) return set_error(GDC_ERR_INPUT, "no such metric");
  *out = it->second;
  return GDC_OK;
}

gdc_status gdc_result_image(const gdc_result* res, gdc_image** out) {
  if (require(res && out, "null argument") != GDC_OK) return GDC_ERR_INPUT;
  return guarded([&] {
    *out = new gdc_image{res->result.u};
    return GDC_OK;
  });
}

gdc_status gdc_result_certificates(const gdc_result* res, int* count, int* all_passed) {
  if (require(res != nullptr, "null result handle") != GDC_OK) return GDC_ERR_INPUT;
  int n = static_cast<int>(res->result.certificates.size());
  int ok = 1;
  for (const auto& cert : res->result.certificates)
    if (cert.verdict == gdc::Verdict::fail) ok = 0;
  if (count) *count = n;
  if (all_passed) *all_passed = ok;
  return GDC_OK;
}

void gdc_result_destroy(gdc_result* res) { delete res; }

}  // extern "C"
