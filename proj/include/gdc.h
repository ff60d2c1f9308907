/* Public C interface of the guided image-propagation library.
 *
 * All functions return a gdc_status; any non-GDC_OK result leaves a
 * human-readable message retrievable via gdc_last_error() (thread-local).
 * Objects are opaque handles created and destroyed through this interface.
 * Status values double as the canonical process exit codes.
 */
#ifndef GDC_H
#define GDC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  GDC_OK = 0,
  GDC_ERR_INTERNAL = 1,
  GDC_ERR_INPUT = 2,          /* bad arguments, files, formats, dimensions */
  GDC_ERR_TRAINING = 3,       /* training diverged (non-finite loss) */
  GDC_ERR_PROPAGATION = 4,    /* propagation produced a non-finite state */
  GDC_ERR_CERTIFICATION = 5,  /* a requested certificate failed */
} gdc_status;

typedef struct gdc_image gdc_image;
typedef struct gdc_kernel gdc_kernel;
typedef struct gdc_config gdc_config;
typedef struct gdc_module gdc_module;
typedef struct gdc_result gdc_result;

const char* gdc_version(void);
/* Message describing the most recent failure on this thread. */
const char* gdc_last_error(void);

/* ---- images (8-bit binary PGM/PPM on disk, doubles in memory) ---- */
gdc_status gdc_image_load(const char* path, gdc_image** out);
gdc_status gdc_image_create(int h, int w, int c, const double* data, gdc_image** out);
gdc_status gdc_image_save(const gdc_image* img, const char* path);
gdc_status gdc_image_dims(const gdc_image* img, int* h, int* w, int* c);
/* Copies h*w*c doubles (channel-major) into buf. */
gdc_status gdc_image_data(const gdc_image* img, double* buf, size_t buf_len);
void gdc_image_destroy(gdc_image* img);

gdc_status gdc_psnr(const gdc_image* a, const gdc_image* b, double* out);
gdc_status gdc_ssim(const gdc_image* a, const gdc_image* b, double* out);

/* ---- blur kernels (plain text "kh kw" header + rows) ---- */
gdc_status gdc_kernel_load(const char* path, gdc_kernel** out);
gdc_status gdc_kernel_create(int kh, int kw, const double* data, gdc_kernel** out);
gdc_status gdc_kernel_save(const gdc_kernel* k, const char* path);
gdc_status gdc_kernel_dims(const gdc_kernel* k, int* kh, int* kw);
gdc_status gdc_kernel_data(const gdc_kernel* k, double* buf, size_t buf_len);
void gdc_kernel_destroy(gdc_kernel* k);

/* ---- run configuration (flat key=value; unknown keys rejected) ---- */
gdc_status gdc_config_create(gdc_config** out);
gdc_status gdc_config_load(const char* path, gdc_config** out);
gdc_status gdc_config_set(gdc_config* cfg, const char* key, const char* value);
/* Copies the value into buf (NUL-terminated, truncated to buf_len). */
gdc_status gdc_config_get(const gdc_config* cfg, const char* key, char* buf, size_t buf_len);
void gdc_config_destroy(gdc_config* cfg);

/* ---- module checkpoints ---- */
gdc_status gdc_module_load(const char* path, gdc_module** out);
gdc_status gdc_module_save(const gdc_module* m, const char* path);
void gdc_module_destroy(gdc_module* m);

/* ---- commands (mirror the command-line subcommands) ---- */

/* Trains role "gm" or "dm" per cfg; writes <role>.gdcw and training_loss.csv
 * into out_dir. */
gdc_status gdc_train(const gdc_config* cfg, const char* role, const char* out_dir);

/* Runs the configured task; writes outputs into out_dir.  On success *out
 * (optional, may be NULL) receives a result handle. */
gdc_status gdc_run(const gdc_config* cfg, const char* out_dir, gdc_result** out);

/* Generates a synthetic dataset into out_dir. */
gdc_status gdc_synth(const gdc_config* cfg, const char* out_dir);

/* Certifies a trace CSV ("descent" or "fixed-point"); writes the certificate
 * text beside the trace.  Returns GDC_ERR_CERTIFICATION when the certificate
 * fails. */
gdc_status gdc_certify(const gdc_config* cfg, const char* trace_path, const char* kind);

/* Benchmarks the configured task over a dataset directory; writes bench.csv
 * and summary.txt into out_dir.  GDC_THREADS caps the worker count. */
gdc_status gdc_bench(const gdc_config* cfg, const char* dataset_dir, const char* out_dir);

/* ---- run results ---- */
/* Fetches a metric by name ("psnr", "iterations", ...); GDC_ERR_INPUT if the
 * run produced no such metric. */
gdc_status gdc_result_metric(const gdc_result* res, const char* name, double* out);
gdc_status gdc_result_image(const gdc_result* res, gdc_image** out);
/* Number of certificates attached to the run and their combined verdict
 * (1 = all passed, 0 = at least one failed). */
gdc_status gdc_result_certificates(const gdc_result* res, int* count, int* all_passed);
void gdc_result_destroy(gdc_result* res);

#ifdef __cplusplus
}
#endif

#endif /* GDC_H */
