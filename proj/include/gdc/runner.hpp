#pragma once

#include <map>
#include <string>

#include "gdc/config.hpp"
#include "gdc/tasks.hpp"

namespace gdc {

// Command implementations shared by the shared-library API and (through it)
// the command-line tool.  Every command writes the echoed effective config
// into its output directory.

// Trains one module role ("gm" or "dm") on the corpus named in the config and
// writes <role>.gdcw plus training_loss.csv.  Returns the final epoch loss.
double cmd_train(const RunConfig& cfg, const std::string& role, const std::string& out_dir);

// Runs the configured task; writes u_final image, trace.csv, certificate.txt,
// metrics.txt (and kernel_estimate.kernel for blind deblurring).
TaskResult cmd_run(const RunConfig& cfg, const std::string& out_dir);

// Generates a synthetic dataset directory.
void cmd_synth(const RunConfig& cfg, const std::string& out_dir);

// Certifies a serialized trace; kind is "descent" or "fixed-point".  Writes
// <trace>.cert.txt beside the trace and returns the certificate.
Certificate cmd_certify(const RunConfig& cfg, const std::string& trace_path,
                        const std::string& kind);

// Runs the configured task over every observation in a dataset directory
// (img_*.pgm with gt/ and sidecar conventions) and aggregates metrics into
// bench.csv + summary.txt.  Worker threads are capped by GDC_THREADS.
// Returns the summary metric map.
std::map<std::string, double> cmd_bench(const RunConfig& cfg, const std::string& dataset_dir,
                                        const std::string& out_dir);

}  // namespace gdc
