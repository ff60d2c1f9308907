// Spawns the installed command-line binary and checks exit codes and outputs.
// The binary path arrives through the GDC_CLI_PATH compile definition.
#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"

namespace {

std::string cli() { return GDC_CLI_PATH; }

std::string fresh_dir(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "gdc_cli_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

int run_cmd(const std::string& args) {
  std::string cmd = cli() + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("help exits cleanly") {
  CHECK(run_cmd("--help") == 0);
  CHECK(run_cmd("run --help") == 0);
}

TEST_CASE("unknown config keys exit with the input-error code") {
  auto out = fresh_dir("badkey");
  CHECK(run_cmd("--set no_such_key=1 --out " + out + " run") == 2);
}

TEST_CASE("missing input file exits with the input-error code") {
  auto out = fresh_dir("noinput");
  CHECK(run_cmd("--set task=smoothing --set input=/nope.pgm --out " + out + " run") == 2);
}

TEST_CASE("synth then run then certify round trip") {
  auto data = fresh_dir("pipeline_data");
  auto out = fresh_dir("pipeline_out");
  CHECK(run_cmd("--set kind=noise --set count=2 --set height=32 --set width=32 --seed 3 --out " +
                data + " synth") == 0);
  CHECK(std::filesystem::exists(data + "/img_001.pgm"));

  std::string run_args = "--set task=smoothing --set input=" + data +
                         "/img_000.pgm --set gt=" + data +
                         "/gt/img_000.pgm --set max_iters=6 --set gamma0=4.0 --out " + out + " run";
  CHECK(run_cmd(run_args) == 0);
  CHECK(std::filesystem::exists(out + "/u_final.pgm"));
  CHECK(std::filesystem::exists(out + "/trace.csv"));
  CHECK(std::filesystem::exists(out + "/metrics.txt"));

  CHECK(run_cmd("--out " + out + " certify " + out + "/trace.csv") == 0);
  CHECK(std::filesystem::exists(out + "/trace.csv.cert.txt"));
}

TEST_CASE("rain task certifies fixed-point evidence through the cli") {
  auto data = fresh_dir("rain_data");
  auto out = fresh_dir("rain_out");
  CHECK(run_cmd("--set kind=noise --set count=1 --set height=32 --set width=32 --seed 5 --out " +
                data + " synth") == 0);
  std::string run_args = "--set task=rain_pdm --set input=" + data +
                         "/img_000.pgm --set max_iters=10 --out " + out + " run";
  CHECK(run_cmd(run_args) == 0);
  CHECK(run_cmd("--out " + out + " certify --kind fixed-point " + out + "/trace.csv") == 0);
}

TEST_CASE("bench writes aggregates") {
  auto data = fresh_dir("bench_data");
  auto out = fresh_dir("bench_out");
  CHECK(run_cmd("--set kind=noise --set count=2 --set height=32 --set width=32 --seed 9 --out " +
                data + " synth") == 0);
  CHECK(run_cmd("--set task=smoothing --set max_iters=4 --set gamma0=4.0 --out " + out + " bench " +
                data) == 0);
  CHECK(std::filesystem::exists(out + "/bench.csv"));
  CHECK(std::filesystem::exists(out + "/summary.txt"));
}

TEST_CASE("config file plus set overrides compose") {
  auto dir = fresh_dir("cfgfile");
  std::string cfg_path = dir + "/run.cfg";
  {
    std::FILE* f = std::fopen(cfg_path.c_str(), "wb");
    REQUIRE(f);
    std::fputs("kind = noise\ncount = 1\nheight = 32\nwidth = 32\n", f);
    std::fclose(f);
  }
  CHECK(run_cmd("--config " + cfg_path + " --set count=2 --out " + dir + " synth") == 0);
  CHECK(std::filesystem::exists(dir + "/img_001.pgm"));
}
