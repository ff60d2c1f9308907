#include <filesystem>

#include "doctest.h"
#include "gdc/config.hpp"
#include "gdc/image.hpp"

using namespace gdc;

TEST_CASE("defaults are present and typed getters work") {
  RunConfig cfg;
  CHECK(cfg.get("task") == "smoothing");
  CHECK(cfg.get_double("gamma0") == doctest::Approx(1.0));
  CHECK(cfg.get_double("eta") == doctest::Approx(1.5));
  CHECK(cfg.get_int("max_iters") == 30);
  CHECK(cfg.get_seed() == 0);
  CHECK_FALSE(cfg.get_flag("timing"));
  CHECK(cfg.get_double("lambda") == doctest::Approx(-1.0));
}

TEST_CASE("unknown keys are rejected") {
  RunConfig cfg;
  CHECK_THROWS_AS(cfg.set("gamma_zero", "2.0"), InvalidInput);
  CHECK_THROWS_AS(cfg.get("not_a_key"), InvalidInput);
}

TEST_CASE("malformed numbers are rejected by typed getters") {
  RunConfig cfg;
  cfg.set("gamma0", "fast");
  CHECK_THROWS_AS(cfg.get_double("gamma0"), InvalidInput);
  cfg.set("max_iters", "7.5x");
  CHECK_THROWS_AS(cfg.get_int("max_iters"), InvalidInput);
  cfg.set("timing", "maybe");
  CHECK_THROWS_AS(cfg.get_flag("timing"), InvalidInput);
}

TEST_CASE("flag spellings") {
  RunConfig cfg;
  for (const char* v : {"on", "true", "1"}) {
    cfg.set("timing", v);
    CHECK(cfg.get_flag("timing"));
  }
  for (const char* v : {"off", "false", "0"}) {
    cfg.set("timing", v);
    CHECK_FALSE(cfg.get_flag("timing"));
  }
}

TEST_CASE("text parsing skips comments and blank lines") {
  RunConfig cfg = RunConfig::from_text(
      "# a comment\n"
      "\n"
      "task = deconvolution\n"
      "  gamma0=4.0   \n"
      "seed = 99 # trailing comment\n");
  CHECK(cfg.get("task") == "deconvolution");
  CHECK(cfg.get_double("gamma0") == doctest::Approx(4.0));
  CHECK(cfg.get_seed() == 99);
}

TEST_CASE("malformed lines are rejected") {
  CHECK_THROWS_AS(RunConfig::from_text("task deconvolution\n"), InvalidInput);
  CHECK_THROWS_AS(RunConfig::from_text("unknown_key = 3\n"), InvalidInput);
}

TEST_CASE("echo round-trips the effective configuration") {
  RunConfig cfg;
  cfg.set("task", "rain_pdm");
  cfg.set("gamma0", "2.5");
  cfg.set("seed", "31415");
  std::string text = cfg.echo();
  RunConfig back = RunConfig::from_text(text);
  CHECK(back.get("task") == "rain_pdm");
  CHECK(back.get_double("gamma0") == doctest::Approx(2.5));
  CHECK(back.get_seed() == 31415);
  CHECK(back.echo() == text);
}

TEST_CASE("nondefault detection") {
  RunConfig cfg;
  CHECK_FALSE(cfg.has_nondefault("gamma0"));
  cfg.set("gamma0", "3.0");
  CHECK(cfg.has_nondefault("gamma0"));
  cfg.set("gamma0", "1.0");
  CHECK_FALSE(cfg.has_nondefault("gamma0"));
}

TEST_CASE("config files load from disk") {
  auto dir = std::filesystem::temp_directory_path() / "gdc_config_tests";
  std::filesystem::create_directories(dir);
  auto path = dir / "run.cfg";
  write_file_atomic(path.string(), "task = interpolation\nmax_iters = 5\n");
  RunConfig cfg = RunConfig::from_file(path.string());
  CHECK(cfg.get("task") == "interpolation");
  CHECK(cfg.get_int("max_iters") == 5);
  CHECK_THROWS_AS(RunConfig::from_file((dir / "missing.cfg").string()), InvalidInput);
}
