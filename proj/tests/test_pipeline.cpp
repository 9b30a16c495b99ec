#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "test_util.hpp"
#include "zsr/config.hpp"
#include "zsr/metrics.hpp"
#include "zsr/pipeline.hpp"

using namespace zsr;
namespace fs = std::filesystem;

namespace {

/// Runs the CLI with stderr captured to `<dir>/stderr.txt`; returns the exit status.
int cli(const std::string& args, const fs::path& dir) {
  const std::string cmd = std::string(ZSR_CLI_PATH) + " " + args + " 2> " + (dir / "stderr.txt").string() + " > " +
                          (dir / "stdout.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Synthesizes a small triple and writes a matching tiny run config.
fs::path prepare(const std::string& name) {
  const fs::path dir = test::scratch_dir(name);
  REQUIRE(cli("synth --clean " + test::fixture("aerial_256.png").string() + " --out " + (dir / "synth").string() +
                  " --offset 4 4 --crop 40 36",
              dir) == 0);
  RunConfig cfg;
  cfg.base_width = 4;
  cfg.patch_size = 16;
  cfg.restore_patch_size = 16;
  cfg.ddn_iterations = 4;
  cfg.checkpoint_every = 2;
  cfg.n_alpha = 2;
  cfg.restore_epochs = 2;
  cfg.reference = (dir / "synth" / "reference.png").string();
  cfg.distorted = (dir / "synth" / "distorted.png").string();
  cfg.ground_truth = (dir / "synth" / "ground_truth.png").string();
  cfg.output_dir = (dir / "out").string();
  save_config(cfg, dir / "run.cfg");
  return dir;
}

}  // namespace

TEST_CASE("synth with zero offset makes the reference equal the ground truth") {
  const fs::path dir = test::scratch_dir("pipe_synth");
  REQUIRE(cli("synth --clean " + test::fixture("aerial_256.png").string() + " --out " + (dir / "a").string() +
                  " --offset 0 0 --crop 64 48",
              dir) == 0);
  CHECK(test::read_bytes(dir / "a" / "reference.png") == test::read_bytes(dir / "a" / "ground_truth.png"));
  CHECK(load_image(dir / "a" / "distorted.png").shape() == Shape{3, 64, 48});
  REQUIRE(cli("synth --clean " + test::fixture("aerial_256.png").string() + " --out " + (dir / "b").string() +
                  " --offset 0 0 --crop 64 48",
              dir) == 0);
  for (const char* f : {"reference.png", "distorted.png", "ground_truth.png", "degradation.txt"}) {
    CHECK_MESSAGE(test::read_bytes(dir / "a" / f) == test::read_bytes(dir / "b" / f), f);
  }
}

TEST_CASE("synth on the fixture reproduces the oracle's input PSNR") {
  const fs::path dir = test::scratch_dir("pipe_synth_oracle");
  REQUIRE(cli("synth --clean " + test::fixture("aerial_256.png").string() + " --out " + dir.string(), dir) == 0);
  // PNG quantization of the distorted image moves PSNR by a few hundredths of a dB at most
  const double db = psnr(load_image(dir / "distorted.png"), load_image(dir / "ground_truth.png")).db;
  CHECK(std::abs(db - test::oracle_value("default_spec_offset16_psnr")) < 0.05);
}

TEST_CASE("bad inputs map to config-error and missing-artifact exit codes") {
  const fs::path dir = prepare("pipe_errors");
  RunConfig cfg = load_config(dir / "run.cfg");
  cfg.distorted.clear();
  save_config(cfg, dir / "no_distorted.cfg");
  CHECK(cli("train-ddn --config " + (dir / "no_distorted.cfg").string(), dir) == kExitConfig);
  CHECK(slurp(dir / "stderr.txt").find("distorted") != std::string::npos);

  CHECK(cli("transfer --config " + (dir / "run.cfg").string(), dir) == kExitStage);
  CHECK(slurp(dir / "stderr.txt").find("train-ddn") != std::string::npos);

  CHECK(cli("train-ddn --config " + (dir / "run.cfg").string() + " --set lambda_reg=-1", dir) == kExitConfig);
  CHECK(slurp(dir / "stderr.txt").find("lambda_reg") != std::string::npos);
  CHECK(cli("train-ddn --config " + (dir / "run.cfg").string() + " --set no_such=1", dir) == kExitConfig);
  CHECK(cli("synth --clean " + test::fixture("aerial_256.png").string() + " --out " + (dir / "x").string() +
                " --degrade 'haze(2,0.5)'",
            dir) == kExitConfig);
}

TEST_CASE("stage-by-stage execution matches the monolithic run") {
  const fs::path dir = prepare("pipe_stages");
  const std::string c = " --config " + (dir / "run.cfg").string();
  REQUIRE(cli("run" + c + " --set output_dir=" + (dir / "mono").string(), dir) == 0);
  for (const char* stage : {"train-ddn", "transfer", "train-restore", "restore", "evaluate"}) {
    REQUIRE_MESSAGE(cli(std::string(stage) + c, dir) == 0, stage);
  }
  const fs::path staged = dir / "out";
  CHECK(test::read_bytes(staged / "restored.png") == test::read_bytes(dir / "mono" / "restored.png"));
  // the checkpoint echoes the config, whose output_dir legitimately differs
  auto without_output_dir = [](const fs::path& p) {
    std::istringstream in(slurp(p));
    std::string line, kept;
    while (std::getline(in, line)) {
      if (line.find("output_dir") == std::string::npos) kept += line + "\n";
    }
    return kept;
  };
  CHECK(without_output_dir(staged / "ddn" / "final" / "manifest.txt") ==
        without_output_dir(dir / "mono" / "ddn" / "final" / "manifest.txt"));
  CHECK(fs::exists(staged / "ddn" / "iter_000002" / "manifest.txt"));
  CHECK(fs::exists(staged / "dataset" / "manifest.txt"));
  CHECK(fs::exists(staged / "restore_loss.csv"));

  const std::string eval = slurp(staged / "eval.csv");
  CHECK(eval.rfind("image,psnr_db,psnr_capped,ssim\n", 0) == 0);
  CHECK(eval.find("aggregate,") != std::string::npos);
  CHECK(std::count(eval.begin(), eval.end(), '\n') == 3);

  const std::string manifest = slurp(staged / "run_manifest.txt");
  CHECK(manifest.find("config_hash " + config_hash(load_config(dir / "run.cfg"))) != std::string::npos);
  CHECK(manifest.find("restored.png") != std::string::npos);

  // a different config in the same output directory is refused
  CHECK(cli("restore" + c + " --set seed=9", dir) == kExitConfig);
}

TEST_CASE("output root falls back to the environment variable") {
  RunConfig cfg;
  ::setenv(kOutputRootEnv, "/tmp/zsr-env-root", 1);
  CHECK(resolve_output_root(cfg) == fs::path("/tmp/zsr-env-root"));
  cfg.output_dir = "explicit";
  CHECK(resolve_output_root(cfg) == fs::path("explicit"));
  ::unsetenv(kOutputRootEnv);
  cfg.output_dir.clear();
  CHECK(resolve_output_root(cfg) == fs::path("zsr_out"));
}

TEST_CASE("stage names round trip") {
  for (Stage s : {Stage::synth, Stage::ddn, Stage::transfer, Stage::distill, Stage::restore, Stage::evaluate}) {
    CHECK(parse_stage(stage_name(s)) == s);
  }
  CHECK_FALSE(parse_stage("bogus").has_value());
}
