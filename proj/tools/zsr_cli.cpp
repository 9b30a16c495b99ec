// Command-line front end for the zero-shot restoration pipeline.
//
//   zsr synth --clean aerial.png --out synth/
//   zsr run --config run.cfg
//   zsr train-ddn --config run.cfg --set ddn_iterations=2000
//
// Exit codes: 0 success, 2 config error, 3 stage failure, 4 divergence.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zsr/pipeline.hpp"

namespace {

zsr::RunConfig build_config(const std::string& path, const std::vector<std::string>& overrides) {
  zsr::RunConfig cfg = path.empty() ? zsr::RunConfig{} : zsr::load_config(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw zsr::ConfigError("", "--set expects key=value, got '" + kv + "'");
    zsr::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot restoration by distortion disentanglement and distillation"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto add_config_opts = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "key = value run configuration file");
    sub->add_option("--set", overrides, "override one config key (key=value), repeatable");
  };

  zsr::SynthOptions synth;
  std::string degrade = zsr::format_degradation(zsr::default_validation_spec());
  std::uint64_t degrade_seed = 0;
  std::vector<int> offset{16, 16};
  std::vector<int> crop{0, 0};
  std::string clean_path, synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "cut a (reference, distorted, ground truth) triple from a clean image");
  synth_cmd->add_option("--clean", clean_path, "clean RGB PNG")->required()->check(CLI::ExistingFile);
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--degrade", degrade, "degradation, e.g. color_cast(0.8,1.1,0.8)+gaussian_blur(1.5)")
      ->capture_default_str();
  synth_cmd->add_option("--seed", degrade_seed, "noise seed")->capture_default_str();
  synth_cmd->add_option("--offset", offset, "misalignment offset y x")->expected(2)->capture_default_str();
  synth_cmd->add_option("--crop", crop, "crop height width (0 = largest that fits)")->expected(2);

  std::vector<std::pair<CLI::App*, zsr::Stage>> stage_cmds;
  auto add_stage = [&](zsr::Stage s, const std::string& help) {
    auto* sub = app.add_subcommand(std::string(zsr::stage_name(s)), help);
    add_config_opts(sub);
    stage_cmds.emplace_back(sub, s);
  };
  add_stage(zsr::Stage::ddn, "train the distortion disentanglement networks");
  add_stage(zsr::Stage::transfer, "write the graded-distortion dataset from a trained disentanglement checkpoint");
  add_stage(zsr::Stage::distill, "train the restoration decoder on the dataset with the frozen content encoder");
  add_stage(zsr::Stage::restore, "restore the distorted image");
  add_stage(zsr::Stage::evaluate, "PSNR/SSIM of the restored image against the ground truth");
  auto* run_cmd = app.add_subcommand("run", "run every stage end to end");
  add_config_opts(run_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) {
      synth.clean = clean_path;
      synth.out_dir = synth_out;
      synth.spec = zsr::parse_degradation(degrade, degrade_seed);
      synth.offset_y = offset[0];
      synth.offset_x = offset[1];
      synth.crop_height = crop[0];
      synth.crop_width = crop[1];
      zsr::run_synth(synth);
      return zsr::kExitOk;
    }
    const zsr::RunConfig cfg = build_config(config_path, overrides);
    if (run_cmd->parsed()) {
      zsr::run_pipeline(cfg);
      return zsr::kExitOk;
    }
    for (const auto& [sub, stage] : stage_cmds) {
      if (sub->parsed()) zsr::run_stage(stage, cfg);
    }
  } catch (const zsr::DegradationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return zsr::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return zsr::exit_code_for(e);
  }
  return zsr::kExitOk;
}
