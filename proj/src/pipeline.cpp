#include "zsr/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "zsr/checksum.hpp"
#include "zsr/kd_restoration.hpp"
#include "zsr/metrics.hpp"

namespace zsr {
namespace fs = std::filesystem;

namespace {

constexpr Stage kAllStages[] = {Stage::synth, Stage::ddn, Stage::transfer, Stage::distill, Stage::restore,
                                Stage::evaluate};

// pipeline_state.txt: "config_hash <hex>" then "stage <name> <seconds>" per completed stage.
struct PipelineState {
  std::string config_hash;
  std::map<std::string, double> stage_seconds;

  static std::optional<PipelineState> load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    PipelineState s;
    std::string tag;
    while (in >> tag) {
      if (tag == "config_hash") {
        in >> s.config_hash;
      } else if (tag == "stage") {
        std::string name;
        double secs = 0;
        in >> name >> secs;
        s.stage_seconds[name] = secs;
      } else {
        std::string rest;
        std::getline(in, rest);
      }
    }
    return s;
  }

  void save(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary);
    out << "config_hash " << config_hash << "\n";
    for (const auto& [name, secs] : stage_seconds) out << "stage " << name << " " << format_double(secs) << "\n";
  }
};

void write_run_manifest(const PipelinePaths& p, const RunConfig& cfg, const PipelineState& state) {
  std::ofstream out(p.run_manifest, std::ios::binary);
  out << "config_hash " << state.config_hash << "\n";
  out << "seed " << cfg.seed << "\n";
  for (Stage s : kAllStages) {
    const auto it = state.stage_seconds.find(std::string(stage_name(s)));
    if (it != state.stage_seconds.end()) out << "stage_seconds " << it->first << " " << format_double(it->second) << "\n";
  }
  const fs::path artifacts[] = {p.ddn_final / "manifest.txt", p.ddn_loss,     p.dataset / "manifest.txt",
                                p.restore_ckpt / "manifest.txt", p.restore_loss, p.restored,
                                p.eval_csv};
  for (const auto& a : artifacts) {
    if (fs::exists(a)) out << "artifact " << fs::relative(a, p.root).generic_string() << " " << sha256_file(a) << "\n";
  }
}

ImageTensor load_configured_image(Stage stage, const std::string& field, const std::string& path) {
  if (path.empty()) throw PipelineError(stage, kExitConfig, field + ": path not set in config");
  if (!fs::exists(path)) throw PipelineError(stage, kExitConfig, field + ": file not found: " + path);
  return load_image(path);
}

void require_artifact(Stage stage, const fs::path& path, std::string_view producer) {
  if (!fs::exists(path)) {
    throw PipelineError(stage, kExitStage,
                        "missing prerequisite artifact " + path.string() + " (run " + std::string(producer) + " first)");
  }
}

void log_line(const std::string& msg) { std::cerr << msg << std::endl; }

void execute(Stage stage, const RunConfig& cfg, const PipelinePaths& p) {
  switch (stage) {
    case Stage::synth:
      throw PipelineError(stage, kExitConfig, "synth takes its inputs from flags, not from a run config");
    case Stage::ddn: {
      const ImageTensor ref = load_configured_image(stage, "reference", cfg.reference);
      const ImageTensor dist = load_configured_image(stage, "distorted", cfg.distorted);
      DDNTrainOptions opt;
      opt.output_dir = p.root;
      const int every = std::max(1, cfg.ddn_iterations / 20);
      opt.on_iteration = [every](std::int64_t it, const LossReport& r) {
        if (it % every == 0) {
          log_line("train-ddn: iteration " + std::to_string(it) + " total=" + format_double(r.total) +
                   " reg=" + format_double(r.reg) + " d_cy=" + format_double(r.d_cy) + " r_cy=" + format_double(r.r_cy));
        }
      };
      train_ddn(ref, dist, cfg, opt);
      break;
    }
    case Stage::transfer: {
      require_artifact(stage, p.ddn_final / "manifest.txt", "train-ddn");
      const ImageTensor ref = load_configured_image(stage, "reference", cfg.reference);
      const ImageTensor dist = load_configured_image(stage, "distorted", cfg.distorted);
      const DDNBundle bundle = bundle_from_checkpoint(load_checkpoint(p.ddn_final));
      generate_kd_dataset(bundle, ref, dist, cfg, p.dataset);
      break;
    }
    case Stage::distill: {
      require_artifact(stage, p.ddn_final / "manifest.txt", "train-ddn");
      require_artifact(stage, p.dataset / "manifest.txt", "transfer");
      const DDNBundle bundle = bundle_from_checkpoint(load_checkpoint(p.ddn_final));
      const auto dataset = load_kd_dataset(p.dataset);
      RestoreTrainOptions opt;
      opt.loss_log = p.restore_loss;
      const int every = std::max(1, cfg.restore_epochs / 15);
      opt.on_epoch = [every](int epoch, double mse) {
        if (epoch % every == 0) log_line("train-restore: epoch " + std::to_string(epoch) + " mse=" + format_double(mse));
      };
      const auto trained = train_restoration(bundle, dataset, cfg, opt);
      save_checkpoint(restoration_to_checkpoint(trained.net, cfg, cfg.restore_epochs), p.restore_ckpt);
      break;
    }
    case Stage::restore: {
      require_artifact(stage, p.restore_ckpt / "manifest.txt", "train-restore");
      const ImageTensor dist = load_configured_image(stage, "distorted", cfg.distorted);
      const RestorationNet net = restoration_from_checkpoint(load_checkpoint(p.restore_ckpt));
      save_image(restore(net, dist), p.restored);
      break;
    }
    case Stage::evaluate: {
      require_artifact(stage, p.restored, "restore");
      const ImageTensor gt = load_configured_image(stage, "ground_truth", cfg.ground_truth);
      const ImageTensor restored = load_image(p.restored);
      EvalReport report;
      report.rows.push_back({p.restored.filename().string(), psnr(restored, gt), ssim(restored, gt)});
      std::ofstream out(p.eval_csv, std::ios::binary);
      out << report.to_csv();
      log_line("evaluate: psnr=" + format_double(report.rows[0].psnr.db) + " dB ssim=" + format_double(report.rows[0].ssim));
      break;
    }
  }
}

void run_checked(Stage stage, const RunConfig& cfg, bool fresh) {
  try {
    validate_config(cfg);
  } catch (const ConfigError& e) {
    throw PipelineError(stage, kExitConfig, e.what());
  }
  const PipelinePaths p(resolve_output_root(cfg));
  fs::create_directories(p.root);
  const std::string hash = config_hash(cfg);
  PipelineState state;
  if (auto existing = PipelineState::load(p.state); existing && !fresh) {
    if (existing->config_hash != hash) {
      throw PipelineError(stage, kExitConfig,
                          "config differs from the one used for earlier stages in " + p.root.string() +
                              " (use a fresh output_dir)");
    }
    state = *existing;
  }
  state.config_hash = hash;
  save_config(cfg, p.root / "config.txt");

  const auto t0 = std::chrono::steady_clock::now();
  try {
    execute(stage, cfg, p);
  } catch (const PipelineError&) {
    throw;
  } catch (const DivergenceError& e) {
    throw PipelineError(stage, kExitDivergence, e.what());
  } catch (const ConfigError& e) {
    throw PipelineError(stage, kExitConfig, e.what());
  } catch (const std::exception& e) {
    throw PipelineError(stage, kExitStage, e.what());
  }
  state.stage_seconds[std::string(stage_name(stage))] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  state.save(p.state);
  write_run_manifest(p, cfg, state);
}

}  // namespace

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::synth: return "synth";
    case Stage::ddn: return "train-ddn";
    case Stage::transfer: return "transfer";
    case Stage::distill: return "train-restore";
    case Stage::restore: return "restore";
    case Stage::evaluate: return "evaluate";
  }
  return "unknown";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : kAllStages) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

PipelinePaths::PipelinePaths(fs::path root_dir)
    : root(std::move(root_dir)),
      ddn_final(root / "ddn" / "final"),
      ddn_loss(root / "ddn_loss.csv"),
      dataset(root / "dataset"),
      restore_ckpt(root / "restore"),
      restore_loss(root / "restore_loss.csv"),
      restored(root / "restored.png"),
      eval_csv(root / "eval.csv"),
      run_manifest(root / "run_manifest.txt"),
      state(root / "pipeline_state.txt") {}

fs::path resolve_output_root(const RunConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) return env;
  return "zsr_out";
}

void run_stage(Stage stage, const RunConfig& cfg) { run_checked(stage, cfg, false); }

void run_pipeline(const RunConfig& cfg) {
  bool first = true;
  for (Stage s : {Stage::ddn, Stage::transfer, Stage::distill, Stage::restore}) {
    run_checked(s, cfg, first);
    first = false;
  }
  if (!cfg.ground_truth.empty()) run_checked(Stage::evaluate, cfg, false);
}

void run_synth(const SynthOptions& o) {
  try {
    const ImageTensor clean = load_image(o.clean);
    const auto pair = make_validation_pair(clean, o.spec, o.offset_y, o.offset_x, o.crop_height, o.crop_width);
    fs::create_directories(o.out_dir);
    save_image(pair.reference, o.out_dir / "reference.png");
    save_image(pair.distorted, o.out_dir / "distorted.png");
    save_image(pair.ground_truth, o.out_dir / "ground_truth.png");
    std::ofstream rec(o.out_dir / "degradation.txt", std::ios::binary);
    rec << "degrade = " << format_degradation(o.spec) << "\n"
        << "seed = " << o.spec.seed << "\n"
        << "offset = " << o.offset_y << "," << o.offset_x << "\n"
        << "crop = " << pair.reference.height() << "x" << pair.reference.width() << "\n";
  } catch (const DegradationError& e) {
    throw PipelineError(Stage::synth, kExitConfig, e.what());
  } catch (const std::exception& e) {
    throw PipelineError(Stage::synth, kExitStage, e.what());
  }
}

int exit_code_for(const std::exception& e) {
  if (const auto* p = dynamic_cast<const PipelineError*>(&e)) return p->exit_code();
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const DivergenceError*>(&e)) return kExitDivergence;
  return kExitStage;
}

}  // namespace zsr
