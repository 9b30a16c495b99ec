#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "zsr/config.hpp"
#include "zsr/degradations.hpp"

namespace zsr {

enum class Stage { synth, ddn, transfer, distill, restore, evaluate };

/// CLI name of a stage ("synth", "train-ddn", "transfer", "train-restore", "restore", "evaluate").
std::string_view stage_name(Stage s);
std::optional<Stage> parse_stage(std::string_view name);

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitStage = 3, kExitDivergence = 4 };

/// Failure of one pipeline stage; the message is prefixed with the stage name.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(Stage stage, int exit_code, const std::string& message)
      : std::runtime_error(std::string(stage_name(stage)) + ": " + message), stage_(stage), exit_code_(exit_code) {}
  [[nodiscard]] Stage stage() const { return stage_; }
  [[nodiscard]] int exit_code() const { return exit_code_; }

 private:
  Stage stage_;
  int exit_code_;
};

/// Artifact layout of one run directory.
struct PipelinePaths {
  explicit PipelinePaths(std::filesystem::path root_dir);

  std::filesystem::path root;
  std::filesystem::path ddn_final;     ///< ddn/final checkpoint
  std::filesystem::path ddn_loss;      ///< ddn_loss.csv
  std::filesystem::path dataset;       ///< dataset/ (pairs/, clean.png, manifest.txt)
  std::filesystem::path restore_ckpt;  ///< restore/ checkpoint
  std::filesystem::path restore_loss;  ///< restore_loss.csv
  std::filesystem::path restored;      ///< restored.png
  std::filesystem::path eval_csv;      ///< eval.csv
  std::filesystem::path run_manifest;  ///< run_manifest.txt
  std::filesystem::path state;         ///< pipeline_state.txt
};

inline constexpr const char* kOutputRootEnv = "ZSR_OUTPUT_ROOT";

/// cfg.output_dir, else $ZSR_OUTPUT_ROOT, else ./zsr_out.
std::filesystem::path resolve_output_root(const RunConfig& cfg);

/// Executes one stage from persisted artifacts. Throws PipelineError.
void run_stage(Stage stage, const RunConfig& cfg);

/// Runs disentanglement, transfer, restoration training and restoration, then
/// evaluation when a ground truth is configured. Throws PipelineError.
void run_pipeline(const RunConfig& cfg);

struct SynthOptions {
  std::filesystem::path clean;
  DegradationSpec spec = default_validation_spec();
  int offset_y = 16;
  int offset_x = 16;
  int crop_height = 0;
  int crop_width = 0;
  std::filesystem::path out_dir;
};

/// Writes reference.png, distorted.png, ground_truth.png and degradation.txt into out_dir.
void run_synth(const SynthOptions& options);

/// Maps an exception from any stage to its exit code.
int exit_code_for(const std::exception& e);

}  // namespace zsr
