#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>

#include "zsr/checkpoint.hpp"
#include "zsr/config.hpp"
#include "zsr/image.hpp"
#include "zsr/losses.hpp"
#include "zsr/networks.hpp"
#include "zsr/nn/adam.hpp"

namespace zsr {

/// The four disentanglement networks with the configuration that built them.
struct DDNBundle {
  EncoderNet<float> content_encoder;
  EncoderNet<float> distortion_encoder;
  DecoderNet<float> decoder;
  FeatureDiscriminatorNet<float> discriminator;
  RunConfig config;
  LossReport final_report;
  std::int64_t iteration = 0;

  [[nodiscard]] const ArchDescriptor& arch() const { return content_encoder.arch(); }
};

/// Freshly initialized bundle (the networks of build_networks without the restoration decoder).
DDNBundle make_untrained_bundle(const RunConfig& cfg);

Checkpoint bundle_to_checkpoint(const DDNBundle& bundle);
DDNBundle bundle_from_checkpoint(const Checkpoint& ckpt);

/// Raised when a training loss becomes non-finite; names the offending term.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::string term, const std::string& message)
      : std::runtime_error(message), term_(std::move(term)) {}
  [[nodiscard]] const std::string& term() const { return term_; }

 private:
  std::string term_;
};

struct PatchOrigin {
  int y = 0;
  int x = 0;
};

/// Uniform crop origin for a size x size window. Throws ShapeError if the image is smaller.
PatchOrigin sample_patch_origin(const Shape& image, int size, std::mt19937_64& rng);
ImageTensor sample_patch(const ImageTensor& img, int size, std::mt19937_64& rng);

/// Holds the optimizer states and performs single disentanglement iterations.
///
/// One iteration: encode both patches with both encoders, update the feature
/// discriminator on its own loss, then update the encoders and decoder on the
/// weighted generator-side total.
class DDNTrainer {
 public:
  explicit DDNTrainer(DDNBundle& bundle);

  LossReport training_step(const ImageTensor& reference_patch, const ImageTensor& distorted_patch);

 private:
  DDNBundle& bundle_;
  nn::Adam<float> disc_opt_;
  nn::Adam<float> gen_opt_;
};

struct DDNTrainOptions {
  /// When set: periodic checkpoints under `<dir>/ddn/`, final bundle at `<dir>/ddn/final`, log at `<dir>/ddn_loss.csv`.
  std::optional<std::filesystem::path> output_dir;
  std::function<void(std::int64_t, const LossReport&)> on_iteration;
};

/// Trains the bundle for cfg.ddn_iterations on independently sampled patches of the two images.
DDNBundle train_ddn(const ImageTensor& reference, const ImageTensor& distorted, const RunConfig& cfg,
                    const DDNTrainOptions& options = {});

/// D(E_c(x) + E_d(x)) on the whole image (reflect-padded to the downsampling factor, then cropped).
ImageTensor cyclic_reconstruction(const DDNBundle& bundle, const ImageTensor& img);

/// Mean |E_d| over all intermediates for `reference` divided by the same for `distorted`.
double distortion_response_ratio(const DDNBundle& bundle, const ImageTensor& reference, const ImageTensor& distorted);

/// Mean |E_d| over all intermediates of the whole image.
double distortion_response(const DDNBundle& bundle, const ImageTensor& img);

/// Reflect-pads `img` so both dims divide the factor.
Tensor<float> pad_for_network(const ImageTensor& img, const ArchDescriptor& arch);
/// Crops a network output back to `height` x `width`.
ImageTensor crop_to(const Tensor<float>& out, int height, int width);

}  // namespace zsr
