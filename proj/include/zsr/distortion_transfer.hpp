#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "zsr/ddn_training.hpp"

namespace zsr {

/// One supervised pair: the reference carrying graded distortion, and the clean reference.
struct DistilledPair {
  ImageTensor distorted;
  ImageTensor clean;
  int alpha = 0;
};

/// Encodes the reference (content) and the distorted image (distortion) once and
/// decodes F_rc + (alpha_scale * alpha) F_dd for any alpha.
///
/// Both images are reflect-padded to the downsampling factor; the decoded output is
/// cropped back to the reference size. The padded sizes must agree.
class DistortionTransfer {
 public:
  DistortionTransfer(const DDNBundle& bundle, const ImageTensor& reference, const ImageTensor& distorted);

  [[nodiscard]] const FeatureMap& content_latent() const { return content_; }
  [[nodiscard]] const FeatureMap& distortion_latent() const { return distortion_; }
  [[nodiscard]] float weight(int alpha) const;
  [[nodiscard]] FeatureMap combined_latent(int alpha) const;
  [[nodiscard]] ImageTensor transfer(int alpha) const;

 private:
  const DDNBundle& bundle_;
  int height_;
  int width_;
  FeatureMap content_;
  FeatureMap distortion_;
};

/// D(E_c(reference) + (alpha_scale * alpha) E_d(distorted)); alpha must be ≥ 0.
ImageTensor transfer_distortion(const DDNBundle& bundle, const ImageTensor& reference, const ImageTensor& distorted,
                                int alpha);

/// Pairs for alpha = 1..n_alpha. With `out_dir`, writes pairs/alpha_<k>.png, clean.png and manifest.txt.
std::vector<DistilledPair> generate_kd_dataset(const DDNBundle& bundle, const ImageTensor& reference,
                                               const ImageTensor& distorted, const RunConfig& cfg,
                                               const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Reads a dataset directory written by generate_kd_dataset.
std::vector<DistilledPair> load_kd_dataset(const std::filesystem::path& dir);

}  // namespace zsr
