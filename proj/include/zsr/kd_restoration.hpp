#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "zsr/distortion_transfer.hpp"

namespace zsr {

/// Restoration network: the content encoder (frozen copy from the disentanglement
/// stage, or trainable for the from-scratch baseline) followed by a fresh decoder.
struct RestorationNet {
  EncoderNet<float> encoder;
  DecoderNet<float> decoder;
  bool encoder_frozen = true;
};

enum class EncoderMode {
  frozen,   ///< pretrained content encoder, parameters never updated
  scratch,  ///< freshly initialized encoder trained jointly with the decoder
};

struct RestoreTrainOptions {
  EncoderMode mode = EncoderMode::frozen;
  std::optional<std::filesystem::path> loss_log;  ///< CSV epoch,mean_mse
  std::function<void(int, double)> on_epoch;
};

struct RestorationTraining {
  RestorationNet net;
  std::vector<double> epoch_mse;  ///< mean training MSE of each epoch
};

class RestorationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Trains the decoder for cfg.restore_epochs epochs on mse(D_res(E_c(distorted)), clean).
/// Each epoch visits every pair once in shuffled order, one pair per Adam step.
RestorationTraining train_restoration(const DDNBundle& bundle, const std::vector<DistilledPair>& dataset,
                                      const RunConfig& cfg, const RestoreTrainOptions& options = {});

/// D_res(E_c(img)); reflect-pads to the downsampling factor and crops back.
ImageTensor restore(const RestorationNet& net, const ImageTensor& img);

Checkpoint restoration_to_checkpoint(const RestorationNet& net, const RunConfig& cfg, std::int64_t epochs);
RestorationNet restoration_from_checkpoint(const Checkpoint& ckpt);

/// First 1-based epoch whose value is ≤ target, or 0 if never reached.
int epochs_to_reach(const std::vector<double>& curve, double target);

}  // namespace zsr
