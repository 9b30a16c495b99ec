#include "zsr/kd_restoration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "zsr/nn/adam.hpp"

namespace zsr {

RestorationTraining train_restoration(const DDNBundle& bundle, const std::vector<DistilledPair>& dataset,
                                      const RunConfig& cfg, const RestoreTrainOptions& options) {
  validate_config(cfg);
  if (dataset.empty()) throw RestorationError("restoration dataset is empty");
  const ArchDescriptor arch = bundle.arch();
  const int f = arch.downsample_factor();

  auto fresh = build_networks<float>(cfg, Shape{3, f, f});
  const bool frozen = options.mode == EncoderMode::frozen;
  RestorationNet net{frozen ? bundle.content_encoder : std::move(fresh.content_encoder),
                     std::move(fresh.restoration_decoder), frozen};
  const std::string encoder_before = parameter_checksum(net.encoder);

  std::vector<nn::Param<float>*> trainable = net.decoder.params();
  if (!frozen) {
    for (auto* p : net.encoder.params()) trainable.push_back(p);
  }
  nn::Adam<float> opt(trainable, {cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, 1e-8});

  std::ofstream log;
  if (options.loss_log) {
    log.open(*options.loss_log, std::ios::binary);
    log << "epoch,mean_mse\n";
  }

  std::mt19937_64 rng(derive_seed(cfg.seed, "restore_order"));
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  RestorationTraining out{std::move(net), {}};
  RestorationNet& rn = out.net;
  for (int epoch = 1; epoch <= cfg.restore_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0;
    for (std::size_t idx : order) {
      const DistilledPair& pair = dataset[idx];
      const int ch = std::min(cfg.restore_patch_size, pair.clean.height()) / f * f;
      const int cw = std::min(cfg.restore_patch_size, pair.clean.width()) / f * f;
      if (ch < f || cw < f) throw ShapeError("restoration pair smaller than the downsampling factor");
      std::uniform_int_distribution<int> ys(0, pair.clean.height() - ch);
      std::uniform_int_distribution<int> xs(0, pair.clean.width() - cw);
      const int y0 = ys(rng);
      const int x0 = xs(rng);
      const Tensor<float> input = pair.distorted.tensor().crop(y0, x0, ch, cw);
      const Tensor<float> target = pair.clean.tensor().crop(y0, x0, ch, cw);

      opt.zero_grad();
      const auto enc = rn.encoder.forward(input);
      const auto tr = rn.decoder.forward_traced(enc.latent());
      const auto loss = mse_loss_grad(tr.output(), target);
      if (!std::isfinite(loss.value)) {
        throw DivergenceError("mse", "restoration training diverged at epoch " + std::to_string(epoch));
      }
      sum += loss.value;
      const Tensor<float> g_latent = rn.decoder.backward(tr, loss.grad, true, !frozen);
      if (!frozen) rn.encoder.backward(enc, g_latent, {}, true, false);
      opt.step();
    }
    const double mean = sum / double(dataset.size());
    out.epoch_mse.push_back(mean);
    if (log.is_open()) log << epoch << ',' << format_double(mean) << '\n';
    if (options.on_epoch) options.on_epoch(epoch, mean);
  }

  if (frozen && parameter_checksum(rn.encoder) != encoder_before) {
    throw RestorationError("frozen content encoder changed during restoration training");
  }
  return out;
}

ImageTensor restore(const RestorationNet& net, const ImageTensor& img) {
  const Tensor<float> x = pad_for_network(img, net.encoder.arch());
  return crop_to(net.decoder.forward(net.encoder.forward(x).latent()), img.height(), img.width());
}

Checkpoint restoration_to_checkpoint(const RestorationNet& net, const RunConfig& cfg, std::int64_t epochs) {
  Checkpoint ckpt;
  ckpt.manifest.config = cfg;
  ckpt.manifest.iteration = epochs;
  ckpt.manifest.seed = cfg.seed;
  export_params(net.encoder, ckpt);
  export_params(net.decoder, ckpt);
  return ckpt;
}

RestorationNet restoration_from_checkpoint(const Checkpoint& ckpt) {
  const RunConfig& cfg = ckpt.manifest.config;
  const ArchDescriptor arch = ArchDescriptor::from_config(cfg);
  RestorationNet net{EncoderNet<float>(EncoderRole::content, arch), DecoderNet<float>("restoration_decoder", arch),
                     true};
  import_params(net.encoder, ckpt);
  import_params(net.decoder, ckpt);
  return net;
}

int epochs_to_reach(const std::vector<double>& curve, double target) {
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i] <= target) return static_cast<int>(i) + 1;
  }
  return 0;
}

}  // namespace zsr
