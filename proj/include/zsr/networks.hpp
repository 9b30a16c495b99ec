#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "zsr/checkpoint.hpp"
#include "zsr/config.hpp"
#include "zsr/feature_map.hpp"
#include "zsr/image.hpp"
#include "zsr/nn/layers.hpp"

namespace zsr {

enum class EncoderRole { content, distortion };

/// Stage layout shared by the encoders and mirrored by the decoders.
///
/// Stage 0 keeps full resolution; each later stage halves it, so the spatial
/// downsampling factor is 2^(depth-1). Stage i has width * (i == 0 ? 1 : 2) channels.
struct ArchDescriptor {
  int depth = 3;
  int base_width = 32;

  [[nodiscard]] int stage_channels(int i) const { return i == 0 ? base_width : 2 * base_width; }
  [[nodiscard]] int latent_channels() const { return stage_channels(depth - 1); }
  [[nodiscard]] int downsample_factor() const { return 1 << (depth - 1); }
  [[nodiscard]] Shape latent_shape(const Shape& input) const;
  /// Throws ShapeError unless `input` is 3-channel with dims divisible by the factor.
  void check_input(const Shape& input) const;

  static ArchDescriptor from_config(const RunConfig& cfg) { return {cfg.depth, cfg.base_width}; }
};

/// Derives an independent generator seed for one network from the run seed.
std::uint64_t derive_seed(std::int64_t run_seed, std::string_view stream);

/// Encoder: `depth` stages of (conv, activation), no normalization.
///
/// Leaky ReLU throughout: slope 0.2 for content, 0.05 for distortion.
template <class T>
class EncoderNet {
 public:
  struct Pass {
    std::vector<nn::Trace<T>> stages;
    [[nodiscard]] const Tensor<T>& latent() const { return stages.back().output(); }
    [[nodiscard]] const Tensor<T>& intermediate(std::size_t i) const { return stages[i].output(); }
    [[nodiscard]] std::size_t depth() const { return stages.size(); }
  };

  EncoderNet(EncoderRole role, ArchDescriptor arch) : role_(role), arch_(arch) {
    if (arch.depth < 1 || arch.base_width < 1) throw ShapeError("encoder: depth and width must be positive");
    int in = 3;
    for (int i = 0; i < arch.depth; ++i) {
      const int out = arch.stage_channels(i);
      nn::Sequential<T> s;
      s.add(nn::Conv2d<T>(in, out, 3, i == 0 ? 1 : 2, 1));
      s.add(nn::Activation<T>(nn::ActKind::leaky_relu, role == EncoderRole::content ? 0.2 : 0.05));
      stages_.push_back(std::move(s));
      in = out;
    }
    name_params();
  }

  void init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& s : stages_) s.init(rng);
  }

  [[nodiscard]] EncoderRole role() const { return role_; }
  [[nodiscard]] const ArchDescriptor& arch() const { return arch_; }
  [[nodiscard]] std::string id() const {
    return role_ == EncoderRole::content ? "content_encoder" : "distortion_encoder";
  }
  [[nodiscard]] std::string descriptor() const {
    return std::string("encoder depth=") + std::to_string(arch_.depth) + " width=" +
           std::to_string(arch_.base_width) + " downsample=" + std::to_string(arch_.downsample_factor()) +
           (role_ == EncoderRole::content ? " norm=none act=leaky_relu(0.2)" : " norm=none act=leaky_relu(0.05)");
  }

  [[nodiscard]] Pass forward(const Tensor<T>& x) const {
    arch_.check_input(x.shape());
    Pass p;
    p.stages.reserve(stages_.size());
    const Tensor<T>* cur = &x;
    for (const auto& s : stages_) {
      p.stages.push_back(s.forward_traced(*cur));
      cur = &p.stages.back().output();
    }
    return p;
  }

  /// Backpropagates `g_latent` plus optional per-stage gradients on the intermediates.
  Tensor<T> backward(const Pass& p, const Tensor<T>& g_latent, const std::vector<Tensor<T>>& g_intermediates,
                     bool param_grads, bool input_grad) {
    Tensor<T> g = g_latent;
    for (std::size_t i = stages_.size(); i-- > 0;) {
      if (i < g_intermediates.size() && !g_intermediates[i].empty()) {
        if (g.empty()) {
          g = g_intermediates[i];
        } else {
          g += g_intermediates[i];
        }
      }
      if (g.empty()) g = Tensor<T>(p.intermediate(i).shape());
      g = stages_[i].backward(p.stages[i], std::move(g), param_grads, input_grad || i > 0);
    }
    return g;
  }

  std::vector<nn::Param<T>*> params() {
    std::vector<nn::Param<T>*> out;
    for (auto& s : stages_) {
      for (auto* p : s.params()) out.push_back(p);
    }
    return out;
  }
  std::vector<const nn::Param<T>*> params() const {
    std::vector<const nn::Param<T>*> out;
    for (const auto& s : stages_) {
      for (const auto* p : s.params()) out.push_back(p);
    }
    return out;
  }

 private:
  void name_params() {
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      int k = 0;
      for (auto* p : stages_[i].params()) {
        p->name = id() + ".stage" + std::to_string(i) + ".p" + std::to_string(k++);
      }
    }
  }

  EncoderRole role_;
  ArchDescriptor arch_;
  std::vector<nn::Sequential<T>> stages_;
};

/// Decoder mirroring the encoder: ×2 transposed-conv upsampling stages, then a
/// full-resolution conv to RGB squashed into (0, 1) by a sigmoid.
template <class T>
class DecoderNet {
 public:
  DecoderNet(std::string id, ArchDescriptor arch) : id_(std::move(id)), arch_(arch) {
    if (arch.depth < 1 || arch.base_width < 1) throw ShapeError("decoder: depth and width must be positive");
    for (int i = arch.depth - 1; i >= 1; --i) {
      net_.add(nn::ConvTranspose2d<T>(arch.stage_channels(i), arch.stage_channels(i - 1), 4, 2, 1));
      net_.add(nn::Activation<T>(nn::ActKind::leaky_relu, 0.2));
      net_.add(nn::Conv2d<T>(arch.stage_channels(i - 1), arch.stage_channels(i - 1), 3, 1, 1));
      net_.add(nn::Activation<T>(nn::ActKind::leaky_relu, 0.2));
    }
    net_.add(nn::Conv2d<T>(arch.stage_channels(0), 3, 3, 1, 1));
    net_.add(nn::Activation<T>(nn::ActKind::sigmoid));
    int k = 0;
    for (auto* p : net_.params()) p->name = id_ + ".p" + std::to_string(k++);
  }

  void init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    net_.init(rng);
  }

  [[nodiscard]] const std::string& id() const { return id_; }
  [[nodiscard]] const ArchDescriptor& arch() const { return arch_; }
  [[nodiscard]] std::string descriptor() const {
    return "decoder depth=" + std::to_string(arch_.depth) + " width=" + std::to_string(arch_.base_width) +
           " upsample=" + std::to_string(arch_.downsample_factor()) + " act=leaky_relu out=sigmoid";
  }

  void check_latent(const Shape& s) const {
    if (s.channels != arch_.latent_channels()) {
      throw ShapeError("decoder: latent has " + std::to_string(s.channels) + " channels, expected " +
                       std::to_string(arch_.latent_channels()));
    }
  }

  [[nodiscard]] Tensor<T> forward(const Tensor<T>& latent) const {
    check_latent(latent.shape());
    return net_.forward(latent);
  }
  [[nodiscard]] nn::Trace<T> forward_traced(const Tensor<T>& latent) const {
    check_latent(latent.shape());
    return net_.forward_traced(latent);
  }
  Tensor<T> backward(const nn::Trace<T>& tr, const Tensor<T>& g_out, bool param_grads, bool input_grad) {
    return net_.backward(tr, g_out, param_grads, input_grad);
  }

  std::vector<nn::Param<T>*> params() { return net_.params(); }
  std::vector<const nn::Param<T>*> params() const { return std::as_const(net_).params(); }

 private:
  std::string id_;
  ArchDescriptor arch_;
  nn::Sequential<T> net_;
};

/// Scores a latent feature map: two strided convs, global average pool, 1x1 conv to a logit.
template <class T>
class FeatureDiscriminatorNet {
 public:
  explicit FeatureDiscriminatorNet(int latent_channels) : channels_(latent_channels) {
    if (latent_channels < 1) throw ShapeError("discriminator: channels must be positive");
    net_.add(nn::Conv2d<T>(latent_channels, latent_channels, 3, 2, 1));
    net_.add(nn::Activation<T>(nn::ActKind::leaky_relu, 0.2));
    net_.add(nn::Conv2d<T>(latent_channels, latent_channels, 3, 2, 1));
    net_.add(nn::Activation<T>(nn::ActKind::leaky_relu, 0.2));
    net_.add(nn::GlobalAvgPool<T>());
    net_.add(nn::Conv2d<T>(latent_channels, 1, 1, 1, 0));
    int k = 0;
    for (auto* p : net_.params()) p->name = id() + ".p" + std::to_string(k++);
  }

  /// The scoring layer starts at zero, so the discriminator is neutral (logit 0)
  /// until it has been trained.
  void init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    net_.init(rng);
    const auto ps = net_.params();
    for (auto it = ps.end() - 2; it != ps.end(); ++it) std::fill((*it)->value.begin(), (*it)->value.end(), T(0));
  }

  [[nodiscard]] std::string id() const { return "discriminator"; }
  [[nodiscard]] std::string descriptor() const {
    return "discriminator channels=" + std::to_string(channels_) + " strided_convs=2 pool=global_avg out=logit";
  }

  void check_input(const Shape& s) const {
    if (s.channels != channels_) throw ShapeError("discriminator: expected " + std::to_string(channels_) + " channels");
  }

  [[nodiscard]] T logit(const Tensor<T>& fmap) const {
    check_input(fmap.shape());
    return net_.forward(fmap).at(0, 0, 0);
  }
  [[nodiscard]] nn::Trace<T> forward_traced(const Tensor<T>& fmap) const {
    check_input(fmap.shape());
    return net_.forward_traced(fmap);
  }
  /// Gradient w.r.t. the input map given d(loss)/d(logit).
  Tensor<T> backward(const nn::Trace<T>& tr, T g_logit, bool param_grads) {
    return net_.backward(tr, Tensor<T>(1, 1, 1, g_logit), param_grads, true);
  }

  std::vector<nn::Param<T>*> params() { return net_.params(); }
  std::vector<const nn::Param<T>*> params() const { return std::as_const(net_).params(); }

 private:
  int channels_;
  nn::Sequential<T> net_;
};

/// Logistic function evaluated in double and kept strictly inside (0, 1).
inline double squash(double logit) {
  const double s = logit >= 0 ? 1.0 / (1.0 + std::exp(-logit)) : std::exp(logit) / (1.0 + std::exp(logit));
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(s, lo, hi);
}

/// The five networks of the pipeline.
template <class T>
struct NetworkSet {
  EncoderNet<T> content_encoder;
  EncoderNet<T> distortion_encoder;
  DecoderNet<T> decoder;
  FeatureDiscriminatorNet<T> discriminator;
  DecoderNet<T> restoration_decoder;
};

/// Builds and deterministically initializes all five networks for `input_shape`.
template <class T>
NetworkSet<T> build_networks(const RunConfig& cfg, const Shape& input_shape) {
  const ArchDescriptor arch = ArchDescriptor::from_config(cfg);
  if (cfg.base_width < 1 || cfg.depth < 1) throw ShapeError("network width and depth must be positive");
  arch.check_input(input_shape);
  NetworkSet<T> set{EncoderNet<T>(EncoderRole::content, arch), EncoderNet<T>(EncoderRole::distortion, arch),
                    DecoderNet<T>("decoder", arch), FeatureDiscriminatorNet<T>(arch.latent_channels()),
                    DecoderNet<T>("restoration_decoder", arch)};
  set.content_encoder.init(derive_seed(cfg.seed, "content_encoder"));
  set.distortion_encoder.init(derive_seed(cfg.seed, "distortion_encoder"));
  set.decoder.init(derive_seed(cfg.seed, "decoder"));
  set.discriminator.init(derive_seed(cfg.seed, "discriminator"));
  set.restoration_decoder.init(derive_seed(cfg.seed, "restoration_decoder"));
  return set;
}

using ContentEncoder = EncoderNet<float>;
using Decoder = DecoderNet<float>;

struct Encoding {
  FeatureMap latent;
  std::vector<FeatureMap> intermediates;
};

/// Final latent plus every stage output (one per encoder stage).
Encoding encode(const EncoderNet<float>& net, const ImageTensor& img);
ImageTensor decode(const DecoderNet<float>& net, const FeatureMap& fmap);
/// Score in the open interval (0, 1).
double discriminate(const FeatureDiscriminatorNet<float>& net, const FeatureMap& fmap);

/// Total number of scalar parameters.
template <class Net>
std::size_t parameter_count(const Net& net) {
  std::size_t n = 0;
  for (const auto* p : net.params()) n += p->value.size();
  return n;
}

/// SHA-256 over all parameter values in order.
std::string parameter_checksum(const EncoderNet<float>& net);
std::string parameter_checksum(const DecoderNet<float>& net);

/// Copies parameters into / out of a checkpoint under their qualified names.
template <class Net>
void export_params(const Net& net, Checkpoint& ckpt) {
  ckpt.manifest.networks.push_back({net.id(), net.descriptor()});
  for (const auto* p : net.params()) ckpt.add_tensor(p->name, p->dims, p->value);
}

template <class Net>
void import_params(Net& net, const Checkpoint& ckpt) {
  for (auto* p : net.params()) {
    const auto& v = ckpt.blob(p->name);
    if (v.size() != p->value.size()) throw CheckpointError("size mismatch for " + p->name);
    p->value = v;
  }
}

}  // namespace zsr
