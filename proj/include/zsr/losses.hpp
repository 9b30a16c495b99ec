#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "zsr/config.hpp"
#include "zsr/feature_map.hpp"
#include "zsr/image.hpp"
#include "zsr/networks.hpp"

namespace zsr {

/// Per-iteration loss values of the disentanglement stage.
struct LossReport {
  double adv_d = 0;  ///< discriminator side of the feature adversarial loss
  double adv_g = 0;  ///< non-saturating generator side
  double reg = 0;
  double d_cy = 0;
  double r_cy = 0;
  double total = 0;  ///< generator-side weighted sum
};

class LossError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scalar loss with its gradient w.r.t. the first argument.
template <class T>
struct LossWithGrad {
  T value{};
  Tensor<T> grad;
};

namespace detail {
template <class T>
void require_same(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  if (a.empty()) throw ShapeError(std::string(what) + ": empty input");
}

// log(1 + e^x) without overflow.
template <class T>
T softplus(T x) {
  return x > T(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <class T>
T sigmoid(T x) {
  return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
}
}  // namespace detail

/// Mean absolute error. Symmetric, zero iff the inputs are identical.
template <class T>
T cyclic_loss(const Tensor<T>& reconstruction, const Tensor<T>& target) {
  detail::require_same(reconstruction, target, "cyclic_loss");
  double acc = 0;
  for (std::size_t i = 0; i < target.size(); ++i) acc += std::abs(double(reconstruction.data()[i]) - target.data()[i]);
  return static_cast<T>(acc / double(target.size()));
}

/// Gradient is sign(reconstruction - target) / N (zero where equal).
template <class T>
LossWithGrad<T> cyclic_loss_grad(const Tensor<T>& reconstruction, const Tensor<T>& target) {
  LossWithGrad<T> out{cyclic_loss(reconstruction, target), Tensor<T>(target.shape())};
  const T inv = T(1) / static_cast<T>(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) {
    const T d = reconstruction.data()[i] - target.data()[i];
    out.grad.data()[i] = d > T(0) ? inv : (d < T(0) ? -inv : T(0));
  }
  return out;
}

/// Mean squared error.
template <class T>
T mse_loss(const Tensor<T>& prediction, const Tensor<T>& target) {
  detail::require_same(prediction, target, "mse_loss");
  double acc = 0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = double(prediction.data()[i]) - target.data()[i];
    acc += d * d;
  }
  return static_cast<T>(acc / double(target.size()));
}

template <class T>
LossWithGrad<T> mse_loss_grad(const Tensor<T>& prediction, const Tensor<T>& target) {
  LossWithGrad<T> out{mse_loss(prediction, target), Tensor<T>(target.shape())};
  const T scale = T(2) / static_cast<T>(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) {
    out.grad.data()[i] = scale * (prediction.data()[i] - target.data()[i]);
  }
  return out;
}

/// Sum of the per-map L1 norms divided by the total element count: the mean
/// absolute activation over all intermediate maps.
template <class T>
T feature_regularization_loss(const std::vector<Tensor<T>>& maps) {
  if (maps.empty()) throw LossError("feature_regularization_loss: no feature maps");
  double acc = 0;
  std::size_t n = 0;
  for (const auto& m : maps) {
    for (T v : m.values()) acc += std::abs(double(v));
    n += m.size();
  }
  if (n == 0) throw LossError("feature_regularization_loss: empty feature maps");
  return static_cast<T>(acc / double(n));
}

/// Value and per-map gradients sign(x) / N.
template <class T>
std::pair<T, std::vector<Tensor<T>>> feature_regularization_loss_grad(const std::vector<Tensor<T>>& maps) {
  const T value = feature_regularization_loss(maps);
  std::size_t n = 0;
  for (const auto& m : maps) n += m.size();
  const T inv = T(1) / static_cast<T>(n);
  std::vector<Tensor<T>> grads;
  grads.reserve(maps.size());
  for (const auto& m : maps) {
    Tensor<T> g(m.shape());
    for (std::size_t i = 0; i < m.size(); ++i) {
      const T v = m.data()[i];
      g.data()[i] = v > T(0) ? inv : (v < T(0) ? -inv : T(0));
    }
    grads.push_back(std::move(g));
  }
  return {value, std::move(grads)};
}

/// Both sides of the feature adversarial objective, from discriminator logits.
///
/// With s = sigmoid(logit): discriminator = -[log s_real + log(1 - s_fake)],
/// generator = -log s_fake. Evaluated through softplus so both stay finite.
template <class T>
struct AdversarialTerms {
  T discriminator_loss{};
  T generator_loss{};
  T d_disc_d_real{};  ///< d(discriminator_loss)/d(logit_real)
  T d_disc_d_fake{};
  T d_gen_d_fake{};   ///< d(generator_loss)/d(logit_fake)
};

template <class T>
AdversarialTerms<T> adversarial_terms(T logit_real, T logit_fake) {
  if (!std::isfinite(logit_real) || !std::isfinite(logit_fake)) {
    throw LossError("feature_adversarial_loss: non-finite discriminator output");
  }
  AdversarialTerms<T> t;
  t.discriminator_loss = detail::softplus(-logit_real) + detail::softplus(logit_fake);
  t.generator_loss = detail::softplus(-logit_fake);
  t.d_disc_d_real = detail::sigmoid(logit_real) - T(1);
  t.d_disc_d_fake = detail::sigmoid(logit_fake);
  t.d_gen_d_fake = detail::sigmoid(logit_fake) - T(1);
  return t;
}

template <class T>
struct AdversarialLoss {
  T discriminator_loss{};
  T generator_loss{};
};

/// Feature adversarial loss with `real` = content features of the reference and
/// `fake` = content features of the distorted image.
template <class T>
AdversarialLoss<T> feature_adversarial_loss(const Tensor<T>& real, const Tensor<T>& fake,
                                            const FeatureDiscriminatorNet<T>& disc) {
  detail::require_same(real, fake, "feature_adversarial_loss");
  for (const auto* m : {&real, &fake}) {
    for (T v : m->values()) {
      if (!std::isfinite(v)) throw LossError("feature_adversarial_loss: non-finite activations");
    }
  }
  const auto t = adversarial_terms(disc.logit(real), disc.logit(fake));
  return {t.discriminator_loss, t.generator_loss};
}

inline AdversarialLoss<float> feature_adversarial_loss(const FeatureMap& real, const FeatureMap& fake,
                                                       const FeatureDiscriminatorNet<float>& disc) {
  return feature_adversarial_loss(real.data, fake.data, disc);
}

/// Generator loss and its gradient w.r.t. the fake feature map. Discriminator
/// parameter gradients are not touched.
template <class T>
LossWithGrad<T> generator_loss_grad(const Tensor<T>& fake, FeatureDiscriminatorNet<T>& disc) {
  const auto tr = disc.forward_traced(fake);
  const T logit = tr.output().at(0, 0, 0);
  if (!std::isfinite(logit)) throw LossError("feature_adversarial_loss: non-finite discriminator output");
  const T value = detail::softplus(-logit);
  const T g = detail::sigmoid(logit) - T(1);
  return {value, disc.backward(tr, g, false)};
}

inline double cyclic_loss(const ImageTensor& reconstruction, const ImageTensor& target) {
  return cyclic_loss(reconstruction.tensor(), target.tensor());
}
inline double mse_loss(const ImageTensor& prediction, const ImageTensor& target) {
  return mse_loss(prediction.tensor(), target.tensor());
}
inline double feature_regularization_loss(const std::vector<FeatureMap>& maps) {
  std::vector<Tensor<float>> t;
  t.reserve(maps.size());
  for (const auto& m : maps) t.push_back(m.data);
  return feature_regularization_loss(t);
}

/// Generator-side weighted sum of the four disentanglement losses.
inline double total_loss(const LossReport& r, const RunConfig& cfg) {
  return cfg.lambda_adv * r.adv_g + cfg.lambda_reg * r.reg + cfg.lambda_dcy * r.d_cy + cfg.lambda_rcy * r.r_cy;
}

}  // namespace zsr
