#pragma once

#include <cmath>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "zsr/nn/gemm.hpp"
#include "zsr/tensor.hpp"

namespace zsr::nn {

/// A named trainable tensor together with its accumulated gradient.
template <class T>
struct Param {
  std::string name;
  std::vector<int> dims;
  std::vector<T> value;
  std::vector<T> grad;

  Param() = default;
  Param(std::vector<int> d, T fill) : dims(std::move(d)) {
    std::size_t n = 1;
    for (int v : dims) n *= static_cast<std::size_t>(v);
    value.assign(n, fill);
    grad.assign(n, T(0));
  }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

namespace detail {

template <class T>
void im2col(const T* x, int channels, int h, int w, int k, int stride, int pad, int out_h, int out_w,
            T* col) {
  const std::size_t cols = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    const T* plane = x + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* row = col + (static_cast<std::size_t>(c * k + ky) * k + kx) * cols;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          T* dst = row + static_cast<std::size_t>(oy) * out_w;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + out_w, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            dst[ox] = (ix >= 0 && ix < w) ? src[ix] : T(0);
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters-and-adds columns back into the image grid.
template <class T>
void col2im(const T* col, int channels, int h, int w, int k, int stride, int pad, int out_h, int out_w,
            T* x) {
  const std::size_t cols = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    T* plane = x + static_cast<std::size_t>(c) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* row = col + (static_cast<std::size_t>(c * k + ky) * k + kx) * cols;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          const T* src = row + static_cast<std::size_t>(oy) * out_w;
          T* dst = plane + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

template <class T>
void uniform_init(std::vector<T>& v, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& x : v) x = static_cast<T>(dist(rng));
}

}  // namespace detail

/// 2-D convolution, zero padding.
template <class T>
class Conv2d {
 public:
  Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad)
      : in_(in_ch), out_(out_ch), k_(kernel), stride_(stride), pad_(pad),
        weight_({out_ch, in_ch, kernel, kernel}, T(0)), bias_({out_ch}, T(0)) {}

  void init(std::mt19937_64& rng) {
    detail::uniform_init(weight_.value, 1.0 / std::sqrt(double(in_ * k_ * k_)), rng);
  }

  [[nodiscard]] Shape output_shape(const Shape& s) const {
    if (s.channels != in_) throw ShapeError("conv: expected " + std::to_string(in_) + " input channels");
    const int oh = (s.height + 2 * pad_ - k_) / stride_ + 1;
    const int ow = (s.width + 2 * pad_ - k_) / stride_ + 1;
    if (oh <= 0 || ow <= 0) throw ShapeError("conv: input " + to_string(s) + " too small");
    return {out_, oh, ow};
  }

  Tensor<T> forward(const Tensor<T>& x) const {
    const Shape os = output_shape(x.shape());
    const int n = os.height * os.width;
    const int kk = in_ * k_ * k_;
    std::vector<T> col(static_cast<std::size_t>(kk) * n);
    detail::im2col(x.data(), in_, x.height(), x.width(), k_, stride_, pad_, os.height, os.width,
                   col.data());
    Tensor<T> y(os);
    for (int o = 0; o < out_; ++o) std::fill(y.channel(o), y.channel(o) + n, bias_.value[o]);
    gemm(false, false, out_, n, kk, T(1), weight_.value.data(), col.data(), T(1), y.data());
    return y;
  }

  Tensor<T> backward(const Tensor<T>& x, const Tensor<T>& gy, bool param_grads, bool input_grad) {
    const Shape os = gy.shape();
    const int n = os.height * os.width;
    const int kk = in_ * k_ * k_;
    std::vector<T> col(static_cast<std::size_t>(kk) * n);
    if (param_grads) {
      detail::im2col(x.data(), in_, x.height(), x.width(), k_, stride_, pad_, os.height, os.width,
                     col.data());
      gemm(false, true, out_, kk, n, T(1), gy.data(), col.data(), T(1), weight_.grad.data());
      for (int o = 0; o < out_; ++o) {
        T acc = 0;
        const T* g = gy.channel(o);
        for (int i = 0; i < n; ++i) acc += g[i];
        bias_.grad[o] += acc;
      }
    }
    if (!input_grad) return {};
    gemm(true, false, kk, n, out_, T(1), weight_.value.data(), gy.data(), T(0), col.data());
    Tensor<T> gx(x.shape());
    detail::col2im(col.data(), in_, x.height(), x.width(), k_, stride_, pad_, os.height, os.width,
                   gx.data());
    return gx;
  }

  std::vector<Param<T>*> params() { return {&weight_, &bias_}; }
  std::vector<const Param<T>*> params() const { return {&weight_, &bias_}; }

 private:
  int in_, out_, k_, stride_, pad_;
  Param<T> weight_;
  Param<T> bias_;
};

/// Transposed convolution (fractionally strided), used for ×2 upsampling.
template <class T>
class ConvTranspose2d {
 public:
  ConvTranspose2d(int in_ch, int out_ch, int kernel, int stride, int pad)
      : in_(in_ch), out_(out_ch), k_(kernel), stride_(stride), pad_(pad),
        weight_({in_ch, out_ch, kernel, kernel}, T(0)), bias_({out_ch}, T(0)) {}

  void init(std::mt19937_64& rng) {
    // fan-in of each output pixel is in * (k / stride)^2
    const double fan = double(in_) * k_ * k_ / (double(stride_) * stride_);
    detail::uniform_init(weight_.value, 1.0 / std::sqrt(fan), rng);
  }

  [[nodiscard]] Shape output_shape(const Shape& s) const {
    if (s.channels != in_) throw ShapeError("tconv: expected " + std::to_string(in_) + " input channels");
    return {out_, (s.height - 1) * stride_ - 2 * pad_ + k_, (s.width - 1) * stride_ - 2 * pad_ + k_};
  }

  Tensor<T> forward(const Tensor<T>& x) const {
    const Shape os = output_shape(x.shape());
    const int n = x.height() * x.width();
    const int kk = out_ * k_ * k_;
    std::vector<T> col(static_cast<std::size_t>(kk) * n);
    gemm(true, false, kk, n, in_, T(1), weight_.value.data(), x.data(), T(0), col.data());
    Tensor<T> y(os);
    detail::col2im(col.data(), out_, os.height, os.width, k_, stride_, pad_, x.height(), x.width(),
                   y.data());
    for (int o = 0; o < out_; ++o) {
      T* p = y.channel(o);
      for (std::size_t i = 0; i < os.plane(); ++i) p[i] += bias_.value[o];
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& x, const Tensor<T>& gy, bool param_grads, bool input_grad) {
    const int n = x.height() * x.width();
    const int kk = out_ * k_ * k_;
    std::vector<T> col(static_cast<std::size_t>(kk) * n);
    detail::im2col(gy.data(), out_, gy.height(), gy.width(), k_, stride_, pad_, x.height(), x.width(),
                   col.data());
    if (param_grads) {
      gemm(false, true, in_, kk, n, T(1), x.data(), col.data(), T(1), weight_.grad.data());
      for (int o = 0; o < out_; ++o) {
        T acc = 0;
        const T* g = gy.channel(o);
        for (std::size_t i = 0; i < gy.shape().plane(); ++i) acc += g[i];
        bias_.grad[o] += acc;
      }
    }
    if (!input_grad) return {};
    Tensor<T> gx(x.shape());
    gemm(false, false, in_, n, kk, T(1), weight_.value.data(), col.data(), T(0), gx.data());
    return gx;
  }

  std::vector<Param<T>*> params() { return {&weight_, &bias_}; }
  std::vector<const Param<T>*> params() const { return {&weight_, &bias_}; }

 private:
  int in_, out_, k_, stride_, pad_;
  Param<T> weight_;
  Param<T> bias_;
};

/// Per-channel normalization over the spatial extent, with learned scale and shift.
template <class T>
class InstanceNorm {
 public:
  explicit InstanceNorm(int channels, double eps = 1e-5)
      : channels_(channels), eps_(eps), gamma_({channels}, T(1)), beta_({channels}, T(0)) {}

  void init(std::mt19937_64&) {}

  [[nodiscard]] Shape output_shape(const Shape& s) const {
    if (s.channels != channels_) throw ShapeError("instance norm: channel mismatch");
    return s;
  }

  Tensor<T> forward(const Tensor<T>& x) const {
    Tensor<T> y(x.shape());
    const std::size_t n = x.shape().plane();
    for (int c = 0; c < channels_; ++c) {
      const auto [mean, inv] = stats(x.channel(c), n);
      const T* src = x.channel(c);
      T* dst = y.channel(c);
      for (std::size_t i = 0; i < n; ++i) {
        dst[i] = static_cast<T>(gamma_.value[c] * (src[i] - mean) * inv + beta_.value[c]);
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& x, const Tensor<T>& gy, bool param_grads, bool input_grad) {
    Tensor<T> gx = input_grad ? Tensor<T>(x.shape()) : Tensor<T>();
    const std::size_t n = x.shape().plane();
    for (int c = 0; c < channels_; ++c) {
      const auto [mean, inv] = stats(x.channel(c), n);
      const T* src = x.channel(c);
      const T* g = gy.channel(c);
      double sum_g = 0, sum_gx = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double xhat = (src[i] - mean) * inv;
        sum_g += g[i];
        sum_gx += g[i] * xhat;
      }
      if (param_grads) {
        gamma_.grad[c] += static_cast<T>(sum_gx);
        beta_.grad[c] += static_cast<T>(sum_g);
      }
      if (!input_grad) continue;
      const double gamma = gamma_.value[c];
      const double dn = static_cast<double>(n);
      T* dst = gx.channel(c);
      for (std::size_t i = 0; i < n; ++i) {
        const double xhat = (src[i] - mean) * inv;
        dst[i] = static_cast<T>(gamma * inv * (g[i] - sum_g / dn - xhat * sum_gx / dn));
      }
    }
    return gx;
  }

  std::vector<Param<T>*> params() { return {&gamma_, &beta_}; }
  std::vector<const Param<T>*> params() const { return {&gamma_, &beta_}; }

 private:
  std::pair<double, double> stats(const T* p, std::size_t n) const {
    double mean = 0;
    for (std::size_t i = 0; i < n; ++i) mean += p[i];
    mean /= static_cast<double>(n);
    double var = 0;
    for (std::size_t i = 0; i < n; ++i) var += (p[i] - mean) * (p[i] - mean);
    var /= static_cast<double>(n);
    return {mean, 1.0 / std::sqrt(var + eps_)};
  }

  int channels_;
  double eps_;
  Param<T> gamma_;
  Param<T> beta_;
};

enum class ActKind { leaky_relu, sigmoid };

template <class T>
class Activation {
 public:
  explicit Activation(ActKind kind, double slope = 0.2) : kind_(kind), slope_(slope) {}

  void init(std::mt19937_64&) {}
  [[nodiscard]] Shape output_shape(const Shape& s) const { return s; }

  Tensor<T> forward(const Tensor<T>& x) const {
    Tensor<T> y(x.shape());
    const T* src = x.data();
    T* dst = y.data();
    const T slope = static_cast<T>(slope_);
    if (kind_ == ActKind::leaky_relu) {
      for (std::size_t i = 0; i < x.size(); ++i) dst[i] = src[i] > T(0) ? src[i] : slope * src[i];
    } else {
      for (std::size_t i = 0; i < x.size(); ++i) dst[i] = T(1) / (T(1) + std::exp(-src[i]));
    }
    return y;
  }

  // Sigmoid backward reads the forward output, leaky ReLU reads the input.
  Tensor<T> backward(const Tensor<T>& x, const Tensor<T>& y, const Tensor<T>& gy) const {
    Tensor<T> gx(x.shape());
    const T slope = static_cast<T>(slope_);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (kind_ == ActKind::leaky_relu) {
        gx.data()[i] = x.data()[i] > T(0) ? gy.data()[i] : slope * gy.data()[i];
      } else {
        const T s = y.data()[i];
        gx.data()[i] = gy.data()[i] * s * (T(1) - s);
      }
    }
    return gx;
  }

  std::vector<Param<T>*> params() { return {}; }
  std::vector<const Param<T>*> params() const { return {}; }

 private:
  ActKind kind_;
  double slope_;
};

template <class T>
class GlobalAvgPool {
 public:
  void init(std::mt19937_64&) {}
  [[nodiscard]] Shape output_shape(const Shape& s) const { return {s.channels, 1, 1}; }

  Tensor<T> forward(const Tensor<T>& x) const {
    Tensor<T> y(x.channels(), 1, 1);
    const std::size_t n = x.shape().plane();
    for (int c = 0; c < x.channels(); ++c) {
      double acc = 0;
      for (std::size_t i = 0; i < n; ++i) acc += x.channel(c)[i];
      y.at(c, 0, 0) = static_cast<T>(acc / static_cast<double>(n));
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& x, const Tensor<T>& gy) const {
    Tensor<T> gx(x.shape());
    const std::size_t n = x.shape().plane();
    for (int c = 0; c < x.channels(); ++c) {
      const T g = gy.at(c, 0, 0) / static_cast<T>(n);
      std::fill(gx.channel(c), gx.channel(c) + n, g);
    }
    return gx;
  }

  std::vector<Param<T>*> params() { return {}; }
  std::vector<const Param<T>*> params() const { return {}; }
};

template <class T>
using Layer = std::variant<Conv2d<T>, ConvTranspose2d<T>, InstanceNorm<T>, Activation<T>, GlobalAvgPool<T>>;

/// Activations recorded by a forward pass; acts[i] is the input of layer i, acts.back() the output.
template <class T>
struct Trace {
  std::vector<Tensor<T>> acts;
  [[nodiscard]] const Tensor<T>& output() const { return acts.back(); }
};

/// Ordered chain of layers with reverse-mode differentiation.
template <class T>
class Sequential {
 public:
  Sequential() = default;

  template <class L>
  void add(L layer) {
    layers_.emplace_back(std::move(layer));
  }

  void init(std::mt19937_64& rng) {
    for (auto& l : layers_) std::visit([&](auto& v) { v.init(rng); }, l);
  }

  [[nodiscard]] Shape output_shape(Shape s) const {
    for (const auto& l : layers_) s = std::visit([&](const auto& v) { return v.output_shape(s); }, l);
    return s;
  }

  [[nodiscard]] Tensor<T> forward(const Tensor<T>& x) const {
    Tensor<T> cur = x;
    for (const auto& l : layers_) cur = std::visit([&](const auto& v) { return v.forward(cur); }, l);
    return cur;
  }

  [[nodiscard]] Trace<T> forward_traced(const Tensor<T>& x) const {
    Trace<T> tr;
    tr.acts.reserve(layers_.size() + 1);
    tr.acts.push_back(x);
    for (const auto& l : layers_) {
      tr.acts.push_back(std::visit([&](const auto& v) { return v.forward(tr.acts.back()); }, l));
    }
    return tr;
  }

  /// Returns the gradient w.r.t. the chain input (empty when input_grad is false).
  Tensor<T> backward(const Trace<T>& tr, Tensor<T> gy, bool param_grads, bool input_grad) {
    for (std::size_t i = layers_.size(); i-- > 0;) {
      const Tensor<T>& x = tr.acts[i];
      const Tensor<T>& y = tr.acts[i + 1];
      const bool need_gx = input_grad || i > 0;
      gy = std::visit(
          [&](auto& v) -> Tensor<T> {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, Activation<T>>) {
              return v.backward(x, y, gy);
            } else if constexpr (std::is_same_v<V, GlobalAvgPool<T>>) {
              return v.backward(x, gy);
            } else {
              return v.backward(x, gy, param_grads, need_gx);
            }
          },
          layers_[i]);
    }
    return gy;
  }

  std::vector<Param<T>*> params() {
    std::vector<Param<T>*> out;
    for (auto& l : layers_) {
      for (auto* p : std::visit([](auto& v) { return v.params(); }, l)) out.push_back(p);
    }
    return out;
  }
  std::vector<const Param<T>*> params() const {
    std::vector<const Param<T>*> out;
    for (const auto& l : layers_) {
      for (const auto* p : std::visit([](const auto& v) { return v.params(); }, l)) out.push_back(p);
    }
    return out;
  }

  [[nodiscard]] std::size_t size() const { return layers_.size(); }

 private:
  std::vector<Layer<T>> layers_;
};

}  // namespace zsr::nn
