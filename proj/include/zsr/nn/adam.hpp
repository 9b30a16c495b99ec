#pragma once

#include <cmath>
#include <vector>

#include "zsr/nn/layers.hpp"

namespace zsr::nn {

struct AdamSettings {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
};

/// Adam with bias correction. Holds first/second moments for a fixed parameter list.
template <class T>
class Adam {
 public:
  Adam(std::vector<Param<T>*> params, AdamSettings s) : params_(std::move(params)), s_(s) {
    for (auto* p : params_) {
      m_.emplace_back(p->value.size(), 0.0);
      v_.emplace_back(p->value.size(), 0.0);
    }
  }

  void zero_grad() {
    for (auto* p : params_) p->zero_grad();
  }

  void step() {
    ++t_;
    const double c1 = 1.0 - std::pow(s_.beta1, double(t_));
    const double c2 = 1.0 - std::pow(s_.beta2, double(t_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto& p = *params_[k];
      auto& m = m_[k];
      auto& v = v_[k];
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double g = p.grad[i];
        m[i] = s_.beta1 * m[i] + (1.0 - s_.beta1) * g;
        v[i] = s_.beta2 * v[i] + (1.0 - s_.beta2) * g * g;
        const double update = s_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + s_.eps);
        p.value[i] = static_cast<T>(p.value[i] - update);
      }
    }
  }

  [[nodiscard]] long steps() const { return t_; }
  [[nodiscard]] const AdamSettings& settings() const { return s_; }

 private:
  std::vector<Param<T>*> params_;
  AdamSettings s_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long t_ = 0;
};

}  // namespace zsr::nn
