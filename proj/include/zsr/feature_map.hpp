#pragma once

#include <cmath>
#include <string_view>

#include "zsr/tensor.hpp"

namespace zsr {

enum class FeatureRole { content, distortion, combined };

std::string_view to_string(FeatureRole role);

/// Latent activation grid (C, H, W). Content and distortion latents share a shape so they add.
struct FeatureMap {
  Tensor<float> data;
  FeatureRole role = FeatureRole::content;

  [[nodiscard]] const Shape& shape() const { return data.shape(); }
  [[nodiscard]] bool all_finite() const {
    for (float v : data.values()) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }
};

/// Elementwise sum; throws ShapeError unless the shapes match exactly.
FeatureMap operator+(const FeatureMap& a, const FeatureMap& b);

/// Returns `fmap` scaled by `s` (role preserved).
FeatureMap scaled(const FeatureMap& fmap, float s);

}  // namespace zsr
