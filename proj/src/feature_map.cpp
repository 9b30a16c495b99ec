#include "zsr/feature_map.hpp"

namespace zsr {

std::string_view to_string(FeatureRole role) {
  switch (role) {
    case FeatureRole::content: return "content";
    case FeatureRole::distortion: return "distortion";
    case FeatureRole::combined: return "combined";
  }
  return "unknown";
}

FeatureMap operator+(const FeatureMap& a, const FeatureMap& b) {
  a.data.require_same_shape(b.data, "feature map addition");
  FeatureMap out{a.data, FeatureRole::combined};
  out.data += b.data;
  return out;
}

FeatureMap scaled(const FeatureMap& fmap, float s) {
  FeatureMap out = fmap;
  for (float& v : out.data.values()) v *= s;
  return out;
}

}  // namespace zsr
