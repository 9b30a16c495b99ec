#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "zsr/image.hpp"

namespace zsr {

struct ColorCast {
  std::array<double, 3> gains{1.0, 1.0, 1.0};  ///< per-channel multipliers (R, G, B)
};
struct GaussianBlur {
  double sigma = 0.0;
};
/// t * img + (1 - t) * A
struct Haze {
  double transmission = 1.0;
  double airlight = 1.0;
};
struct GaussianNoise {
  double sigma = 0.0;
};

using DegradationStage = std::variant<ColorCast, GaussianBlur, Haze, GaussianNoise>;

/// Ordered composition of degradation stages; a single stage is the plain kind.
struct DegradationSpec {
  std::vector<DegradationStage> stages;
  std::uint64_t seed = 0;  ///< drives the noise generator
};

class DegradationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws DegradationError when a parameter is outside its domain.
void validate(const DegradationSpec& spec);

/// Parses e.g. "color_cast(0.8,1.1,0.8)+gaussian_blur(1.5)+haze(0.7,0.9)+gaussian_noise(0.01)".
DegradationSpec parse_degradation(const std::string& text, std::uint64_t seed = 0);
std::string format_degradation(const DegradationSpec& spec);

/// Cast, blur, haze and noise with the validation defaults used by the synthetic fixture.
DegradationSpec default_validation_spec();

/// Normalized 1-D Gaussian taps of radius ceil(3 sigma); {1} when sigma is 0.
std::vector<double> gaussian_kernel_1d(double sigma);

ImageTensor apply_degradation(const ImageTensor& img, const DegradationSpec& spec);

struct ValidationPair {
  ImageTensor reference;     ///< clean crop at the origin
  ImageTensor distorted;     ///< degraded ground truth
  ImageTensor ground_truth;  ///< clean crop at the offset
};

/// Takes two equally sized crops of `clean`, the second shifted by (offset_y, offset_x),
/// and degrades the shifted one. crop_size 0 uses the largest size that fits.
ValidationPair make_validation_pair(const ImageTensor& clean, const DegradationSpec& spec, int offset_y,
                                    int offset_x, int crop_height = 0, int crop_width = 0);

}  // namespace zsr
