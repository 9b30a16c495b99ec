#pragma once

#include <filesystem>
#include <stdexcept>

#include "zsr/tensor.hpp"

namespace zsr {

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An RGB image as a channel-first float grid with every value finite and in [0, 1].
class ImageTensor {
 public:
  ImageTensor() = default;
  /// Validates the invariants; throws ImageError on violation.
  explicit ImageTensor(Tensor<float> data);

  /// Builds an image from arbitrary values by clamping into [0, 1]. NaN is rejected.
  static ImageTensor clamped(Tensor<float> data);
  static ImageTensor filled(int height, int width, float value);

  [[nodiscard]] const Tensor<float>& tensor() const { return data_; }
  [[nodiscard]] const Shape& shape() const { return data_.shape(); }
  [[nodiscard]] int height() const { return data_.height(); }
  [[nodiscard]] int width() const { return data_.width(); }
  [[nodiscard]] float at(int c, int y, int x) const { return data_.at(c, y, x); }

  [[nodiscard]] ImageTensor crop(int y0, int x0, int h, int w) const {
    return ImageTensor(data_.crop(y0, x0, h, w));
  }

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  Tensor<float> data_;
};

/// Reads an 8- or 16-bit RGB PNG, scaling samples into [0, 1].
ImageTensor load_image(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG (values rounded to the nearest of 256 levels).
void save_image(const ImageTensor& img, const std::filesystem::path& path);

}  // namespace zsr
