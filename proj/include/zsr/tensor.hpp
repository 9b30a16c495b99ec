#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace zsr {

/// Channel-first (C, H, W) shape. Batch size is always one in this project.
struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;

  [[nodiscard]] std::size_t numel() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  [[nodiscard]] std::size_t plane() const {
    return static_cast<std::size_t>(height) * width;
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense CHW grid of T. Owns its storage.
template <class T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0))
      : shape_(shape), data_(shape.numel(), fill) {
    if (shape.channels < 0 || shape.height < 0 || shape.width < 0) {
      throw ShapeError("negative tensor dimension");
    }
  }
  Tensor(int c, int h, int w, T fill = T(0)) : Tensor(Shape{c, h, w}, fill) {}

  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] int channels() const { return shape_.channels; }
  [[nodiscard]] int height() const { return shape_.height; }
  [[nodiscard]] int width() const { return shape_.width; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  [[nodiscard]] T* data() { return data_.data(); }
  [[nodiscard]] const T* data() const { return data_.data(); }
  [[nodiscard]] std::span<T> values() { return data_; }
  [[nodiscard]] std::span<const T> values() const { return data_; }
  [[nodiscard]] std::vector<T>& storage() { return data_; }
  [[nodiscard]] const std::vector<T>& storage() const { return data_; }

  T& at(int c, int y, int x) {
    assert(c >= 0 && c < shape_.channels && y >= 0 && y < shape_.height && x >= 0 && x < shape_.width);
    return data_[(static_cast<std::size_t>(c) * shape_.height + y) * shape_.width + x];
  }
  const T& at(int c, int y, int x) const {
    assert(c >= 0 && c < shape_.channels && y >= 0 && y < shape_.height && x >= 0 && x < shape_.width);
    return data_[(static_cast<std::size_t>(c) * shape_.height + y) * shape_.width + x];
  }

  T* channel(int c) { return data_.data() + static_cast<std::size_t>(c) * shape_.plane(); }
  const T* channel(int c) const { return data_.data() + static_cast<std::size_t>(c) * shape_.plane(); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  Tensor& operator+=(const Tensor& o) {
    require_same_shape(o, "tensor +=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  void require_same_shape(const Tensor& o, const char* what) const {
    if (shape_ != o.shape_) {
      throw ShapeError(std::string(what) + ": shape mismatch " + to_string(shape_) + " vs " +
                       to_string(o.shape_));
    }
  }

  template <class U>
  [[nodiscard]] Tensor<U> cast() const {
    Tensor<U> out(shape_);
    std::transform(data_.begin(), data_.end(), out.data(), [](T v) { return static_cast<U>(v); });
    return out;
  }

  /// Copy of the window [y0, y0+h) x [x0, x0+w) across all channels.
  [[nodiscard]] Tensor crop(int y0, int x0, int h, int w) const {
    if (y0 < 0 || x0 < 0 || h < 0 || w < 0 || y0 + h > shape_.height || x0 + w > shape_.width) {
      throw ShapeError("crop window outside tensor");
    }
    Tensor out(shape_.channels, h, w);
    for (int c = 0; c < shape_.channels; ++c) {
      for (int y = 0; y < h; ++y) {
        const T* src = &at(c, y0 + y, x0);
        std::copy(src, src + w, &out.at(c, y, 0));
      }
    }
    return out;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

inline std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.channels) + "," + std::to_string(s.height) + "," +
         std::to_string(s.width) + ")";
}

/// Reflect-pads bottom/right so height and width become multiples of `factor`.
template <class T>
Tensor<T> reflect_pad_to_multiple(const Tensor<T>& t, int factor) {
  auto round_up = [factor](int v) { return (v + factor - 1) / factor * factor; };
  const int h = round_up(t.height());
  const int w = round_up(t.width());
  if (h == t.height() && w == t.width()) return t;
  if (h - t.height() >= t.height() || w - t.width() >= t.width()) {
    throw ShapeError("image too small to reflect-pad");
  }
  auto reflect = [](int i, int n) { return i < n ? i : 2 * n - 2 - i; };
  Tensor<T> out(t.channels(), h, w);
  for (int c = 0; c < t.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      const int sy = reflect(y, t.height());
      for (int x = 0; x < w; ++x) out.at(c, y, x) = t.at(c, sy, reflect(x, t.width()));
    }
  }
  return out;
}

}  // namespace zsr
