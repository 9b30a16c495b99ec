#include "zsr/image.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <vector>

namespace zsr {

ImageTensor::ImageTensor(Tensor<float> data) : data_(std::move(data)) {
  if (data_.channels() != 3) {
    throw ImageError("image must have 3 channels, got " + std::to_string(data_.channels()));
  }
  for (float v : data_.values()) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      throw ImageError("image values must be finite and within [0,1]");
    }
  }
}

ImageTensor ImageTensor::clamped(Tensor<float> data) {
  for (float& v : data.values()) {
    if (std::isnan(v)) throw ImageError("image contains NaN");
    v = std::clamp(v, 0.0f, 1.0f);
  }
  return ImageTensor(std::move(data));
}

ImageTensor ImageTensor::filled(int height, int width, float value) {
  return ImageTensor(Tensor<float>(3, height, width, value));
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Raw decode result; filled inside the setjmp region, so only trivial state crosses it.
struct RawPng {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<unsigned char> pixels;
};

// Returns an error message, or nullptr on success.
const char* decode_png(std::FILE* fp, RawPng& out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return "png: out of memory";
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return "png: out of memory";
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return "png: corrupt or unreadable file";
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  out.color_type = png_get_color_type(png, info);
  if (out.color_type != PNG_COLOR_TYPE_RGB || (out.bit_depth != 8 && out.bit_depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    return nullptr;  // caller reports the precise reason
  }
  if (out.bit_depth == 16) png_set_swap(png);  // host little-endian samples
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  out.pixels.resize(row_bytes * out.height);
  std::vector<png_bytep> rows(out.height);
  for (png_uint_32 y = 0; y < out.height; ++y) rows[y] = out.pixels.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return nullptr;
}

}  // namespace

ImageTensor load_image(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw ImageError("cannot open image " + path.string());
  unsigned char sig[8] = {};
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw ImageError("not a PNG file: " + path.string());
  }
  std::rewind(fp.get());
  RawPng raw;
  if (const char* err = decode_png(fp.get(), raw)) throw ImageError(std::string(err) + ": " + path.string());
  if (raw.bit_depth != 8 && raw.bit_depth != 16) {
    throw ImageError("unsupported bit depth " + std::to_string(raw.bit_depth) + ": " + path.string());
  }
  if (raw.color_type != PNG_COLOR_TYPE_RGB) {
    throw ImageError("image must be 3-channel RGB: " + path.string());
  }

  const int h = static_cast<int>(raw.height);
  const int w = static_cast<int>(raw.width);
  Tensor<float> t(3, h, w);
  if (raw.bit_depth == 8) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const unsigned char* px = raw.pixels.data() + (static_cast<std::size_t>(y) * w + x) * 3;
        for (int c = 0; c < 3; ++c) t.at(c, y, x) = static_cast<float>(px[c]) / 255.0f;
      }
    }
  } else {
    const auto* samples = reinterpret_cast<const std::uint16_t*>(raw.pixels.data());
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::uint16_t* px = samples + (static_cast<std::size_t>(y) * w + x) * 3;
        for (int c = 0; c < 3; ++c) t.at(c, y, x) = static_cast<float>(px[c]) / 65535.0f;
      }
    }
  }
  return ImageTensor(std::move(t));
}

void save_image(const ImageTensor& img, const std::filesystem::path& path) {
  png_image out{};
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(img.width());
  out.height = static_cast<png_uint_32>(img.height());
  out.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buf(static_cast<std::size_t>(img.width()) * img.height() * 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        buf[(static_cast<std::size_t>(y) * img.width() + x) * 3 + c] =
            static_cast<unsigned char>(std::lround(img.at(c, y, x) * 255.0f));
      }
    }
  }
  if (!png_image_write_to_file(&out, path.c_str(), 0, buf.data(), 0, nullptr)) {
    const std::string msg = out.message;
    png_image_free(&out);
    throw ImageError("cannot write " + path.string() + ": " + msg);
  }
}

}  // namespace zsr
