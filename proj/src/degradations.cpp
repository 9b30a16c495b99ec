#include "zsr/degradations.hpp"

#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "zsr/config.hpp"

namespace zsr {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Mirror index without repeating the edge sample: -1 -> 1, n -> n-2.
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

Tensor<float> blur(const Tensor<float>& src, double sigma) {
  const auto k = gaussian_kernel_1d(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int h = src.height();
  const int w = src.width();
  Tensor<float> tmp(src.shape());
  Tensor<float> out(src.shape());
  for (int c = 0; c < src.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0;
        for (int j = -r; j <= r; ++j) acc += k[j + r] * src.at(c, y, reflect_index(x + j, w));
        tmp.at(c, y, x) = static_cast<float>(acc);
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0;
        for (int j = -r; j <= r; ++j) acc += k[j + r] * tmp.at(c, reflect_index(y + j, h), x);
        out.at(c, y, x) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

std::vector<double> parse_args(const std::string& args, const std::string& stage) {
  std::vector<double> out;
  std::istringstream in(args);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    const auto b = tok.find_first_not_of(' ');
    const auto e = tok.find_last_not_of(' ');
    if (b == std::string::npos) throw DegradationError(stage + ": empty argument");
    tok = tok.substr(b, e - b + 1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw DegradationError(stage + ": cannot parse '" + tok + "'");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

void validate(const DegradationSpec& spec) {
  for (const auto& stage : spec.stages) {
    std::visit(Overloaded{
                   [](const ColorCast& s) {
                     for (double g : s.gains) {
                       if (!std::isfinite(g) || g < 0) throw DegradationError("color_cast gains must be finite and ≥ 0");
                     }
                   },
                   [](const GaussianBlur& s) {
                     if (!std::isfinite(s.sigma) || s.sigma < 0) throw DegradationError("gaussian_blur sigma must be ≥ 0");
                   },
                   [](const Haze& s) {
                     if (!(s.transmission > 0 && s.transmission <= 1)) {
                       throw DegradationError("haze transmission must be in (0,1]");
                     }
                     if (!(s.airlight >= 0 && s.airlight <= 1)) throw DegradationError("haze airlight must be in [0,1]");
                   },
                   [](const GaussianNoise& s) {
                     if (!std::isfinite(s.sigma) || s.sigma < 0) throw DegradationError("gaussian_noise sigma must be ≥ 0");
                   },
               },
               stage);
  }
}

DegradationSpec parse_degradation(const std::string& text, std::uint64_t seed) {
  DegradationSpec spec;
  spec.seed = seed;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, '+')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    const auto open = item.find('(');
    if (open == std::string::npos || item.back() != ')') {
      throw DegradationError("degradation stage '" + item + "' must look like name(args)");
    }
    const std::string name = item.substr(0, open);
    const auto args = parse_args(item.substr(open + 1, item.size() - open - 2), name);
    auto need = [&](std::size_t n) {
      if (args.size() != n) throw DegradationError(name + " takes " + std::to_string(n) + " argument(s)");
    };
    if (name == "color_cast") {
      need(3);
      spec.stages.push_back(ColorCast{{args[0], args[1], args[2]}});
    } else if (name == "gaussian_blur") {
      need(1);
      spec.stages.push_back(GaussianBlur{args[0]});
    } else if (name == "haze") {
      need(2);
      spec.stages.push_back(Haze{args[0], args[1]});
    } else if (name == "gaussian_noise") {
      need(1);
      spec.stages.push_back(GaussianNoise{args[0]});
    } else {
      throw DegradationError("unknown degradation '" + name + "'");
    }
  }
  if (spec.stages.empty()) throw DegradationError("empty degradation spec");
  validate(spec);
  return spec;
}

std::string format_degradation(const DegradationSpec& spec) {
  std::string out;
  for (const auto& stage : spec.stages) {
    if (!out.empty()) out += '+';
    out += std::visit(Overloaded{
                          [](const ColorCast& s) {
                            return "color_cast(" + format_double(s.gains[0]) + "," + format_double(s.gains[1]) +
                                   "," + format_double(s.gains[2]) + ")";
                          },
                          [](const GaussianBlur& s) { return "gaussian_blur(" + format_double(s.sigma) + ")"; },
                          [](const Haze& s) {
                            return "haze(" + format_double(s.transmission) + "," + format_double(s.airlight) + ")";
                          },
                          [](const GaussianNoise& s) { return "gaussian_noise(" + format_double(s.sigma) + ")"; },
                      },
                      stage);
  }
  return out;
}

DegradationSpec default_validation_spec() {
  return DegradationSpec{{ColorCast{{0.8, 1.1, 0.8}}, GaussianBlur{1.5}, Haze{0.7, 0.9}}, 0};
}

std::vector<double> gaussian_kernel_1d(double sigma) {
  if (sigma <= 0) return {1.0};
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * r + 1);
  double sum = 0;
  for (int i = -r; i <= r; ++i) sum += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= sum;
  return k;
}

ImageTensor apply_degradation(const ImageTensor& img, const DegradationSpec& spec) {
  validate(spec);
  Tensor<float> cur = img.tensor();
  for (std::size_t idx = 0; idx < spec.stages.size(); ++idx) {
    std::visit(Overloaded{
                   [&](const ColorCast& s) {
                     for (int c = 0; c < 3; ++c) {
                       float* p = cur.channel(c);
                       for (std::size_t i = 0; i < cur.shape().plane(); ++i) {
                         p[i] = std::clamp(static_cast<float>(p[i] * s.gains[c]), 0.0f, 1.0f);
                       }
                     }
                   },
                   [&](const GaussianBlur& s) {
                     if (s.sigma > 0) cur = blur(cur, s.sigma);
                   },
                   [&](const Haze& s) {
                     const double t = s.transmission;
                     const double a = (1.0 - t) * s.airlight;
                     for (float& v : cur.values()) v = static_cast<float>(t * v + a);
                   },
                   [&](const GaussianNoise& s) {
                     if (s.sigma <= 0) return;
                     std::mt19937_64 rng(spec.seed + 0x9e3779b97f4a7c15ull * (idx + 1));
                     std::normal_distribution<double> n(0.0, s.sigma);
                     for (float& v : cur.values()) v = std::clamp(static_cast<float>(v + n(rng)), 0.0f, 1.0f);
                   },
               },
               spec.stages[idx]);
  }
  return ImageTensor::clamped(std::move(cur));
}

ValidationPair make_validation_pair(const ImageTensor& clean, const DegradationSpec& spec, int offset_y,
                                    int offset_x, int crop_height, int crop_width) {
  if (offset_y < 0 || offset_x < 0) throw DegradationError("crop offset must be non-negative");
  const int h = crop_height > 0 ? crop_height : clean.height() - offset_y;
  const int w = crop_width > 0 ? crop_width : clean.width() - offset_x;
  if (h < 1 || w < 1 || offset_y + h > clean.height() || offset_x + w > clean.width()) {
    throw DegradationError("image " + to_string(clean.shape()) + " too small for two " + std::to_string(h) + "x" +
                           std::to_string(w) + " crops at offset (" + std::to_string(offset_y) + "," +
                           std::to_string(offset_x) + ")");
  }
  ImageTensor reference = clean.crop(0, 0, h, w);
  ImageTensor gt = clean.crop(offset_y, offset_x, h, w);
  ImageTensor distorted = apply_degradation(gt, spec);
  return {std::move(reference), std::move(distorted), std::move(gt)};
}

}  // namespace zsr
