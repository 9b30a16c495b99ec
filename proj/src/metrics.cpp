#include "zsr/metrics.hpp"

#include <cmath>
#include <sstream>

#include "zsr/config.hpp"

namespace zsr {

Psnr psnr(const ImageTensor& a, const ImageTensor& b) {
  a.tensor().require_same_shape(b.tensor(), "psnr");
  double acc = 0;
  const auto& x = a.tensor();
  const auto& y = b.tensor();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = double(x.data()[i]) - double(y.data()[i]);
    acc += d * d;
  }
  const double mse = acc / double(x.size());
  if (mse == 0.0) return {kPsnrCapDb, true};
  return {std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / mse)), false};
}

Tensor<double> luminance(const ImageTensor& img) {
  Tensor<double> y(1, img.height(), img.width());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      y.at(0, r, c) = 0.299 * img.at(0, r, c) + 0.587 * img.at(1, r, c) + 0.114 * img.at(2, r, c);
    }
  }
  return y;
}

namespace {

// Valid-region separable Gaussian filtering.
Tensor<double> filter_valid(const Tensor<double>& src, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int h = src.height() - n + 1;
  const int w = src.width() - n + 1;
  Tensor<double> tmp(1, src.height(), w);
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int j = 0; j < n; ++j) acc += k[j] * src.at(0, y, x + j);
      tmp.at(0, y, x) = acc;
    }
  }
  Tensor<double> out(1, h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int j = 0; j < n; ++j) acc += k[j] * tmp.at(0, y + j, x);
      out.at(0, y, x) = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const ImageTensor& a, const ImageTensor& b) {
  a.tensor().require_same_shape(b.tensor(), "ssim");
  if (a.height() < kSsimWindow || a.width() < kSsimWindow) {
    throw ShapeError("ssim: image " + to_string(a.shape()) + " smaller than the 11x11 window");
  }
  std::vector<double> k(kSsimWindow);
  double sum = 0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    sum += k[i] = std::exp(-0.5 * d * d / (kSsimSigma * kSsimSigma));
  }
  for (double& v : k) v /= sum;

  const Tensor<double> x = luminance(a);
  const Tensor<double> y = luminance(b);
  Tensor<double> xx(x.shape()), yy(x.shape()), xy(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx.data()[i] = x.data()[i] * x.data()[i];
    yy.data()[i] = y.data()[i] * y.data()[i];
    xy.data()[i] = x.data()[i] * y.data()[i];
  }
  const auto mx = filter_valid(x, k);
  const auto my = filter_valid(y, k);
  const auto sxx = filter_valid(xx, k);
  const auto syy = filter_valid(yy, k);
  const auto sxy = filter_valid(xy, k);

  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  double acc = 0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double ux = mx.data()[i];
    const double uy = my.data()[i];
    const double vx = sxx.data()[i] - ux * ux;
    const double vy = syy.data()[i] - uy * uy;
    const double cxy = sxy.data()[i] - ux * uy;
    acc += ((2 * ux * uy + c1) * (2 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
  }
  return acc / double(mx.size());
}

EvalRow EvalReport::aggregate() const {
  EvalRow agg{"aggregate", {}, 0};
  if (rows.empty()) return agg;
  bool all_capped = true;
  for (const auto& r : rows) {
    agg.psnr.db += r.psnr.db;
    agg.ssim += r.ssim;
    all_capped = all_capped && r.psnr.capped;
  }
  agg.psnr.db /= double(rows.size());
  agg.psnr.capped = all_capped;
  agg.ssim /= double(rows.size());
  return agg;
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "image,psnr_db,psnr_capped,ssim\n";
  auto emit = [&](const EvalRow& r) {
    out << r.image << ',' << format_double(r.psnr.db) << ',' << (r.psnr.capped ? 1 : 0) << ','
        << format_double(r.ssim) << '\n';
  };
  for (const auto& r : rows) emit(r);
  emit(aggregate());
  return out.str();
}

}  // namespace zsr
