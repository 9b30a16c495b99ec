#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "zsr/image.hpp"

namespace zsr {

inline constexpr double kPsnrCapDb = 99.0;

struct Psnr {
  double db = 0;
  bool capped = false;  ///< true when the images are identical (MSE = 0)
};

/// 10 log10(1 / MSE) for data range 1.
Psnr psnr(const ImageTensor& a, const ImageTensor& b);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Mean SSIM over all fully-contained 11x11 Gaussian windows of the BT.601 luminance.
double ssim(const ImageTensor& a, const ImageTensor& b);

/// BT.601 luma as a single-channel grid.
Tensor<double> luminance(const ImageTensor& img);

struct EvalRow {
  std::string image;
  Psnr psnr;
  double ssim = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  [[nodiscard]] EvalRow aggregate() const;
  /// CSV: image,psnr_db,psnr_capped,ssim then one row per image and a final "aggregate" row.
  [[nodiscard]] std::string to_csv() const;
};

}  // namespace zsr
