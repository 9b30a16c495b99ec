#include "zsr/distortion_transfer.hpp"

#include <fstream>
#include <sstream>

namespace zsr {

DistortionTransfer::DistortionTransfer(const DDNBundle& bundle, const ImageTensor& reference,
                                       const ImageTensor& distorted)
    : bundle_(bundle), height_(reference.height()), width_(reference.width()) {
  const Tensor<float> ref = pad_for_network(reference, bundle.arch());
  const Tensor<float> dist = pad_for_network(distorted, bundle.arch());
  if (ref.shape() != dist.shape()) {
    throw ShapeError("distortion transfer: reference " + to_string(reference.shape()) + " and distorted " +
                     to_string(distorted.shape()) + " give different latent shapes");
  }
  content_ = FeatureMap{bundle.content_encoder.forward(ref).latent(), FeatureRole::content};
  distortion_ = FeatureMap{bundle.distortion_encoder.forward(dist).latent(), FeatureRole::distortion};
}

float DistortionTransfer::weight(int alpha) const {
  if (alpha < 0) throw std::invalid_argument("alpha must be ≥ 0");
  return static_cast<float>(bundle_.config.alpha_scale * alpha);
}

FeatureMap DistortionTransfer::combined_latent(int alpha) const {
  return content_ + scaled(distortion_, weight(alpha));
}

ImageTensor DistortionTransfer::transfer(int alpha) const {
  return crop_to(bundle_.decoder.forward(combined_latent(alpha).data), height_, width_);
}

ImageTensor transfer_distortion(const DDNBundle& bundle, const ImageTensor& reference, const ImageTensor& distorted,
                                int alpha) {
  return DistortionTransfer(bundle, reference, distorted).transfer(alpha);
}

std::vector<DistilledPair> generate_kd_dataset(const DDNBundle& bundle, const ImageTensor& reference,
                                               const ImageTensor& distorted, const RunConfig& cfg,
                                               const std::optional<std::filesystem::path>& out_dir) {
  validate_config(cfg);
  const DistortionTransfer transfer(bundle, reference, distorted);
  std::vector<DistilledPair> pairs;
  pairs.reserve(static_cast<std::size_t>(cfg.n_alpha));
  for (int alpha = 1; alpha <= cfg.n_alpha; ++alpha) pairs.push_back({transfer.transfer(alpha), reference, alpha});

  if (out_dir) {
    std::filesystem::create_directories(*out_dir / "pairs");
    save_image(reference, *out_dir / "clean.png");
    std::ofstream manifest(*out_dir / "manifest.txt", std::ios::binary);
    for (const auto& p : pairs) {
      const std::string name = "pairs/alpha_" + std::to_string(p.alpha) + ".png";
      save_image(p.distorted, *out_dir / name);
      manifest << p.alpha << ' ' << name << '\n';
    }
    if (!manifest) throw std::runtime_error("cannot write dataset manifest in " + out_dir->string());
  }
  return pairs;
}

std::vector<DistilledPair> load_kd_dataset(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.txt");
  if (!manifest) throw std::runtime_error("no dataset manifest in " + dir.string());
  const ImageTensor clean = load_image(dir / "clean.png");
  std::vector<DistilledPair> pairs;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int alpha = 0;
    std::string name;
    if (!(ls >> alpha >> name)) throw std::runtime_error("malformed dataset manifest line '" + line + "'");
    ImageTensor img = load_image(dir / name);
    if (img.shape() != clean.shape()) throw ShapeError("dataset image " + name + " is not shaped like clean.png");
    pairs.push_back({std::move(img), clean, alpha});
  }
  if (pairs.empty()) throw std::runtime_error("dataset in " + dir.string() + " is empty");
  return pairs;
}

}  // namespace zsr
