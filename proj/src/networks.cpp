#include "zsr/networks.hpp"

#include "zsr/checksum.hpp"

namespace zsr {

Shape ArchDescriptor::latent_shape(const Shape& input) const {
  check_input(input);
  const int f = downsample_factor();
  return {latent_channels(), input.height / f, input.width / f};
}

void ArchDescriptor::check_input(const Shape& input) const {
  if (input.channels != 3) throw ShapeError("network input must have 3 channels, got " + to_string(input));
  const int f = downsample_factor();
  if (input.height <= 0 || input.width <= 0 || input.height % f != 0 || input.width % f != 0) {
    throw ShapeError("input " + to_string(input) + " not divisible by downsampling factor " + std::to_string(f));
  }
}

std::uint64_t derive_seed(std::int64_t run_seed, std::string_view stream) {
  // FNV-1a over the stream name, folded into the run seed through splitmix64.
  std::uint64_t h = 1469598103934665603ull;
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::uint64_t z = static_cast<std::uint64_t>(run_seed) + 0x9e3779b97f4a7c15ull + h;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Encoding encode(const EncoderNet<float>& net, const ImageTensor& img) {
  auto pass = net.forward(img.tensor());
  const FeatureRole role = net.role() == EncoderRole::content ? FeatureRole::content : FeatureRole::distortion;
  Encoding e{FeatureMap{pass.latent(), role}, {}};
  for (std::size_t i = 0; i < pass.depth(); ++i) e.intermediates.push_back({pass.intermediate(i), role});
  return e;
}

ImageTensor decode(const DecoderNet<float>& net, const FeatureMap& fmap) {
  return ImageTensor::clamped(net.forward(fmap.data));
}

double discriminate(const FeatureDiscriminatorNet<float>& net, const FeatureMap& fmap) {
  return squash(net.logit(fmap.data));
}

namespace {
template <class Net>
std::string checksum_of(const Net& net) {
  std::vector<float> all;
  for (const auto* p : net.params()) all.insert(all.end(), p->value.begin(), p->value.end());
  return tensor_checksum(all);
}
}  // namespace

std::string parameter_checksum(const EncoderNet<float>& net) { return checksum_of(net); }
std::string parameter_checksum(const DecoderNet<float>& net) { return checksum_of(net); }

}  // namespace zsr
