// Prints the SHA-256 of the content and distortion latents of a fixed image
// under freshly built networks. Used by the cross-process determinism test.
#include <cstdio>
#include <cstring>

#include "zsr/checksum.hpp"
#include "zsr/networks.hpp"

int main(int argc, char** argv) {
  zsr::RunConfig cfg;
  cfg.seed = argc > 1 ? std::strtoll(argv[1], nullptr, 10) : 1;
  const auto nets = zsr::build_networks<float>(cfg, {3, 32, 32});
  zsr::Tensor<float> t(3, 32, 32);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = float((i * 37) % 101) / 100.0f;
  const zsr::ImageTensor img(t);
  for (const auto* net : {&nets.content_encoder, &nets.distortion_encoder}) {
    const zsr::Encoding e = zsr::encode(*net, img);
    std::printf("%s\n", zsr::sha256_hex(std::as_bytes(std::span(e.latent.data.storage()))).c_str());
  }
}
