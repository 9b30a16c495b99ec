#include <cstdio>
#include <memory>

#include "doctest.h"
#include "zsr/losses.hpp"
#include "zsr/networks.hpp"

using namespace zsr;

namespace {

ImageTensor ramp(int h, int w) {
  Tensor<float> t(3, h, w);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = float((i * 13) % 97) / 96.0f;
  return ImageTensor(t);
}

std::string run_probe(const char* seed) {
  const std::string cmd = std::string(ZSR_PROBE_PATH) + " " + seed;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
  REQUIRE(pipe);
  std::string out;
  char buf[256];
  while (std::fgets(buf, sizeof buf, pipe.get())) out += buf;
  return out;
}

}  // namespace

TEST_CASE("latent shapes for a 64x64 input at default width and depth") {
  const RunConfig cfg;
  const auto nets = build_networks<float>(cfg, {3, 64, 64});
  const ImageTensor img = ramp(64, 64);
  const Encoding c = encode(nets.content_encoder, img);
  const Encoding d = encode(nets.distortion_encoder, img);
  CHECK(c.latent.data.shape() == Shape{64, 16, 16});
  CHECK(d.latent.data.shape() == c.latent.data.shape());
  CHECK(c.latent.role == FeatureRole::content);
  CHECK(d.latent.role == FeatureRole::distortion);
  CHECK(c.intermediates.size() == std::size_t(cfg.depth));
  CHECK(decode(nets.decoder, c.latent + d.latent).shape() == img.shape());
}

TEST_CASE("shape invariance over several valid sizes") {
  RunConfig cfg;
  cfg.base_width = 4;
  const auto nets = build_networks<float>(cfg, {3, 8, 8});
  for (auto [h, w] : {std::pair{8, 8}, std::pair{12, 20}, std::pair{36, 4}}) {
    const ImageTensor img = ramp(h, w);
    const auto c = encode(nets.content_encoder, img);
    CHECK(c.latent.data.shape() == encode(nets.distortion_encoder, img).latent.data.shape());
    CHECK(decode(nets.decoder, c.latent).shape() == img.shape());
  }
}

TEST_CASE("indivisible input and bad hyperparameters are rejected") {
  RunConfig cfg;
  CHECK_THROWS_AS(build_networks<float>(cfg, {3, 63, 63}), ShapeError);
  const auto nets = build_networks<float>(cfg, {3, 64, 64});
  CHECK_THROWS_AS(encode(nets.content_encoder, ramp(63, 64)), ShapeError);
  CHECK_THROWS_AS(decode(nets.decoder, FeatureMap{Tensor<float>(32, 16, 16), FeatureRole::content}), ShapeError);
  CHECK_THROWS_AS(discriminate(nets.discriminator, FeatureMap{Tensor<float>(8, 4, 4), FeatureRole::content}),
                  ShapeError);
  cfg.base_width = 0;
  CHECK_THROWS_AS(build_networks<float>(cfg, {3, 64, 64}), ShapeError);
}

TEST_CASE("same seed gives bit-identical parameters and outputs") {
  RunConfig cfg;
  cfg.base_width = 8;
  const auto a = build_networks<float>(cfg, {3, 16, 16});
  const auto b = build_networks<float>(cfg, {3, 16, 16});
  CHECK(parameter_checksum(a.content_encoder) == parameter_checksum(b.content_encoder));
  CHECK(parameter_checksum(a.restoration_decoder) == parameter_checksum(b.restoration_decoder));
  CHECK(parameter_checksum(a.content_encoder) != parameter_checksum(a.distortion_encoder));
  cfg.seed = 2;
  const auto c = build_networks<float>(cfg, {3, 16, 16});
  CHECK(parameter_checksum(a.content_encoder) != parameter_checksum(c.content_encoder));

  const ImageTensor img = ramp(16, 16);
  const auto la = encode(a.content_encoder, img).latent;
  CHECK(la.data == encode(b.content_encoder, img).latent.data);
  CHECK(decode(a.decoder, la) == decode(b.decoder, la));
}

TEST_CASE("latents are identical across two independent processes") {
  const std::string first = run_probe("5");
  CHECK(first.size() == 2 * 65);
  CHECK(first == run_probe("5"));
  CHECK(first != run_probe("6"));
}

TEST_CASE("zero image gives all-zero intermediates for freshly built encoders") {
  const auto nets = build_networks<float>(RunConfig{}, {3, 32, 32});
  const ImageTensor zero(Tensor<float>(3, 32, 32, 0.0f));
  for (const auto* net : {&nets.content_encoder, &nets.distortion_encoder}) {
    const auto e = encode(*net, zero);
    REQUIRE(e.intermediates.size() == 3);
    for (const auto& m : e.intermediates) CHECK(feature_regularization_loss(std::vector{m.data}) == 0.0);
  }
}

TEST_CASE("discriminator scores are strictly inside (0,1)") {
  const auto nets = build_networks<float>(RunConfig{}, {3, 32, 32});
  const ImageTensor img = ramp(32, 32);
  const FeatureMap f = encode(nets.content_encoder, img).latent;
  const double s = discriminate(nets.discriminator, f);
  CHECK(s > 0.0);
  CHECK(s < 1.0);
  CHECK(s == discriminate(nets.discriminator, f));
  for (double z : {-1e4, -40.0, 0.0, 40.0, 1e4}) {
    CHECK(squash(z) > 0.0);
    CHECK(squash(z) < 1.0);
  }
}

TEST_CASE("restoration decoder matches a fresh decoder in size") {
  RunConfig cfg;
  const auto nets = build_networks<float>(cfg, {3, 64, 64});
  const DecoderNet<float> fresh("decoder", ArchDescriptor::from_config(cfg));
  CHECK(parameter_count(nets.restoration_decoder) == parameter_count(fresh));
  CHECK(parameter_count(nets.restoration_decoder) > 0);
  CHECK(nets.restoration_decoder.descriptor() == fresh.descriptor());
  CHECK(nets.restoration_decoder.id() == "restoration_decoder");
}
