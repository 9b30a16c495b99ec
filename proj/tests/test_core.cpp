#include <png.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "zsr/checkpoint.hpp"
#include "zsr/config.hpp"
#include "zsr/feature_map.hpp"
#include "zsr/image.hpp"

using namespace zsr;
namespace fs = std::filesystem;

TEST_CASE("default config reproduces the published recipe") {
  const RunConfig cfg;
  CHECK(cfg.lambda_adv == 1.0);
  CHECK(cfg.lambda_reg == 10.0);
  CHECK(cfg.lambda_dcy == 1.0);
  CHECK(cfg.lambda_rcy == 1.0);
  CHECK(cfg.n_alpha == 100);
  CHECK(cfg.alpha_scale == 0.1);
  CHECK(cfg.ddn_iterations == 4000);
  CHECK(cfg.restore_epochs == 150);
  CHECK(cfg.learning_rate == 0.0001);
  CHECK(cfg.adam_beta1 == 0.9);
  CHECK(cfg.adam_beta2 == 0.99);
  CHECK(cfg.patch_size == 512);
  CHECK(validate_config(cfg) == cfg);
}

TEST_CASE("validate_config names the first violated field") {
  RunConfig cfg;
  cfg.lambda_reg = -1;
  try {
    validate_config(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "lambda_reg");
    CHECK(std::string(e.what()) == "lambda_reg must be ≥ 0");
  }
  cfg = RunConfig{};
  cfg.n_alpha = 0;
  CHECK_THROWS_WITH_AS(validate_config(cfg), "n_alpha must be ≥ 1", ConfigError);
  cfg = RunConfig{};
  cfg.adam_beta2 = 1.0;
  CHECK_THROWS_WITH_AS(validate_config(cfg), "adam_beta2 must be in (0,1)", ConfigError);
  cfg = RunConfig{};
  cfg.lambda_adv = -0.5;
  cfg.n_alpha = 0;
  CHECK_THROWS_WITH_AS(validate_config(cfg), "lambda_adv must be ≥ 0", ConfigError);
}

TEST_CASE("config text parsing and canonical serialization") {
  const RunConfig cfg = parse_config(
      "# desk-scale run\n"
      "patch_size = 64   # override\n"
      "learning_rate=2.5e-4\n"
      "\n"
      "reference = data/ref.png\n");
  CHECK(cfg.patch_size == 64);
  CHECK(cfg.learning_rate == 2.5e-4);
  CHECK(cfg.reference == "data/ref.png");
  CHECK(cfg.lambda_reg == 10.0);
  CHECK(parse_config(serialize_config(cfg)) == cfg);
  CHECK(serialize_config(parse_config(serialize_config(cfg))) == serialize_config(cfg));
  CHECK(config_hash(cfg) != config_hash(RunConfig{}));

  CHECK_THROWS_AS(parse_config("no_such_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("patch_size = 6x4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("patch_size\n"), ConfigError);
}

TEST_CASE("image normalization endpoints and 8-bit round trip") {
  const fs::path dir = test::scratch_dir("core_image");
  Tensor<float> t(3, 4, 5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (float& v : t.values()) v = u(rng);
  t.at(0, 0, 0) = 1.0f;
  t.at(1, 0, 0) = 0.0f;
  const ImageTensor img(t);
  save_image(img, dir / "rt.png");
  const ImageTensor back = load_image(dir / "rt.png");
  REQUIRE(back.shape() == img.shape());
  CHECK(back.at(0, 0, 0) == 1.0f);
  CHECK(back.at(1, 0, 0) == 0.0f);
  float worst = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    worst = std::max(worst, std::abs(back.tensor().data()[i] - img.tensor().data()[i]));
  }
  CHECK(worst <= 1.0f / 255.0f);
}

TEST_CASE("save-load round trip error stays within one quantization step over random images") {
  const fs::path dir = test::scratch_dir("core_image_prop");
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> dim(1, 33);
    Tensor<float> t(3, dim(rng), dim(rng));
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (float& v : t.values()) v = u(rng);
    save_image(ImageTensor(t), dir / "p.png");
    const ImageTensor back = load_image(dir / "p.png");
    for (std::size_t i = 0; i < t.size(); ++i) {
      REQUIRE(std::abs(back.tensor().data()[i] - t.data()[i]) <= 1.0f / 255.0f);
    }
  }
}

TEST_CASE("16-bit PNG reads with full precision; grayscale and missing files are rejected") {
  const fs::path dir = test::scratch_dir("core_png16");
  {
    png_image out{};
    out.version = PNG_IMAGE_VERSION;
    out.width = 2;
    out.height = 1;
    out.format = PNG_FORMAT_LINEAR_RGB;
    const std::uint16_t px[6] = {0, 65535, 32768, 1, 2, 3};
    REQUIRE(png_image_write_to_file(&out, (dir / "deep.png").c_str(), 0, px, 0, nullptr));
  }
  const ImageTensor deep = load_image(dir / "deep.png");
  CHECK(deep.at(0, 0, 0) == 0.0f);
  CHECK(deep.at(1, 0, 0) == 1.0f);
  CHECK(deep.at(2, 0, 0) == doctest::Approx(32768.0 / 65535.0));
  CHECK(deep.at(0, 0, 1) == doctest::Approx(1.0 / 65535.0));
  {
    png_image out{};
    out.version = PNG_IMAGE_VERSION;
    out.width = 2;
    out.height = 2;
    out.format = PNG_FORMAT_GRAY;
    const unsigned char px[4] = {0, 50, 100, 255};
    REQUIRE(png_image_write_to_file(&out, (dir / "gray.png").c_str(), 0, px, 0, nullptr));
  }
  CHECK_THROWS_WITH_AS(load_image(dir / "gray.png"), doctest::Contains("3-channel"), ImageError);
  CHECK_THROWS_AS(load_image(dir / "missing.png"), ImageError);
  std::ofstream(dir / "junk.png") << "not a png";
  CHECK_THROWS_AS(load_image(dir / "junk.png"), ImageError);
}

TEST_CASE("image invariants are enforced") {
  CHECK_THROWS_AS(ImageTensor(Tensor<float>(1, 2, 2)), ImageError);
  CHECK_THROWS_AS(ImageTensor(Tensor<float>(3, 2, 2, 1.5f)), ImageError);
  Tensor<float> t(3, 1, 1, 0.5f);
  t.at(0, 0, 0) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(ImageTensor::clamped(t), ImageError);
  CHECK(ImageTensor::clamped(Tensor<float>(3, 1, 1, 2.0f)).at(0, 0, 0) == 1.0f);
}

TEST_CASE("feature maps add only when shapes match") {
  const FeatureMap a{Tensor<float>(4, 2, 2, 1.0f), FeatureRole::content};
  const FeatureMap b{Tensor<float>(4, 2, 2, 0.5f), FeatureRole::distortion};
  const FeatureMap sum = a + b;
  CHECK(sum.role == FeatureRole::combined);
  CHECK(sum.data.at(3, 1, 1) == 1.5f);
  const FeatureMap c{Tensor<float>(4, 2, 3), FeatureRole::distortion};
  CHECK_THROWS_AS(a + c, ShapeError);
}

TEST_CASE("checkpoint save-load-save is byte identical and checksums are verified") {
  const fs::path dir = test::scratch_dir("core_ckpt");
  Checkpoint ckpt;
  ckpt.manifest.config.patch_size = 64;
  ckpt.manifest.config.learning_rate = 3e-4;
  ckpt.manifest.iteration = 1234;
  ckpt.manifest.seed = 77;
  ckpt.manifest.networks.push_back({"decoder", "decoder depth=3 width=8"});
  ckpt.add_tensor("decoder.p0", {2, 3}, {0.1f, -0.2f, 0.3f, 1e-7f, -5.5f, 0.0f});
  ckpt.add_tensor("decoder.p1", {2}, {1.0f, 2.0f});
  save_checkpoint(ckpt, dir / "a");

  const Checkpoint loaded = load_checkpoint(dir / "a");
  CHECK(loaded.manifest == ckpt.manifest);
  CHECK(loaded.blobs == ckpt.blobs);
  save_checkpoint(loaded, dir / "b");
  for (const char* f : {"manifest.txt", "decoder.p0.bin", "decoder.p1.bin"}) {
    CHECK_MESSAGE(test::read_bytes(dir / "a" / f) == test::read_bytes(dir / "b" / f), f);
  }

  {
    std::fstream blob(dir / "b" / "decoder.p1.bin", std::ios::in | std::ios::out | std::ios::binary);
    blob.seekp(0);
    const float tampered = 9.0f;
    blob.write(reinterpret_cast<const char*>(&tampered), sizeof tampered);
  }
  CHECK_THROWS_WITH_AS(load_checkpoint(dir / "b"), doctest::Contains("checksum mismatch"), CheckpointError);
  CHECK_THROWS_AS(ckpt.add_tensor("decoder.p1", {1}, {0.0f}), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint(dir / "nowhere"), CheckpointError);
}
