#include <fstream>

#include "doctest.h"
#include "test_util.hpp"
#include "zsr/degradations.hpp"
#include "zsr/kd_restoration.hpp"
#include "zsr/metrics.hpp"

using namespace zsr;
namespace fs = std::filesystem;

namespace {

struct Setup {
  RunConfig cfg;
  ValidationPair pair;
  DDNBundle bundle;
  std::vector<DistilledPair> data;
};

Setup make_setup(int epochs) {
  RunConfig cfg;
  cfg.base_width = 4;
  cfg.patch_size = 16;
  cfg.restore_patch_size = 16;
  cfg.ddn_iterations = 3;
  cfg.n_alpha = 3;
  cfg.restore_epochs = epochs;
  cfg.learning_rate = 2e-3;
  const ImageTensor clean = load_image(test::fixture("aerial_256.png")).crop(8, 8, 36, 36);
  auto pair = make_validation_pair(clean, default_validation_spec(), 4, 4);
  DDNBundle b = train_ddn(pair.reference, pair.distorted, cfg);
  auto data = generate_kd_dataset(b, pair.reference, pair.distorted, cfg);
  return {cfg, std::move(pair), std::move(b), std::move(data)};
}

}  // namespace

TEST_CASE("frozen encoder keeps the content encoder's parameters bit for bit") {
  const Setup s = make_setup(4);
  const std::string before = parameter_checksum(s.bundle.content_encoder);
  std::vector<std::string> seen;
  RestoreTrainOptions opts;
  const fs::path dir = test::scratch_dir("kd_frozen");
  opts.loss_log = dir / "restore_loss.csv";
  const auto trained = train_restoration(s.bundle, s.data, s.cfg, opts);
  CHECK(trained.net.encoder_frozen);
  CHECK(parameter_checksum(trained.net.encoder) == before);
  CHECK(parameter_checksum(s.bundle.content_encoder) == before);
  CHECK(trained.epoch_mse.size() == 4);

  std::ifstream log(dir / "restore_loss.csv");
  std::string line;
  std::getline(log, line);
  CHECK(line == "epoch,mean_mse");
  int rows = 0;
  while (std::getline(log, line)) ++rows;
  CHECK(rows == 4);

  const RestorationNet reloaded = restoration_from_checkpoint(restoration_to_checkpoint(trained.net, s.cfg, 4));
  CHECK(parameter_checksum(reloaded.encoder) == before);
  CHECK(restore(reloaded, s.pair.distorted) == restore(trained.net, s.pair.distorted));
}

TEST_CASE("restoration decoder is fresh, not the disentanglement decoder") {
  const Setup s = make_setup(0);
  const auto trained = train_restoration(s.bundle, s.data, s.cfg);
  CHECK(parameter_checksum(trained.net.decoder) != parameter_checksum(s.bundle.decoder));
  CHECK(trained.epoch_mse.empty());
}

TEST_CASE("scratch mode trains its own encoder") {
  const Setup s = make_setup(2);
  RestoreTrainOptions opts;
  opts.mode = EncoderMode::scratch;
  const auto trained = train_restoration(s.bundle, s.data, s.cfg, opts);
  CHECK_FALSE(trained.net.encoder_frozen);
  CHECK(parameter_checksum(trained.net.encoder) != parameter_checksum(s.bundle.content_encoder));
}

TEST_CASE("training loss falls over epochs") {
  const Setup s = make_setup(40);
  const auto trained = train_restoration(s.bundle, s.data, s.cfg);
  REQUIRE(trained.epoch_mse.size() == 40);
  CHECK(trained.epoch_mse.back() < trained.epoch_mse.front());
}

TEST_CASE("empty dataset is an error") {
  const Setup s = make_setup(1);
  CHECK_THROWS_AS(train_restoration(s.bundle, {}, s.cfg), RestorationError);
}

TEST_CASE("restore preserves shape through the padding path") {
  const Setup s = make_setup(1);
  const auto trained = train_restoration(s.bundle, s.data, s.cfg);
  for (auto [h, w] : {std::pair{780, 1280}, std::pair{33, 17}, std::pair{4, 4}}) {
    const ImageTensor x(Tensor<float>(3, h, w, 0.25f));
    const ImageTensor y = restore(trained.net, x);
    CHECK(y.shape() == x.shape());
    CHECK(restore(trained.net, y).shape() == x.shape());
  }
}

TEST_CASE("epochs_to_reach") {
  CHECK(epochs_to_reach({0.5, 0.3, 0.2, 0.1}, 0.2) == 3);
  CHECK(epochs_to_reach({0.5, 0.3}, 0.6) == 1);
  CHECK(epochs_to_reach({0.5, 0.3}, 0.1) == 0);
  CHECK(epochs_to_reach({}, 0.1) == 0);
}
