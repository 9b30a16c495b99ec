#include "zsr/ddn_training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace zsr {
namespace {

std::vector<nn::Param<float>*> generator_params(DDNBundle& b) {
  std::vector<nn::Param<float>*> out;
  for (auto* p : b.content_encoder.params()) out.push_back(p);
  for (auto* p : b.distortion_encoder.params()) out.push_back(p);
  for (auto* p : b.decoder.params()) out.push_back(p);
  return out;
}

nn::AdamSettings adam_settings(const RunConfig& cfg) {
  return {cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, 1e-8};
}

void check_finite(double v, const char* term) {
  if (!std::isfinite(v)) {
    throw DivergenceError(term, std::string("disentanglement training diverged: ") + term + " is not finite");
  }
}

std::string checkpoint_name(std::int64_t it) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "iter_%06lld", static_cast<long long>(it));
  return buf;
}

}  // namespace

DDNBundle make_untrained_bundle(const RunConfig& cfg) {
  const ArchDescriptor arch = ArchDescriptor::from_config(cfg);
  const int f = arch.downsample_factor();
  auto nets = build_networks<float>(cfg, Shape{3, f, f});
  return DDNBundle{std::move(nets.content_encoder), std::move(nets.distortion_encoder), std::move(nets.decoder),
                   std::move(nets.discriminator), cfg, {}, 0};
}

Checkpoint bundle_to_checkpoint(const DDNBundle& b) {
  Checkpoint ckpt;
  ckpt.manifest.config = b.config;
  ckpt.manifest.iteration = b.iteration;
  ckpt.manifest.seed = b.config.seed;
  export_params(b.content_encoder, ckpt);
  export_params(b.distortion_encoder, ckpt);
  export_params(b.decoder, ckpt);
  export_params(b.discriminator, ckpt);
  return ckpt;
}

DDNBundle bundle_from_checkpoint(const Checkpoint& ckpt) {
  DDNBundle b = make_untrained_bundle(ckpt.manifest.config);
  import_params(b.content_encoder, ckpt);
  import_params(b.distortion_encoder, ckpt);
  import_params(b.decoder, ckpt);
  import_params(b.discriminator, ckpt);
  b.iteration = ckpt.manifest.iteration;
  return b;
}

PatchOrigin sample_patch_origin(const Shape& image, int size, std::mt19937_64& rng) {
  if (size < 1 || image.height < size || image.width < size) {
    throw ShapeError("image " + to_string(image) + " smaller than patch size " + std::to_string(size));
  }
  std::uniform_int_distribution<int> ys(0, image.height - size);
  std::uniform_int_distribution<int> xs(0, image.width - size);
  const int y = ys(rng);
  const int x = xs(rng);
  return {y, x};
}

ImageTensor sample_patch(const ImageTensor& img, int size, std::mt19937_64& rng) {
  const auto o = sample_patch_origin(img.shape(), size, rng);
  return img.crop(o.y, o.x, size, size);
}

DDNTrainer::DDNTrainer(DDNBundle& bundle)
    : bundle_(bundle),
      disc_opt_(bundle.discriminator.params(), adam_settings(bundle.config)),
      gen_opt_(generator_params(bundle), adam_settings(bundle.config)) {}

LossReport DDNTrainer::training_step(const ImageTensor& reference_patch, const ImageTensor& distorted_patch) {
  const RunConfig& cfg = bundle_.config;
  auto& ec = bundle_.content_encoder;
  auto& ed = bundle_.distortion_encoder;
  auto& dec = bundle_.decoder;
  auto& disc = bundle_.discriminator;
  const Tensor<float>& ref = reference_patch.tensor();
  const Tensor<float>& dist = distorted_patch.tensor();

  // (a) forward both images through both encoders
  const auto c_ref = ec.forward(ref);
  const auto c_dist = ec.forward(dist);
  const auto d_ref = ed.forward(ref);
  const auto d_dist = ed.forward(dist);

  Tensor<float> z_dist = c_dist.latent();
  z_dist += d_dist.latent();
  Tensor<float> z_ref = c_ref.latent();
  z_ref += d_ref.latent();
  const auto rec_dist = dec.forward_traced(z_dist);
  const auto rec_ref = dec.forward_traced(z_ref);

  LossReport r;
  // (b) losses on the current networks
  std::vector<Tensor<float>> ref_intermediates;
  for (std::size_t i = 0; i < d_ref.depth(); ++i) ref_intermediates.push_back(d_ref.intermediate(i));
  auto [reg, reg_grads] = feature_regularization_loss_grad(ref_intermediates);
  auto dcy = cyclic_loss_grad(rec_dist.output(), dist);
  auto rcy = cyclic_loss_grad(rec_ref.output(), ref);
  r.reg = reg;
  r.d_cy = dcy.value;
  r.r_cy = rcy.value;
  check_finite(r.reg, "reg");
  check_finite(r.d_cy, "d_cy");
  check_finite(r.r_cy, "r_cy");

  // (c) discriminator update: content features of the reference are real, of the distorted image fake
  disc_opt_.zero_grad();
  {
    const auto tr_real = disc.forward_traced(c_ref.latent());
    const auto tr_fake = disc.forward_traced(c_dist.latent());
    const auto terms = adversarial_terms(tr_real.output().at(0, 0, 0), tr_fake.output().at(0, 0, 0));
    r.adv_d = terms.discriminator_loss;
    check_finite(r.adv_d, "adv_d");
    disc.backward(tr_real, terms.d_disc_d_real, true);
    disc.backward(tr_fake, terms.d_disc_d_fake, true);
  }
  disc_opt_.step();

  // (d) generator update on the weighted total, adversarial term against the updated discriminator
  gen_opt_.zero_grad();
  auto adv = generator_loss_grad(c_dist.latent(), disc);
  r.adv_g = adv.value;
  check_finite(r.adv_g, "adv_g");
  r.total = total_loss(r, cfg);
  check_finite(r.total, "total");

  const float l_adv = static_cast<float>(cfg.lambda_adv);
  const float l_reg = static_cast<float>(cfg.lambda_reg);
  const float l_dcy = static_cast<float>(cfg.lambda_dcy);
  const float l_rcy = static_cast<float>(cfg.lambda_rcy);
  for (float& v : dcy.grad.values()) v *= l_dcy;
  for (float& v : rcy.grad.values()) v *= l_rcy;
  for (auto& g : reg_grads) {
    for (float& v : g.values()) v *= l_reg;
  }
  for (float& v : adv.grad.values()) v *= l_adv;

  const Tensor<float> g_z_dist = dec.backward(rec_dist, dcy.grad, true, true);
  const Tensor<float> g_z_ref = dec.backward(rec_ref, rcy.grad, true, true);

  Tensor<float> g_c_dist = g_z_dist;
  g_c_dist += adv.grad;
  ec.backward(c_dist, g_c_dist, {}, true, false);
  ec.backward(c_ref, g_z_ref, {}, true, false);
  ed.backward(d_dist, g_z_dist, {}, true, false);
  ed.backward(d_ref, g_z_ref, reg_grads, true, false);
  gen_opt_.step();

  ++bundle_.iteration;
  bundle_.final_report = r;
  return r;
}

DDNBundle train_ddn(const ImageTensor& reference, const ImageTensor& distorted, const RunConfig& cfg,
                    const DDNTrainOptions& options) {
  validate_config(cfg);
  DDNBundle bundle = make_untrained_bundle(cfg);
  const ArchDescriptor& arch = bundle.arch();
  arch.check_input(Shape{3, cfg.patch_size, cfg.patch_size});
  for (const auto* img : {&reference, &distorted}) {
    if (img->height() < cfg.patch_size || img->width() < cfg.patch_size) {
      throw ShapeError("image " + to_string(img->shape()) + " smaller than patch size " +
                       std::to_string(cfg.patch_size));
    }
  }

  std::ofstream log;
  std::filesystem::path ddn_dir;
  if (options.output_dir) {
    ddn_dir = *options.output_dir / "ddn";
    std::filesystem::create_directories(ddn_dir);
    log.open(*options.output_dir / "ddn_loss.csv", std::ios::binary);
    log << "iteration,adv_d,adv_g,reg,d_cy,r_cy,total\n";
  }

  std::mt19937_64 rng(derive_seed(cfg.seed, "ddn_patches"));
  DDNTrainer trainer(bundle);
  for (std::int64_t it = 1; it <= cfg.ddn_iterations; ++it) {
    const ImageTensor ref_patch = sample_patch(reference, cfg.patch_size, rng);
    const ImageTensor dist_patch = sample_patch(distorted, cfg.patch_size, rng);
    const LossReport r = trainer.training_step(ref_patch, dist_patch);
    if (log.is_open()) {
      log << it << ',' << format_double(r.adv_d) << ',' << format_double(r.adv_g) << ',' << format_double(r.reg)
          << ',' << format_double(r.d_cy) << ',' << format_double(r.r_cy) << ',' << format_double(r.total) << '\n';
    }
    if (options.on_iteration) options.on_iteration(it, r);
    if (options.output_dir && it % cfg.checkpoint_every == 0 && it != cfg.ddn_iterations) {
      save_checkpoint(bundle_to_checkpoint(bundle), ddn_dir / checkpoint_name(it));
    }
  }
  if (options.output_dir) save_checkpoint(bundle_to_checkpoint(bundle), ddn_dir / "final");
  return bundle;
}

Tensor<float> pad_for_network(const ImageTensor& img, const ArchDescriptor& arch) {
  return reflect_pad_to_multiple(img.tensor(), arch.downsample_factor());
}

ImageTensor crop_to(const Tensor<float>& out, int height, int width) {
  return ImageTensor::clamped(out.height() == height && out.width() == width ? out : out.crop(0, 0, height, width));
}

ImageTensor cyclic_reconstruction(const DDNBundle& b, const ImageTensor& img) {
  const Tensor<float> x = pad_for_network(img, b.arch());
  Tensor<float> z = b.content_encoder.forward(x).latent();
  z += b.distortion_encoder.forward(x).latent();
  return crop_to(b.decoder.forward(z), img.height(), img.width());
}

double distortion_response(const DDNBundle& b, const ImageTensor& img) {
  const auto pass = b.distortion_encoder.forward(pad_for_network(img, b.arch()));
  std::vector<Tensor<float>> maps;
  for (std::size_t i = 0; i < pass.depth(); ++i) maps.push_back(pass.intermediate(i));
  return feature_regularization_loss(maps);
}

double distortion_response_ratio(const DDNBundle& b, const ImageTensor& reference, const ImageTensor& distorted) {
  const double den = distortion_response(b, distorted);
  const double num = distortion_response(b, reference);
  if (den == 0.0) return num == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace zsr
