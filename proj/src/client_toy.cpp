#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "rephrasecal/client.hpp"

namespace rephrasecal {

namespace {

constexpr std::uint64_t kDrawBlock = 8192;

double logistic_noise(double scale, Rng& rng) {
  const double u = uniform_open01(rng);
  return scale * std::log(u / (1.0 - u));
}

std::uint64_t count_block(const LatentToyModel& model, double scale, std::uint64_t draws,
                          std::uint64_t seed, std::uint64_t block) {
  Rng rng(derive_seed(seed, {block}));
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < draws; ++i) hits += sample_class_a(model, scale, rng) ? 1 : 0;
  return hits;
}

}  // namespace

double LatentToyModel::gap() const {
  if (w.size() != z_mean.size()) throw std::invalid_argument("toy model: w and z_mean differ in size");
  double g = b;
  for (std::size_t i = 0; i < w.size(); ++i) g += w[i] * z_mean[i];
  return g;
}

double LatentToyModel::analytic_p_a() const { return 1.0 / (1.0 + std::exp(-gap())); }

double LatentToyModel::noise_scale(const DecodeConfig& decode, bool rephrased) const {
  if (decode.mode == DecodeMode::kTop1) return rephrased ? s_rephrase : 0.0;
  return rephrased ? std::hypot(s_topk, s_rephrase) : s_topk;
}

LatentToyModel LatentToyModel::with_gap(double gap, double s_rephrase, double s_topk) {
  LatentToyModel m;
  m.z_mean = {gap};
  m.s_rephrase = s_rephrase;
  m.s_topk = s_topk;
  return m;
}

LatentToyModel LatentToyModel::random(int dim, double gap, double s_rephrase, double s_topk,
                                      Rng& rng) {
  if (dim < 1) throw std::invalid_argument("toy model: latent dimension must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  LatentToyModel m;
  m.latent_dim = dim;
  m.w.resize(dim);
  m.z_mean.resize(dim);
  for (int i = 0; i < dim; ++i) m.w[i] = normal(rng);
  for (int i = 0; i < dim; ++i) m.z_mean[i] = normal(rng);
  m.b = 0.0;
  m.b = gap - m.gap();
  m.s_rephrase = s_rephrase;
  m.s_topk = s_topk;
  return m;
}

ToyLogits toy_logits(const LatentToyModel& model, std::span<const double> z) {
  if (static_cast<int>(z.size()) != model.latent_dim || model.w.size() != z.size()) {
    throw std::invalid_argument("toy_logits: latent vector has dimension " + std::to_string(z.size()) +
                                ", model expects " + std::to_string(model.latent_dim));
  }
  double a = model.b;
  for (std::size_t i = 0; i < z.size(); ++i) a += model.w[i] * z[i];
  return {a, 0.0};
}

double softmax_a(const ToyLogits& logits) {
  const double m = std::max(logits.a, logits.b);
  const double ea = std::exp(logits.a - m);
  const double eb = std::exp(logits.b - m);
  return ea / (ea + eb);
}

bool sample_class_a(const LatentToyModel& model, double scale, Rng& rng) {
  const double noise = scale > 0.0 ? logistic_noise(scale, rng) : 0.0;
  return model.gap() + noise > 0.0;
}

std::uint64_t count_class_a(const LatentToyModel& model, double scale, std::uint64_t n,
                            std::uint64_t seed) {
  const std::uint64_t blocks = (n + kDrawBlock - 1) / kDrawBlock;
  std::vector<std::uint64_t> partial(blocks, 0);
#pragma omp parallel for schedule(static)
  for (std::int64_t blk = 0; blk < static_cast<std::int64_t>(blocks); ++blk) {
    const std::uint64_t lo = blk * kDrawBlock;
    partial[blk] = count_block(model, scale, std::min(kDrawBlock, n - lo), seed, blk);
  }
  std::uint64_t total = 0;
  for (auto p : partial) total += p;
  return total;
}

namespace serial {

std::uint64_t count_class_a(const LatentToyModel& model, double scale, std::uint64_t n,
                            std::uint64_t seed) {
  std::uint64_t total = 0;
  for (std::uint64_t lo = 0, blk = 0; lo < n; lo += kDrawBlock, ++blk) {
    total += count_block(model, scale, std::min(kDrawBlock, n - lo), seed, blk);
  }
  return total;
}

}  // namespace serial

ToyBackend::ToyBackend(std::map<std::string, LatentToyModel> models) : models_(std::move(models)) {}

const LatentToyModel& ToyBackend::model(const std::string& question_id) const {
  const auto it = models_.find(question_id);
  if (it == models_.end()) {
    throw BackendError("toy backend: no latent model for question '" + question_id + "'", false);
  }
  return it->second;
}

std::string ToyBackend::complete(const CompletionRequest& req) {
  const std::uint64_t seed = req.seed.value_or(0);
  if (req.purpose == Purpose::kRephrase) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "Toy rephrasing %016llx?",
                  static_cast<unsigned long long>(splitmix64(seed)));
    return buf;
  }
  validate_decode(req.decode);
  const auto& m = model(req.question_id);
  Rng rng(seed);
  const bool is_a = sample_class_a(m, m.noise_scale(req.decode, req.rephrased), rng);
  return std::string("The answer is ") + (is_a ? m.label_a : m.label_b).letter() + ".";
}

}  // namespace rephrasecal
