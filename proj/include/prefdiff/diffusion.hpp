#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "prefdiff/benchmarks.hpp"
#include "prefdiff/linalg.hpp"
#include "prefdiff/nn.hpp"

namespace prefdiff {

struct DiffusionSchedule {
  int timesteps = 0;
  std::vector<double> beta;       // index t-1 holds the value for step t
  std::vector<double> alpha;      // 1 - beta
  std::vector<double> alpha_bar;  // running product of alpha

  double beta_at(int t) const { return beta[check(t)]; }
  double alpha_at(int t) const { return alpha[check(t)]; }
  double alpha_bar_at(int t) const { return alpha_bar[check(t)]; }

 private:
  int check(int t) const;
};

// beta_t = beta_start + (t-1)/(T-1) * (beta_end - beta_start), t = 1..T.
DiffusionSchedule linear_schedule(int timesteps, double beta_start, double beta_end);

// Closed-form forward noising: sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
std::vector<double> forward_noise(std::span<const double> x0, int t, std::span<const double> eps,
                                  const DiffusionSchedule& sched);

// Reverse-step mean: (x_t - (1-alpha_t)/sqrt(1-abar_t) * eps_theta) / sqrt(alpha_t).
std::vector<double> reverse_mean(const MlpModel& model, std::span<const double> x_t, int t,
                                 const DiffusionSchedule& sched);

struct DenoiserConfig {
  std::vector<int> hidden{512, 512};
  int time_embed_dim = 128;
  int epochs = 200;
  double lr = 5e-4;
  int batch = 256;
  double weight_decay = 0.01;  // AdamW
  std::uint64_t seed = 0;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct DenoiserResult {
  MlpModel model;  // best-validation-loss snapshot
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_loss = 0.0;
};

// Noise-prediction MSE training on the normalized designs; t uniform on
// {1..T}, fresh noise per visit. Single-threaded and deterministic per seed.
DenoiserResult train_denoiser(const OfflineDataset& dataset, const DiffusionSchedule& sched,
                              const DenoiserConfig& cfg);

struct SampleOptions {
  int count = 256;
  std::uint64_t seed = 0;
  bool clamp = true;  // clamp finished chains to [-1, 1]^d
  bool parallel = true;
};

// Ancestral sampling: x_T ~ N(0, I), then x_{t-1} ~ N(mu_theta, beta_t I);
// the t = 1 step emits the mean without noise. Chains are independent with
// per-chain streams, so the result does not depend on thread count.
Matrix unconditional_sample(const MlpModel& model, const DiffusionSchedule& sched,
                            const SampleOptions& opts);

// Training rows are visited in an order derived from the row values, not
// the storage order, so shuffles are reproducible under row permutation.
std::vector<int> canonical_row_order(const Matrix& X, const Matrix& Y, std::span<const int> subset);

}  // namespace prefdiff
