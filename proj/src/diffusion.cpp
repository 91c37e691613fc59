#include "prefdiff/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace prefdiff {

int DiffusionSchedule::check(int t) const {
  if (t < 1 || t > timesteps)
    throw std::out_of_range("schedule: t = " + std::to_string(t) + " outside [1, " +
                            std::to_string(timesteps) + "]");
  return t - 1;
}

DiffusionSchedule linear_schedule(int timesteps, double beta_start, double beta_end) {
  if (timesteps < 2) throw std::invalid_argument("linear_schedule: need at least 2 timesteps");
  if (!(beta_start > 0.0 && beta_start < beta_end && beta_end < 1.0))
    throw std::invalid_argument("linear_schedule: require 0 < beta_start < beta_end < 1");
  DiffusionSchedule s;
  s.timesteps = timesteps;
  s.beta.resize(timesteps);
  s.alpha.resize(timesteps);
  s.alpha_bar.resize(timesteps);
  double prod = 1.0;
  for (int t = 1; t <= timesteps; ++t) {
    const double b =
        beta_start + (static_cast<double>(t - 1) / (timesteps - 1)) * (beta_end - beta_start);
    s.beta[t - 1] = b;
    s.alpha[t - 1] = 1.0 - b;
    prod *= s.alpha[t - 1];
    s.alpha_bar[t - 1] = prod;
  }
  return s;
}

std::vector<double> forward_noise(std::span<const double> x0, int t, std::span<const double> eps,
                                  const DiffusionSchedule& sched) {
  if (x0.size() != eps.size()) throw std::invalid_argument("forward_noise: size mismatch");
  const double abar = sched.alpha_bar_at(t);
  const double a = std::sqrt(abar);
  const double b = std::sqrt(1.0 - abar);
  std::vector<double> out(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) out[i] = a * x0[i] + b * eps[i];
  return out;
}

std::vector<double> reverse_mean(const MlpModel& model, std::span<const double> x_t, int t,
                                 const DiffusionSchedule& sched) {
  const double alpha = sched.alpha_at(t);
  const double abar = sched.alpha_bar_at(t);
  const double coef = (1.0 - alpha) / std::sqrt(1.0 - abar);
  const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
  const std::vector<double> eps_hat = forward(model, x_t, t);
  std::vector<double> mu(x_t.size());
  for (std::size_t i = 0; i < x_t.size(); ++i) mu[i] = inv_sqrt_alpha * (x_t[i] - coef * eps_hat[i]);
  return mu;
}

std::vector<int> canonical_row_order(const Matrix& X, const Matrix& Y, std::span<const int> subset) {
  std::vector<int> order(subset.begin(), subset.end());
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto xa = X.row(a), xb = X.row(b);
    for (int j = 0; j < X.cols; ++j) {
      if (xa[j] != xb[j]) return xa[j] < xb[j];
    }
    const auto ya = Y.row(a), yb = Y.row(b);
    for (int j = 0; j < Y.cols; ++j) {
      if (ya[j] != yb[j]) return ya[j] < yb[j];
    }
    return a < b;
  });
  return order;
}

DenoiserResult train_denoiser(const OfflineDataset& dataset, const DiffusionSchedule& sched,
                              const DenoiserConfig& cfg) {
  const int d = dataset.dim;
  if (dataset.train_idx.empty()) throw std::invalid_argument("train_denoiser: empty training split");

  std::vector<int> widths;
  widths.push_back(d);
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(d);

  RngStream init_rng(cfg.seed, stream_id::kModelInit);
  MlpModel model = make_time_mlp(widths, cfg.time_embed_dim, init_rng);
  AdamState opt = make_adam_state(model);
  const AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay};

  std::vector<int> train_order = canonical_row_order(dataset.X_norm, dataset.Y, dataset.train_idx);
  const std::vector<int> val_order = canonical_row_order(dataset.X_norm, dataset.Y, dataset.val_idx);

  // Fixed validation corruption: one (t, eps) per validation row, drawn once,
  // so per-epoch losses are comparable.
  RngStream val_rng(cfg.seed, stream_id::kValNoise);
  std::vector<int> val_t(val_order.size());
  Matrix val_eps(static_cast<int>(val_order.size()), d);
  for (std::size_t i = 0; i < val_order.size(); ++i) {
    val_t[i] = 1 + static_cast<int>(val_rng.below(sched.timesteps));
    val_rng.fill_normal(val_eps.row(static_cast<int>(i)));
  }

  RngStream shuffle_rng(cfg.seed, stream_id::kEpochShuffle);
  RngStream noise_rng(cfg.seed, stream_id::kTrainNoise);

  DenoiserResult res;
  res.best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<double> eps(d), grad_out(d);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(train_order);
    double epoch_loss = 0.0;
    std::size_t seen = 0;
    ForwardCache cache;
    ParamSet grads = ParamSet::zeros_like(model);
    for (std::size_t start = 0; start < train_order.size(); start += cfg.batch) {
      const std::size_t stop = std::min(train_order.size(), start + cfg.batch);
      const double inv_b = 1.0 / static_cast<double>(stop - start);
      grads.scale(0.0);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        const auto x0 = dataset.X_norm.row(train_order[i]);
        const int t = 1 + static_cast<int>(noise_rng.below(sched.timesteps));
        noise_rng.fill_normal(eps);
        const std::vector<double> x_t = forward_noise(x0, t, eps, sched);
        const std::vector<double> pred = forward(model, x_t, t, &cache);
        double sample_loss = 0.0;
        for (int j = 0; j < d; ++j) {
          const double err = pred[j] - eps[j];
          sample_loss += err * err;
          grad_out[j] = 2.0 * err * inv_b;
        }
        batch_loss += sample_loss;
        accumulate_backward(model, cache, grad_out, grads);
      }
      if (!std::isfinite(batch_loss))
        throw std::runtime_error("train_denoiser: non-finite loss at epoch " +
                                 std::to_string(epoch));
      adam_step(model, grads, opt, adam);
      epoch_loss += batch_loss;
      seen += stop - start;
    }
    epoch_loss /= static_cast<double>(seen);

    double val_loss = 0.0;
    for (std::size_t i = 0; i < val_order.size(); ++i) {
      const auto x0 = dataset.X_norm.row(val_order[i]);
      const auto e = val_eps.row(static_cast<int>(i));
      const std::vector<double> x_t = forward_noise(x0, val_t[i], e, sched);
      const std::vector<double> pred = forward(model, x_t, val_t[i]);
      for (int j = 0; j < d; ++j) {
        const double err = pred[j] - e[j];
        val_loss += err * err;
      }
    }
    val_loss /= std::max<std::size_t>(1, val_order.size());

    res.log.push_back({epoch, epoch_loss, val_loss});
    if (val_loss < res.best_val_loss) {
      res.best_val_loss = val_loss;
      res.best_epoch = epoch;
      res.model = model;
    }
  }
  return res;
}

Matrix unconditional_sample(const MlpModel& model, const DiffusionSchedule& sched,
                            const SampleOptions& opts) {
  const int d = model.input_dim();
  const int T = sched.timesteps;
  Matrix out(opts.count, d);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
#endif
  for (int c = 0; c < opts.count; ++c) {
    RngStream rng(opts.seed, stream_id::kChain + static_cast<std::uint64_t>(c));
    std::vector<double> x(d);
    rng.fill_normal(x);
    std::vector<double> noise(d);
    for (int t = T; t >= 1; --t) {
      std::vector<double> mu = reverse_mean(model, x, t, sched);
      if (t > 1) {
        const double sigma = std::sqrt(sched.beta_at(t));
        rng.fill_normal(noise);
        for (int j = 0; j < d; ++j) x[j] = mu[j] + sigma * noise[j];
      } else {
        x = std::move(mu);
      }
    }
    if (opts.clamp)
      for (double& v : x) v = std::clamp(v, -1.0, 1.0);
    std::copy(x.begin(), x.end(), out.row(c).begin());
  }
  return out;
}

}  // namespace prefdiff
