#include "prefdiff/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace prefdiff {

std::vector<double> select_reference(const OfflineDataset& ds, const FrontAssignment& fa) {
  if (ds.count() == 0) throw std::invalid_argument("select_reference: empty dataset");
  int best = -1;
  for (int i = 0; i < ds.count(); ++i) {
    if (fa.front[i] != 0) continue;
    if (best < 0 || fa.crowding[i] > fa.crowding[best]) best = i;
  }
  auto row = ds.X_norm.row(best);
  return {row.begin(), row.end()};
}

namespace {

struct ChainOutput {
  bool aborted = false;
  std::vector<double> x;
  double max_shift = 0.0;
  std::vector<TrajectoryRecord> trajectory;
};

}  // namespace

SampleResult guided_sample(const MlpModel& denoiser, const MlpModel& classifier,
                           const DiffusionSchedule& sched, const OfflineDataset& ds,
                           const GuidanceConfig& cfg, const Problem* problem) {
  const int d = denoiser.input_dim();
  const int T = sched.timesteps;
  if (cfg.count < 1) throw std::invalid_argument("guided_sample: count must be >= 1");
  if (cfg.weight < 0.0) throw std::invalid_argument("guided_sample: weight must be >= 0");
  if (cfg.trajectory_stride > 0 && problem == nullptr)
    throw std::invalid_argument("guided_sample: trajectory recording needs a problem evaluator");
  // shape errors must surface here, not inside the parallel chain loop
  if (d != ds.dim || denoiser.output_dim() != d)
    throw std::invalid_argument("guided_sample: denoiser shape does not match the dataset");
  if (classifier.input_dim() != 2 * d || classifier.output_dim() != 1)
    throw std::invalid_argument("guided_sample: classifier shape does not match the denoiser");

  OfflineDataset mutable_ds = ds;
  const std::vector<double> reference =
      select_reference(mutable_ds, mutable_ds.front_assignment());

  std::vector<ChainOutput> chains(cfg.count);

  auto record_state = [&](ChainOutput& out, int chain, int t, std::span<const double> x_norm) {
    TrajectoryRecord rec;
    rec.t = t;
    rec.chain = chain;
    std::vector<double> clamped(x_norm.begin(), x_norm.end());
    for (double& v : clamped) v = std::clamp(v, -1.0, 1.0);
    rec.design_raw = ds.denormalize_design(clamped);
    rec.objectives = evaluate(*problem, rec.design_raw);
    out.trajectory.push_back(std::move(rec));
  };

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
#endif
  for (int c = 0; c < cfg.count; ++c) {
    ChainOutput& out = chains[c];
    RngStream rng(cfg.seed, stream_id::kChain + static_cast<std::uint64_t>(c));
    std::vector<double> x(d);
    rng.fill_normal(x);
    std::vector<double> r = reference;
    std::vector<double> noise(d);

    for (int t = T; t >= 1; --t) {
      std::vector<double> mean = reverse_mean(denoiser, x, t, sched);
      if (cfg.weight != 0.0) {
        std::vector<double> score = preference_score_grad(classifier, x, r, t, cfg.grad_mode);
        if (cfg.max_grad_norm > 0.0) {
          const double norm = std::sqrt(squared_norm(score));
          if (norm > cfg.max_grad_norm) {
            const double s = cfg.max_grad_norm / norm;
            for (double& v : score) v *= s;
          }
        }
        const double beta = sched.beta_at(t);
        double shift_sq = 0.0;
        for (int j = 0; j < d; ++j) {
          const double shift = cfg.weight * beta * score[j];
          mean[j] += shift;
          shift_sq += shift * shift;
        }
        out.max_shift = std::max(out.max_shift, std::sqrt(shift_sq));
      }
      std::vector<double> next(d);
      if (t > 1) {
        const double sigma = std::sqrt(sched.beta_at(t));
        rng.fill_normal(noise);
        for (int j = 0; j < d; ++j) next[j] = mean[j] + sigma * noise[j];
      } else {
        next = std::move(mean);
      }
      r = std::move(x);  // next step compares against the pre-draw state
      x = std::move(next);
      if (!all_finite(x)) {
        out.aborted = true;
        break;
      }
      if (cfg.trajectory_stride > 0 && t - 1 > 0 && (t - 1) % cfg.trajectory_stride == 0)
        record_state(out, c, t - 1, x);
    }
    if (out.aborted) continue;
    if (cfg.clamp)
      for (double& v : x) v = std::clamp(v, -1.0, 1.0);
    if (cfg.trajectory_stride > 0) record_state(out, c, 0, x);
    out.x = std::move(x);
  }

  SampleResult res;
  for (int c = 0; c < cfg.count; ++c)
    if (chains[c].aborted) res.aborted_chains.push_back(c);
  if (static_cast<double>(res.aborted_chains.size()) > 0.01 * cfg.count)
    throw std::runtime_error("guided_sample: " + std::to_string(res.aborted_chains.size()) +
                             " of " + std::to_string(cfg.count) + " chains became non-finite");

  const int survivors = cfg.count - static_cast<int>(res.aborted_chains.size());
  res.designs = Matrix(survivors, d);
  int row = 0;
  for (int c = 0; c < cfg.count; ++c) {
    const ChainOutput& out = chains[c];
    if (out.aborted) continue;
    std::copy(out.x.begin(), out.x.end(), res.designs.row(row).begin());
    res.chain_ids.push_back(c);
    ++row;
    res.max_guidance_shift = std::max(res.max_guidance_shift, out.max_shift);
    res.trajectory.insert(res.trajectory.end(), out.trajectory.begin(), out.trajectory.end());
  }
  return res;
}

}  // namespace prefdiff
