#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "prefdiff/benchmarks.hpp"
#include "prefdiff/diffusion.hpp"
#include "prefdiff/preference.hpp"

namespace prefdiff {

struct GuidanceConfig {
  double weight = 10.0;
  GuidanceGradMode grad_mode = GuidanceGradMode::kLogProb;
  int count = 256;
  std::uint64_t seed = 0;
  bool clamp = true;
  bool parallel = true;
  double max_grad_norm = 0.0;  // 0 disables the optional stability clamp
  int trajectory_stride = 0;   // 0 disables recording
};

// The most dominant dataset design in normalized coordinates: front 0, ties
// broken by larger crowding distance, then lower index.
std::vector<double> select_reference(const OfflineDataset& ds, const FrontAssignment& fa);

struct TrajectoryRecord {
  int t = 0;      // timestep of the recorded state (0 = final)
  int chain = 0;
  std::vector<double> design_raw;  // de-normalized, clamped to the box
  std::vector<double> objectives;  // true objective values of design_raw
};

struct SampleResult {
  Matrix designs;               // one row per surviving chain, normalized
  std::vector<int> chain_ids;   // original chain index per row
  std::vector<int> aborted_chains;
  double max_guidance_shift = 0.0;  // max over steps of ||w beta_t s_p||
  std::vector<TrajectoryRecord> trajectory;
};

// Preference-guided reverse diffusion. Each chain keeps its own reference:
// the dataset best at t = T, then the previous chain state. Chains use the
// same per-chain streams as unconditional_sample, so weight = 0 reproduces
// it exactly. Throws when more than 1% of chains go non-finite.
SampleResult guided_sample(const MlpModel& denoiser, const MlpModel& classifier,
                           const DiffusionSchedule& sched, const OfflineDataset& ds,
                           const GuidanceConfig& cfg, const Problem* problem = nullptr);

}  // namespace prefdiff
