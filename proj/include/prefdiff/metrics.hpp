#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prefdiff/linalg.hpp"

namespace prefdiff {

// Hypervolume dominated by a point set with respect to a reference point
// (minimization). Exact for m <= 3, Monte Carlo beyond (deterministic for a
// given mc_seed).
double hypervolume(const Matrix& objectives, std::span<const double> ref, std::uint64_t mc_seed = 0);

// Exact computation for any m: sweep for m = 2, recursive slicing above.
// Exposed separately so tests can exercise it directly.
double hypervolume_exact(const Matrix& objectives, std::span<const double> ref);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

McEstimate hypervolume_mc(const Matrix& objectives, std::span<const double> ref,
                          std::int64_t samples, std::uint64_t seed);

inline constexpr std::int64_t kDefaultMcSamples = 2'000'000;

// Delta-spread of a solution set: deviation of consecutive-point distances
// from their mean (points sorted by the first objective), plus the distance
// of the set to the true front extremes when those are known. front_extremes
// holds one row per objective. Returns nullopt for sets smaller than two.
std::optional<double> delta_spread(const Matrix& objectives, const Matrix* front_extremes = nullptr);

struct ObjectiveStats {
  std::vector<double> min;
  std::vector<double> max;
};

// Per-objective affine map onto [-1, 1] using frozen dataset stats; values
// outside the recorded range extrapolate linearly. A degenerate objective
// (max == min) maps to the constant 0 and sets the warning flag.
struct NormalizedObjectives {
  Matrix values;
  std::vector<bool> degenerate;
};

NormalizedObjectives normalize_objectives(const Matrix& objectives, const ObjectiveStats& stats);
std::vector<double> normalize_objective_row(std::span<const double> y, const ObjectiveStats& stats);

// Reference point for hypervolume in normalized objective space.
std::vector<double> hv_reference_point(int objectives);

// One (task, method) aggregate used for ranking.
struct MethodTaskMean {
  std::string task;
  std::string method;
  double mean = 0.0;
};

struct MethodRank {
  std::string method;
  double average_rank = 0.0;
};

// Fractional ranks per task (1 = best; ties share the average of their
// positions), averaged across tasks. higher_is_better selects the sort
// direction (true for hypervolume, false for delta-spread).
std::vector<MethodRank> average_ranks(const std::vector<MethodTaskMean>& stats, bool higher_is_better);

}  // namespace prefdiff
