#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prefdiff/linalg.hpp"
#include "prefdiff/metrics.hpp"
#include "prefdiff/pareto.hpp"

namespace prefdiff {

struct Problem {
  std::string name;
  int dim = 0;
  int objectives = 0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::function<std::vector<double>(std::span<const double>)> eval;
  // One row per objective: the analytic-front point maximizing that
  // objective. Empty when the front extremes are not cleanly known.
  Matrix front_extremes;
};

// Registry addressable by name: zdt1..zdt4, zdt6, dtlz1..dtlz7.
const Problem* find_problem(const std::string& name);
std::vector<std::string> problem_names();

// Exact analytic objective values; throws a domain error when x is outside
// the box (callers clamp first).
std::vector<double> evaluate(const Problem& problem, std::span<const double> x);

struct OfflineDataset {
  std::string problem_name;  // empty for externally supplied data
  int dim = 0;
  int objectives = 0;
  std::vector<double> lower, upper;  // design-space bounds used for normalization
  Matrix X_raw;                      // N x d, original units
  Matrix X_norm;                     // N x d, mapped to [-1, 1] from the bounds
  Matrix Y;                          // N x m, raw objective values
  ObjectiveStats obj_stats;          // frozen at generation time
  std::vector<int> train_idx, val_idx;
  std::uint64_t seed = 0;
  std::optional<FrontAssignment> fronts;

  int count() const { return X_raw.rows; }
  std::vector<double> normalize_design(std::span<const double> raw) const;
  std::vector<double> denormalize_design(std::span<const double> norm) const;
  const FrontAssignment& front_assignment();  // computes and caches on first use
};

// Uniform designs in the box, exact evaluation, frozen objective stats and a
// deterministic 90/10 split. Rows use per-row substreams, so the parallel
// and serial paths produce identical datasets.
OfflineDataset generate_dataset(const Problem& problem, int count, std::uint64_t seed,
                                bool parallel = true);

// Keeps ceil(fraction * N) points: whole fronts in dominance order, the
// boundary front trimmed by descending crowding distance. Normalization and
// objective stats are carried over unchanged; the split is recomputed.
OfflineDataset prune_top_fraction(const OfflineDataset& ds, double fraction);

// CSV (17 significant digits, header x0..x{d-1},y0..y{m-1}) plus a JSON
// sidecar <csv>.meta.json with bounds, stats, split and problem name.
// annotate appends front,crowding columns.
void save_dataset(const OfflineDataset& ds, const std::string& csv_path, bool annotate = false);
OfflineDataset load_dataset(const std::string& csv_path);

}  // namespace prefdiff
