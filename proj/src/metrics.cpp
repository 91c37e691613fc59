#include "prefdiff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "prefdiff/pareto.hpp"
#include "prefdiff/rng.hpp"

namespace prefdiff {

namespace {

// Rows of `objectives` that contribute volume, i.e. y <= ref componentwise.
std::vector<std::vector<double>> contributing_points(const Matrix& objectives,
                                                     std::span<const double> ref) {
  if (objectives.cols != static_cast<int>(ref.size()))
    throw std::invalid_argument("hypervolume: reference point length mismatch");
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < objectives.rows; ++i) {
    auto row = objectives.row(i);
    bool inside = true;
    for (int j = 0; j < objectives.cols; ++j)
      if (row[j] > ref[j]) {
        inside = false;
        break;
      }
    if (inside) pts.emplace_back(row.begin(), row.end());
  }
  return pts;
}

void filter_nondominated(std::vector<std::vector<double>>& pts) {
  std::vector<std::vector<double>> keep;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated_by_any = false;
    for (std::size_t j = 0; j < pts.size() && !dominated_by_any; ++j) {
      if (j != i && dominates(pts[j], pts[i])) dominated_by_any = true;
    }
    // Exact duplicates would survive dominance filtering in every copy;
    // keep only the first occurrence.
    if (!dominated_by_any) {
      bool dup = false;
      for (const auto& k : keep)
        if (k == pts[i]) {
          dup = true;
          break;
        }
      if (!dup) keep.push_back(pts[i]);
    }
  }
  pts = std::move(keep);
}

double hv2_sweep(std::vector<std::vector<double>> pts, double ref0, double ref1) {
  filter_nondominated(pts);
  if (pts.empty()) return 0.0;
  std::sort(pts.begin(), pts.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });
  double hv = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double next_f1 = i + 1 < pts.size() ? pts[i + 1][0] : ref0;
    hv += (next_f1 - pts[i][0]) * (ref1 - pts[i][1]);
  }
  return hv;
}

// Recursive slicing over the last objective: between consecutive distinct
// values the dominated cross-section is constant.
double hv_recursive(const std::vector<std::vector<double>>& pts, std::span<const double> ref) {
  const int m = static_cast<int>(ref.size());
  if (pts.empty()) return 0.0;
  if (m == 1) {
    double best = ref[0];
    for (const auto& p : pts) best = std::min(best, p[0]);
    return ref[0] - best;
  }
  if (m == 2) return hv2_sweep(pts, ref[0], ref[1]);

  std::vector<double> levels;
  for (const auto& p : pts) levels.push_back(p[m - 1]);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  double hv = 0.0;
  std::vector<double> sub_ref(ref.begin(), ref.end() - 1);
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const double lo = levels[li];
    const double hi = li + 1 < levels.size() ? levels[li + 1] : ref[m - 1];
    if (hi <= lo) continue;
    std::vector<std::vector<double>> slab;
    for (const auto& p : pts) {
      if (p[m - 1] <= lo) slab.emplace_back(p.begin(), p.end() - 1);
    }
    hv += (hi - lo) * hv_recursive(slab, sub_ref);
  }
  return hv;
}

}  // namespace

double hypervolume_exact(const Matrix& objectives, std::span<const double> ref) {
  auto pts = contributing_points(objectives, ref);
  return hv_recursive(pts, ref);
}

McEstimate hypervolume_mc(const Matrix& objectives, std::span<const double> ref,
                          std::int64_t samples, std::uint64_t seed) {
  auto pts = contributing_points(objectives, ref);
  const int m = static_cast<int>(ref.size());
  McEstimate est;
  if (pts.empty() || samples <= 0) return est;
  filter_nondominated(pts);

  std::vector<double> ideal(ref.begin(), ref.end());
  for (const auto& p : pts)
    for (int j = 0; j < m; ++j) ideal[j] = std::min(ideal[j], p[j]);
  double box = 1.0;
  for (int j = 0; j < m; ++j) box *= ref[j] - ideal[j];
  if (box <= 0.0) return est;

  RngStream rng(seed, stream_id::kHypervolumeMc);
  std::vector<double> z(m);
  std::int64_t hits = 0;
  for (std::int64_t s = 0; s < samples; ++s) {
    for (int j = 0; j < m; ++j) z[j] = ideal[j] + rng.uniform() * (ref[j] - ideal[j]);
    for (const auto& p : pts) {
      bool dominated_sample = true;
      for (int j = 0; j < m; ++j)
        if (p[j] > z[j]) {
          dominated_sample = false;
          break;
        }
      if (dominated_sample) {
        ++hits;
        break;
      }
    }
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(samples);
  est.value = box * frac;
  est.std_error = box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples));
  return est;
}

double hypervolume(const Matrix& objectives, std::span<const double> ref, std::uint64_t mc_seed) {
  if (static_cast<int>(ref.size()) <= 3) return hypervolume_exact(objectives, ref);
  return hypervolume_mc(objectives, ref, kDefaultMcSamples, mc_seed).value;
}

std::optional<double> delta_spread(const Matrix& objectives, const Matrix* front_extremes) {
  // The consecutive-distance term runs over the whole solution set; a
  // dominance filter would leave the measure undefined whenever one sample
  // dominates the rest, which guided sets concentrated at a boundary corner
  // actually produce.
  if (objectives.rows < 2) return std::nullopt;
  const int m = objectives.cols;

  std::vector<std::vector<double>> pts;
  pts.reserve(objectives.rows);
  for (int i = 0; i < objectives.rows; ++i) {
    auto row = objectives.row(i);
    pts.emplace_back(row.begin(), row.end());
  }
  std::sort(pts.begin(), pts.end());  // lexicographic; first objective leads

  const std::size_t n = pts.size();
  std::vector<double> dc(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
      const double diff = pts[k + 1][j] - pts[k][j];
      s += diff * diff;
    }
    dc[k] = std::sqrt(s);
  }
  const double mean_dc = std::accumulate(dc.begin(), dc.end(), 0.0) / static_cast<double>(dc.size());

  double extreme_term = 0.0;
  if (front_extremes != nullptr && !front_extremes->empty()) {
    if (front_extremes->cols != m)
      throw std::invalid_argument("delta_spread: extreme point length mismatch");
    for (int e = 0; e < front_extremes->rows; ++e) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : pts) {
        double s = 0.0;
        for (int j = 0; j < m; ++j) {
          const double diff = (*front_extremes)(e, j) - p[j];
          s += diff * diff;
        }
        best = std::min(best, std::sqrt(s));
      }
      extreme_term += best;
    }
  }

  double dev = 0.0;
  for (double d : dc) dev += std::abs(d - mean_dc);
  const double denom = extreme_term + static_cast<double>(dc.size()) * mean_dc;
  if (denom <= 0.0) return 0.0;  // all points coincide
  return (extreme_term + dev) / denom;
}

NormalizedObjectives normalize_objectives(const Matrix& objectives, const ObjectiveStats& stats) {
  const int m = objectives.cols;
  if (static_cast<int>(stats.min.size()) != m || static_cast<int>(stats.max.size()) != m)
    throw std::invalid_argument("normalize_objectives: stats length mismatch");
  NormalizedObjectives out;
  out.values = Matrix(objectives.rows, m);
  out.degenerate.assign(m, false);
  for (int j = 0; j < m; ++j) {
    const double range = stats.max[j] - stats.min[j];
    if (range <= 0.0) {
      out.degenerate[j] = true;
      std::fprintf(stderr, "warning: objective %d has zero range, mapped to 0\n", j);
      for (int i = 0; i < objectives.rows; ++i) out.values(i, j) = 0.0;
      continue;
    }
    for (int i = 0; i < objectives.rows; ++i)
      out.values(i, j) = -1.0 + 2.0 * (objectives(i, j) - stats.min[j]) / range;
  }
  return out;
}

std::vector<double> normalize_objective_row(std::span<const double> y, const ObjectiveStats& stats) {
  std::vector<double> out(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double range = stats.max[j] - stats.min[j];
    out[j] = range > 0.0 ? -1.0 + 2.0 * (y[j] - stats.min[j]) / range : 0.0;
  }
  return out;
}

std::vector<double> hv_reference_point(int objectives) {
  return std::vector<double>(objectives, 1.1);
}

std::vector<MethodRank> average_ranks(const std::vector<MethodTaskMean>& stats, bool higher_is_better) {
  std::map<std::string, std::vector<std::pair<std::string, double>>> by_task;
  for (const auto& s : stats) by_task[s.task].emplace_back(s.method, s.mean);

  std::map<std::string, double> rank_sum;
  std::map<std::string, int> task_count;
  for (auto& [task, entries] : by_task) {
    std::sort(entries.begin(), entries.end(), [&](const auto& a, const auto& b) {
      return higher_is_better ? a.second > b.second : a.second < b.second;
    });
    std::size_t i = 0;
    while (i < entries.size()) {
      std::size_t j = i;
      while (j + 1 < entries.size() && entries[j + 1].second == entries[i].second) ++j;
      const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) {
        rank_sum[entries[k].first] += rank;
        task_count[entries[k].first] += 1;
      }
      i = j + 1;
    }
  }

  std::vector<MethodRank> out;
  for (const auto& [method, sum] : rank_sum)
    out.push_back({method, sum / task_count[method]});
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.average_rank < b.average_rank; });
  return out;
}

}  // namespace prefdiff
