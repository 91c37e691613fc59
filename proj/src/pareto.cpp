#include "prefdiff/pareto.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace prefdiff {

bool dominates(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dominates: objective length mismatch");
  bool strict = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strict = true;
  }
  return strict;
}

std::vector<int> nondominated_sort(const Matrix& objectives) {
  const int n = objectives.rows;
  std::vector<int> rank(n, -1);
  if (n == 0) return rank;

  std::vector<int> dom_count(n, 0);
  std::vector<std::vector<int>> dominated(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (dominates(objectives.row(i), objectives.row(j))) {
        dominated[i].push_back(j);
        ++dom_count[j];
      } else if (dominates(objectives.row(j), objectives.row(i))) {
        dominated[j].push_back(i);
        ++dom_count[i];
      }
    }
  }

  std::vector<int> current;
  for (int i = 0; i < n; ++i)
    if (dom_count[i] == 0) current.push_back(i);

  int front = 0;
  while (!current.empty()) {
    std::vector<int> next;
    for (int i : current) {
      rank[i] = front;
      for (int j : dominated[i]) {
        if (--dom_count[j] == 0) next.push_back(j);
      }
    }
    current = std::move(next);
    ++front;
  }
  return rank;
}

std::vector<double> crowding_distance(const Matrix& front_objectives) {
  const int n = front_objectives.rows;
  const int m = front_objectives.cols;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(n, 0.0);
  if (n <= 2) {
    std::fill(d.begin(), d.end(), inf);
    return d;
  }
  std::vector<int> idx(n);
  for (int obj = 0; obj < m; ++obj) {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return front_objectives(a, obj) < front_objectives(b, obj);
    });
    const double lo = front_objectives(idx.front(), obj);
    const double hi = front_objectives(idx.back(), obj);
    const double range = hi - lo;
    if (range <= 0.0) continue;  // degenerate objective carries no spread information
    d[idx.front()] = inf;
    d[idx.back()] = inf;
    for (int k = 1; k + 1 < n; ++k) {
      d[idx[k]] += (front_objectives(idx[k + 1], obj) - front_objectives(idx[k - 1], obj)) / range;
    }
  }
  return d;
}

FrontAssignment compute_front_assignment(const Matrix& objectives) {
  FrontAssignment fa;
  fa.front = nondominated_sort(objectives);
  fa.crowding.assign(objectives.rows, 0.0);
  fa.front_count = 0;
  for (int f : fa.front) fa.front_count = std::max(fa.front_count, f + 1);

  for (int f = 0; f < fa.front_count; ++f) {
    std::vector<int> members;
    for (int i = 0; i < objectives.rows; ++i)
      if (fa.front[i] == f) members.push_back(i);
    Matrix sub(static_cast<int>(members.size()), objectives.cols);
    for (std::size_t k = 0; k < members.size(); ++k) {
      auto src = objectives.row(members[k]);
      std::copy(src.begin(), src.end(), sub.row(static_cast<int>(k)).begin());
    }
    const std::vector<double> cd = crowding_distance(sub);
    for (std::size_t k = 0; k < members.size(); ++k) fa.crowding[members[k]] = cd[k];
  }
  return fa;
}

std::vector<int> nondominated_subset(const Matrix& objectives) {
  std::vector<int> keep;
  for (int i = 0; i < objectives.rows; ++i) {
    bool dominated_by_any = false;
    for (int j = 0; j < objectives.rows && !dominated_by_any; ++j) {
      if (j != i && dominates(objectives.row(j), objectives.row(i))) dominated_by_any = true;
    }
    if (!dominated_by_any) keep.push_back(i);
  }
  return keep;
}

}  // namespace prefdiff
