#pragma once

#include <span>
#include <vector>

#include "prefdiff/linalg.hpp"

namespace prefdiff {

// Minimization convention: a dominates b iff a_i <= b_i for all i and
// a_j < b_j for some j. Throws on length mismatch.
bool dominates(std::span<const double> a, std::span<const double> b);

// Fast non-dominated sorting; front 0 is the non-dominated set of Y, front 1
// the non-dominated set of the remainder, and so on.
std::vector<int> nondominated_sort(const Matrix& objectives);

// Crowding distance of each point within one front. Extreme points on any
// objective get +infinity; fronts of size 1 or 2 are all +infinity; an
// objective with zero range contributes nothing.
std::vector<double> crowding_distance(const Matrix& front_objectives);

struct FrontAssignment {
  std::vector<int> front;        // per point, 0 = most dominant
  std::vector<double> crowding;  // per point, within its front
  int front_count = 0;
};

FrontAssignment compute_front_assignment(const Matrix& objectives);

// Indices of the non-dominated subset of the given rows.
std::vector<int> nondominated_subset(const Matrix& objectives);

}  // namespace prefdiff
