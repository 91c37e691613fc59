#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prefdiff/benchmarks.hpp"
#include "prefdiff/diffusion.hpp"
#include "prefdiff/nn.hpp"
#include "prefdiff/pareto.hpp"

namespace prefdiff {

enum class DiversityCriterion { kCrowding, kHypervolumeImprovement, kNone };

DiversityCriterion parse_criterion(const std::string& name);
std::string to_string(DiversityCriterion c);

// Per-point diversity score used to break ties between equally dominant
// designs. Empty values for kNone.
struct DiversityScores {
  DiversityCriterion criterion = DiversityCriterion::kNone;
  std::vector<double> value;
};

DiversityScores diversity_scores(const OfflineDataset& ds, const FrontAssignment& fa,
                                 DiversityCriterion criterion);

// 1: a preferred, 0: b preferred, nullopt: pair skipped. Lower front wins;
// equal fronts fall back to the diversity score; equal scores (or kNone on
// equal fronts) skip the pair.
std::optional<int> label_pair(int a, int b, const FrontAssignment& fa,
                              const DiversityScores& scores);

// HV(front) - HV(front without the point): the point's exclusive volume.
double hv_improvement(const Matrix& front_objectives, int index, std::span<const double> ref);
std::vector<double> hv_improvements(const Matrix& front_objectives, std::span<const double> ref);

struct ClassifierConfig {
  int hidden_tail = 512;  // last hidden width; first two match the input width
  int time_embed_dim = 128;
  int epochs = 500;
  double lr = 1e-5;
  int batch = 32;
  DiversityCriterion criterion = DiversityCriterion::kCrowding;
  int pairs_per_epoch = 0;  // 0 selects the dataset size
  int eval_pairs = 1024;
  std::uint64_t seed = 0;
};

struct ClassifierEpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;  // strict-dominance pairs, corrupted at t = 1
};

struct ClassifierResult {
  MlpModel model;  // best-validation-loss snapshot
  std::vector<ClassifierEpochLog> log;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  double best_val_accuracy = 0.0;
};

// Trains the pairwise dominance classifier on noised pairs: both designs are
// corrupted with a shared uniformly drawn t and independent noise, labels
// come from the clean objective values. Single-threaded, deterministic per
// seed. Throws when the dataset yields no labeled pairs.
ClassifierResult train_preference(const OfflineDataset& dataset, const DiffusionSchedule& sched,
                                  const ClassifierConfig& cfg);

// sigma(logit) that x dominates r, both inputs at timestep t.
double preference_probability(const MlpModel& model, std::span<const double> x,
                              std::span<const double> r, int t);

enum class GuidanceGradMode { kLogProb, kRawProb };

GuidanceGradMode parse_grad_mode(const std::string& name);
std::string to_string(GuidanceGradMode m);

// Gradient with respect to x (the first input only) of log sigma(logit)
// (kLogProb) or sigma(logit) (kRawProb).
std::vector<double> preference_score_grad(const MlpModel& model, std::span<const double> x,
                                          std::span<const double> r, int t, GuidanceGradMode mode);

}  // namespace prefdiff
