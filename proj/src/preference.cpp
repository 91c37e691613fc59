#include "prefdiff/preference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "prefdiff/metrics.hpp"

namespace prefdiff {

DiversityCriterion parse_criterion(const std::string& name) {
  if (name == "crowding") return DiversityCriterion::kCrowding;
  if (name == "hypervolume") return DiversityCriterion::kHypervolumeImprovement;
  if (name == "none") return DiversityCriterion::kNone;
  throw std::invalid_argument("unknown diversity criterion '" + name +
                              "' (expected crowding, hypervolume or none)");
}

std::string to_string(DiversityCriterion c) {
  switch (c) {
    case DiversityCriterion::kCrowding: return "crowding";
    case DiversityCriterion::kHypervolumeImprovement: return "hypervolume";
    case DiversityCriterion::kNone: return "none";
  }
  return "?";
}

GuidanceGradMode parse_grad_mode(const std::string& name) {
  if (name == "log") return GuidanceGradMode::kLogProb;
  if (name == "raw") return GuidanceGradMode::kRawProb;
  throw std::invalid_argument("unknown gradient mode '" + name + "' (expected log or raw)");
}

std::string to_string(GuidanceGradMode m) {
  return m == GuidanceGradMode::kLogProb ? "log" : "raw";
}

double hv_improvement(const Matrix& front_objectives, int index, std::span<const double> ref) {
  const double whole = hypervolume_exact(front_objectives, ref);
  Matrix rest(front_objectives.rows - 1, front_objectives.cols);
  int r = 0;
  for (int i = 0; i < front_objectives.rows; ++i) {
    if (i == index) continue;
    auto src = front_objectives.row(i);
    std::copy(src.begin(), src.end(), rest.row(r++).begin());
  }
  return whole - hypervolume_exact(rest, ref);
}

std::vector<double> hv_improvements(const Matrix& front_objectives, std::span<const double> ref) {
  std::vector<double> out(front_objectives.rows);
  for (int i = 0; i < front_objectives.rows; ++i) out[i] = hv_improvement(front_objectives, i, ref);
  return out;
}

DiversityScores diversity_scores(const OfflineDataset& ds, const FrontAssignment& fa,
                                 DiversityCriterion criterion) {
  DiversityScores s;
  s.criterion = criterion;
  if (criterion == DiversityCriterion::kNone) return s;
  if (criterion == DiversityCriterion::kCrowding) {
    s.value = fa.crowding;
    return s;
  }

  // Hypervolume improvement, computed per front on normalized objectives so
  // the reference point is meaningful.
  const NormalizedObjectives norm = normalize_objectives(ds.Y, ds.obj_stats);
  const std::vector<double> ref = hv_reference_point(ds.objectives);
  s.value.assign(ds.count(), 0.0);
  for (int f = 0; f < fa.front_count; ++f) {
    std::vector<int> members;
    for (int i = 0; i < ds.count(); ++i)
      if (fa.front[i] == f) members.push_back(i);
    Matrix sub(static_cast<int>(members.size()), ds.objectives);
    for (std::size_t k = 0; k < members.size(); ++k) {
      auto src = norm.values.row(members[k]);
      std::copy(src.begin(), src.end(), sub.row(static_cast<int>(k)).begin());
    }
    const std::vector<double> scores = hv_improvements(sub, ref);
    for (std::size_t k = 0; k < members.size(); ++k) s.value[members[k]] = scores[k];
  }
  return s;
}

std::optional<int> label_pair(int a, int b, const FrontAssignment& fa,
                              const DiversityScores& scores) {
  if (a == b) return std::nullopt;
  if (fa.front[a] < fa.front[b]) return 1;
  if (fa.front[a] > fa.front[b]) return 0;
  if (scores.criterion == DiversityCriterion::kNone) return std::nullopt;
  const double sa = scores.value[a];
  const double sb = scores.value[b];
  if (sa > sb) return 1;
  if (sa < sb) return 0;
  return std::nullopt;  // includes two +inf crowding sentinels
}

namespace {

// Numerically stable binary cross-entropy from the logit.
double bce_from_logit(double z, int label) {
  const double y = static_cast<double>(label);
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct FixedPair {
  int a = 0, b = 0;
  int label = 0;
  int t = 1;
  std::vector<double> eps_a, eps_b;
};

}  // namespace

ClassifierResult train_preference(const OfflineDataset& dataset, const DiffusionSchedule& sched,
                                  const ClassifierConfig& cfg) {
  const int d = dataset.dim;
  const int in_dim = 2 * d;
  if (dataset.train_idx.empty())
    throw std::invalid_argument("train_preference: empty training split");

  OfflineDataset ds = dataset;  // fronts may need computing
  const FrontAssignment& fa = ds.front_assignment();
  const DiversityScores scores = diversity_scores(ds, fa, cfg.criterion);

  const std::vector<int> train_order = canonical_row_order(ds.X_norm, ds.Y, ds.train_idx);
  const std::vector<int> val_order = canonical_row_order(ds.X_norm, ds.Y, ds.val_idx);
  const int n_train = static_cast<int>(train_order.size());
  const int pairs_per_epoch = cfg.pairs_per_epoch > 0 ? cfg.pairs_per_epoch : ds.count();

  RngStream init_rng(cfg.seed, stream_id::kModelInit);
  MlpModel model = make_time_mlp({in_dim, in_dim, in_dim, cfg.hidden_tail, 1},
                                 cfg.time_embed_dim, init_rng);
  AdamState opt = make_adam_state(model);
  const AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8, 0.0};

  RngStream pair_rng(cfg.seed, stream_id::kPairDraw);
  RngStream noise_rng(cfg.seed, stream_id::kPairNoise);

  auto draw_labeled_pair = [&](RngStream& rng, std::span<const int> order, int* a, int* b,
                               int* label) -> bool {
    const std::size_t cap = 64;
    for (std::size_t attempt = 0; attempt < cap; ++attempt) {
      const int ia = order[rng.below(order.size())];
      const int ib = order[rng.below(order.size())];
      const auto lab = label_pair(ia, ib, fa, scores);
      if (!lab) continue;
      *a = ia;
      *b = ib;
      *label = *lab;
      return true;
    }
    return false;
  };

  {
    // Fail fast on fully degenerate data rather than spinning per epoch.
    RngStream probe(cfg.seed, stream_id::kPairDraw + 1);
    int a, b, label;
    bool any = false;
    for (int k = 0; k < 64 && !any; ++k)
      any = draw_labeled_pair(probe, train_order, &a, &b, &label);
    if (!any)
      throw std::invalid_argument(
          "train_preference: no labeled pairs (degenerate dataset or criterion)");
  }

  // Fixed validation pairs. Loss pairs follow the training distribution;
  // accuracy pairs are restricted to strict dominance and corrupted at t = 1.
  std::vector<FixedPair> val_loss_pairs, val_acc_pairs;
  const std::size_t n_val = val_order.size();
  if (n_val >= 2) {
    RngStream val_rng(cfg.seed, stream_id::kPairVal);
    const std::size_t want = std::min<std::size_t>(cfg.eval_pairs, n_val * 4 + 16);
    std::size_t guard = want * 256;
    while (val_loss_pairs.size() < want && guard-- > 0) {
      int a, b, label;
      if (!draw_labeled_pair(val_rng, val_order, &a, &b, &label)) break;
      FixedPair p;
      p.a = a;
      p.b = b;
      p.label = label;
      p.t = 1 + static_cast<int>(val_rng.below(sched.timesteps));
      p.eps_a.resize(d);
      p.eps_b.resize(d);
      val_rng.fill_normal(p.eps_a);
      val_rng.fill_normal(p.eps_b);
      val_loss_pairs.push_back(std::move(p));
    }
    guard = want * 256;
    while (val_acc_pairs.size() < want && guard-- > 0) {
      const int ia = val_order[val_rng.below(n_val)];
      const int ib = val_order[val_rng.below(n_val)];
      if (ia == ib) continue;
      int label;
      if (dominates(ds.Y.row(ia), ds.Y.row(ib)))
        label = 1;
      else if (dominates(ds.Y.row(ib), ds.Y.row(ia)))
        label = 0;
      else
        continue;
      FixedPair p;
      p.a = ia;
      p.b = ib;
      p.label = label;
      p.t = 1;
      p.eps_a.resize(d);
      p.eps_b.resize(d);
      val_rng.fill_normal(p.eps_a);
      val_rng.fill_normal(p.eps_b);
      val_acc_pairs.push_back(std::move(p));
    }
  }

  auto eval_fixed = [&](const std::vector<FixedPair>& pairs, double* loss, double* acc) {
    double l = 0.0;
    int correct = 0;
    std::vector<double> input(in_dim);
    for (const auto& p : pairs) {
      const std::vector<double> xa = forward_noise(ds.X_norm.row(p.a), p.t, p.eps_a, sched);
      const std::vector<double> xb = forward_noise(ds.X_norm.row(p.b), p.t, p.eps_b, sched);
      std::copy(xa.begin(), xa.end(), input.begin());
      std::copy(xb.begin(), xb.end(), input.begin() + d);
      const double z = forward(model, input, p.t)[0];
      l += bce_from_logit(z, p.label);
      if ((z > 0.0) == (p.label == 1)) ++correct;
    }
    if (!pairs.empty()) {
      *loss = l / static_cast<double>(pairs.size());
      *acc = static_cast<double>(correct) / static_cast<double>(pairs.size());
    } else {
      *loss = 0.0;
      *acc = 0.0;
    }
  };

  ClassifierResult res;
  res.best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<double> input(in_dim);

  ForwardCache cache;
  ParamSet grads = ParamSet::zeros_like(model);
  std::vector<double> eps_a(d), eps_b(d);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    int drawn = 0;
    while (drawn < pairs_per_epoch) {
      const int batch_n = std::min(cfg.batch, pairs_per_epoch - drawn);
      const double inv_b = 1.0 / static_cast<double>(batch_n);
      grads.scale(0.0);
      double batch_loss = 0.0;
      for (int k = 0; k < batch_n; ++k) {
        int a, b, label;
        if (!draw_labeled_pair(pair_rng, train_order, &a, &b, &label))
          throw std::runtime_error("train_preference: ran out of labeled pairs mid-epoch");
        const int t = 1 + static_cast<int>(noise_rng.below(sched.timesteps));
        noise_rng.fill_normal(eps_a);
        noise_rng.fill_normal(eps_b);
        const std::vector<double> xa = forward_noise(ds.X_norm.row(a), t, eps_a, sched);
        const std::vector<double> xb = forward_noise(ds.X_norm.row(b), t, eps_b, sched);
        std::copy(xa.begin(), xa.end(), input.begin());
        std::copy(xb.begin(), xb.end(), input.begin() + d);
        const double z = forward(model, input, t, &cache)[0];
        batch_loss += bce_from_logit(z, label);
        const double dz = (sigmoid(z) - static_cast<double>(label)) * inv_b;
        accumulate_backward(model, cache, std::span<const double>(&dz, 1), grads);
      }
      if (!std::isfinite(batch_loss))
        throw std::runtime_error("train_preference: non-finite loss at epoch " +
                                 std::to_string(epoch));
      adam_step(model, grads, opt, adam);
      epoch_loss += batch_loss;
      drawn += batch_n;
    }
    epoch_loss /= static_cast<double>(pairs_per_epoch);

    double val_loss = 0.0, unused = 0.0, val_acc = 0.0;
    eval_fixed(val_loss_pairs, &val_loss, &unused);
    double acc_loss = 0.0;
    eval_fixed(val_acc_pairs, &acc_loss, &val_acc);

    res.log.push_back({epoch, epoch_loss, val_loss, val_acc});
    if (val_loss < res.best_val_loss) {
      res.best_val_loss = val_loss;
      res.best_epoch = epoch;
      res.best_val_accuracy = val_acc;
      res.model = model;
    }
  }
  return res;
}

double preference_probability(const MlpModel& model, std::span<const double> x,
                              std::span<const double> r, int t) {
  std::vector<double> input(x.size() + r.size());
  std::copy(x.begin(), x.end(), input.begin());
  std::copy(r.begin(), r.end(), input.begin() + x.size());
  return sigmoid(forward(model, input, t)[0]);
}

std::vector<double> preference_score_grad(const MlpModel& model, std::span<const double> x,
                                          std::span<const double> r, int t,
                                          GuidanceGradMode mode) {
  const std::size_t d = x.size();
  std::vector<double> input(d + r.size());
  std::copy(x.begin(), x.end(), input.begin());
  std::copy(r.begin(), r.end(), input.begin() + d);
  ForwardCache cache;
  const double z = forward(model, input, t, &cache)[0];
  const double one = 1.0;
  const std::vector<double> g = input_gradient(model, cache, std::span<const double>(&one, 1));
  const double p = sigmoid(z);
  // d/dx log sigma(z) = (1-p) dz/dx; d/dx sigma(z) = p (1-p) dz/dx.
  const double scale = mode == GuidanceGradMode::kLogProb ? (1.0 - p) : p * (1.0 - p);
  std::vector<double> out(d);
  for (std::size_t j = 0; j < d; ++j) out[j] = scale * g[j];
  return out;
}

}  // namespace prefdiff
