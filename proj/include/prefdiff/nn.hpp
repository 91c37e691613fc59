#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "prefdiff/linalg.hpp"
#include "prefdiff/rng.hpp"

namespace prefdiff {

inline constexpr double kLayerNormEps = 1e-5;

// One dense layer. Hidden layers of the networks built by make_time_mlp use
// ReLU followed by layer normalization; the output layer is affine only.
struct Layer {
  Matrix weight;             // out x in
  std::vector<double> bias;  // out
  bool relu = false;
  bool norm = false;
  std::vector<double> gain;   // layer-norm affine, size out when norm is set
  std::vector<double> shift;  // likewise
};

struct MlpModel {
  std::vector<Layer> layers;
  Matrix time_proj;  // first-hidden-width x time_dim; empty when no hidden layer
  int time_dim = 0;

  int input_dim() const { return layers.empty() ? 0 : layers.front().weight.cols; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().weight.rows; }
  std::size_t param_count() const;
};

// Sinusoidal embedding: component 2k = sin(t / 10000^(2k/dim)),
// component 2k+1 = cos of the same argument. dim must be even.
void time_embedding(double t, int dim, std::span<double> out);
std::vector<double> time_embedding(double t, int dim);

// Fully connected net with the given widths (input, hidden..., output).
// Hidden layers get ReLU + layer norm; weights are He-uniform, biases zero,
// layer-norm gain 1 / shift 0. The time embedding is injected through a
// linear projection added to the first hidden pre-activation.
MlpModel make_time_mlp(const std::vector<int>& widths, int time_dim, RngStream& rng);

struct LayerCache {
  std::vector<double> input;    // activation entering the layer
  std::vector<double> pre;      // affine output (+ time projection on layer 0)
  std::vector<double> relu_out; // after activation, before norm
  std::vector<double> xhat;     // normalized, before gain/shift
  double inv_std = 0.0;
};

struct ForwardCache {
  std::vector<LayerCache> layer;
  std::vector<double> time_emb;
};

// Evaluates the network at timestep t (t >= 1). When cache is non-null it is
// filled with everything backward() needs.
std::vector<double> forward(const MlpModel& model, std::span<const double> input, int t,
                            ForwardCache* cache = nullptr);

// Parameter-shaped container, reused for gradients and optimizer moments.
struct ParamSet {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;
  std::vector<std::vector<double>> gain;
  std::vector<std::vector<double>> shift;
  Matrix time_proj;

  static ParamSet zeros_like(const MlpModel& model);
  void add(const ParamSet& other);
  void scale(double s);
};

struct Gradients {
  ParamSet params;
  std::vector<double> input;  // gradient with respect to the network input
};

// Exact reverse-mode differentiation of forward(). The cache must come from
// a matching forward call on the same model.
Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   std::span<const double> output_grad);

// Allocation-free variant for training loops: adds this sample's parameter
// gradients into `grads`; when input_grad is non-null it receives the input
// gradient (overwritten, not accumulated).
void accumulate_backward(const MlpModel& model, const ForwardCache& cache,
                         std::span<const double> output_grad, ParamSet& grads,
                         std::vector<double>* input_grad = nullptr);

// Input gradient only; skips every parameter-gradient update. Used by the
// sampler, which differentiates with respect to the design, not the weights.
std::vector<double> input_gradient(const MlpModel& model, const ForwardCache& cache,
                                   std::span<const double> output_grad);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // > 0 selects AdamW (decoupled decay)
};

struct AdamState {
  ParamSet m;
  ParamSet v;
  std::int64_t step = 0;
};

AdamState make_adam_state(const MlpModel& model);

// Bias-corrected Adam update; with weight_decay > 0 the parameters are first
// scaled by (1 - lr * weight_decay). Throws on non-finite gradients.
void adam_step(MlpModel& model, const ParamSet& grads, AdamState& state, const AdamConfig& cfg);

// Mutable views over every parameter tensor, in a fixed order shared with
// ParamSet so the optimizer can walk both in lockstep.
std::vector<std::span<double>> param_views(MlpModel& model);
std::vector<std::span<double>> param_views(ParamSet& set);
std::vector<std::span<const double>> param_views(const MlpModel& model);
std::vector<std::span<const double>> param_views(const ParamSet& set);

bool all_finite(std::span<const double> v);

// Checkpoint container: format version, a config hash supplied by the
// caller, the architecture descriptor, and named parameter arrays with
// explicit shapes. Round-trips bit-exactly.
void save_model(const MlpModel& model, const std::string& path, std::uint64_t config_hash);

struct LoadedModel {
  MlpModel model;
  std::uint64_t config_hash = 0;
};
LoadedModel load_model(const std::string& path);

}  // namespace prefdiff
