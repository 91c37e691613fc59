#include "prefdiff/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace prefdiff {

std::size_t MlpModel::param_count() const {
  std::size_t n = time_proj.size();
  for (const auto& l : layers) n += l.weight.size() + l.bias.size() + l.gain.size() + l.shift.size();
  return n;
}

void time_embedding(double t, int dim, std::span<double> out) {
  if (dim % 2 != 0) throw std::invalid_argument("time_embedding: dim must be even");
  if (t < 0) throw std::invalid_argument("time_embedding: t must be >= 0");
  for (int k = 0; 2 * k < dim; ++k) {
    const double arg = t / std::pow(10000.0, (2.0 * k) / dim);
    out[2 * k] = std::sin(arg);
    out[2 * k + 1] = std::cos(arg);
  }
}

std::vector<double> time_embedding(double t, int dim) {
  std::vector<double> out(dim);
  time_embedding(t, dim, out);
  return out;
}

namespace {

void he_uniform(Matrix& w, int fan_in, RngStream& rng) {
  const double limit = std::sqrt(6.0 / fan_in);
  for (double& v : w.data) v = (2.0 * rng.uniform() - 1.0) * limit;
}

}  // namespace

MlpModel make_time_mlp(const std::vector<int>& widths, int time_dim, RngStream& rng) {
  if (widths.size() < 2) throw std::invalid_argument("make_time_mlp: need at least input and output widths");
  MlpModel m;
  m.time_dim = time_dim;
  const int n_layers = static_cast<int>(widths.size()) - 1;
  for (int k = 0; k < n_layers; ++k) {
    Layer l;
    l.weight = Matrix(widths[k + 1], widths[k]);
    he_uniform(l.weight, widths[k], rng);
    l.bias.assign(widths[k + 1], 0.0);
    const bool hidden = k + 1 < n_layers;
    l.relu = hidden;
    l.norm = hidden;
    if (hidden) {
      l.gain.assign(widths[k + 1], 1.0);
      l.shift.assign(widths[k + 1], 0.0);
    }
    m.layers.push_back(std::move(l));
  }
  if (n_layers >= 2 && time_dim > 0) {
    m.time_proj = Matrix(widths[1], time_dim);
    he_uniform(m.time_proj, time_dim, rng);
  }
  return m;
}

std::vector<double> forward(const MlpModel& model, std::span<const double> input, int t,
                            ForwardCache* cache) {
  if (model.layers.empty()) throw std::invalid_argument("forward: empty model");
  if (static_cast<int>(input.size()) != model.input_dim())
    throw std::invalid_argument("forward: input size does not match first layer");
  if (t < 1) throw std::invalid_argument("forward: t must be >= 1");

  std::vector<double> emb;
  if (!model.time_proj.empty()) {
    emb = time_embedding(static_cast<double>(t), model.time_dim);
    if (cache) cache->time_emb = emb;
  }
  if (cache) cache->layer.resize(model.layers.size());

  std::vector<double> a(input.begin(), input.end());
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    const Layer& l = model.layers[k];
    if (static_cast<int>(a.size()) != l.weight.cols)
      throw std::invalid_argument("forward: layer shapes do not compose");
    const int out_n = l.weight.rows;
    std::vector<double> z(out_n);
    for (int j = 0; j < out_n; ++j) z[j] = l.bias[j] + dot(l.weight.row(j), a);
    if (k == 0 && !model.time_proj.empty()) {
      for (int j = 0; j < out_n; ++j) z[j] += dot(model.time_proj.row(j), emb);
    }
    std::vector<double> h = z;
    if (l.relu) {
      for (double& v : h) v = v > 0.0 ? v : 0.0;
    }
    std::vector<double> out;
    double inv_std = 0.0;
    std::vector<double> xhat;
    if (l.norm) {
      double mean = 0.0;
      for (double v : h) mean += v;
      mean /= out_n;
      double var = 0.0;
      for (double v : h) var += (v - mean) * (v - mean);
      var /= out_n;
      inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
      xhat.resize(out_n);
      out.resize(out_n);
      for (int j = 0; j < out_n; ++j) {
        xhat[j] = (h[j] - mean) * inv_std;
        out[j] = l.gain[j] * xhat[j] + l.shift[j];
      }
    } else {
      out = h;
    }
    if (cache) {
      LayerCache& lc = cache->layer[k];
      lc.input = a;
      lc.pre = std::move(z);
      lc.relu_out = std::move(h);
      lc.xhat = std::move(xhat);
      lc.inv_std = inv_std;
    }
    a = std::move(out);
  }
  return a;
}

ParamSet ParamSet::zeros_like(const MlpModel& model) {
  ParamSet p;
  for (const auto& l : model.layers) {
    p.weight.emplace_back(l.weight.rows, l.weight.cols);
    p.bias.emplace_back(l.bias.size(), 0.0);
    p.gain.emplace_back(l.gain.size(), 0.0);
    p.shift.emplace_back(l.shift.size(), 0.0);
  }
  p.time_proj = Matrix(model.time_proj.rows, model.time_proj.cols);
  return p;
}

void ParamSet::add(const ParamSet& other) {
  auto mine = param_views(*this);
  auto theirs = param_views(other);
  for (std::size_t i = 0; i < mine.size(); ++i)
    for (std::size_t j = 0; j < mine[i].size(); ++j) mine[i][j] += theirs[i][j];
}

void ParamSet::scale(double s) {
  for (auto view : param_views(*this))
    for (double& v : view) v *= s;
}

namespace {

// Shared reverse pass. When grads is null only the input gradient is
// produced, skipping every parameter update.
void reverse_pass(const MlpModel& model, const ForwardCache& cache,
                  std::span<const double> output_grad, ParamSet* grads,
                  std::vector<double>* input_grad) {
  if (cache.layer.size() != model.layers.size())
    throw std::invalid_argument("backward: cache does not match model");

  std::vector<double> grad(output_grad.begin(), output_grad.end());
  std::vector<double> dz, prev;
  for (int k = static_cast<int>(model.layers.size()) - 1; k >= 0; --k) {
    const Layer& l = model.layers[k];
    const LayerCache& lc = cache.layer[k];
    const int out_n = l.weight.rows;
    if (static_cast<int>(grad.size()) != out_n)
      throw std::invalid_argument("backward: gradient size mismatch");

    dz.assign(grad.begin(), grad.end());
    if (l.norm) {
      // out = gain * xhat + shift with xhat = (h - mean) * inv_std
      double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
      for (int j = 0; j < out_n; ++j) {
        if (grads) {
          grads->gain[k][j] += grad[j] * lc.xhat[j];
          grads->shift[k][j] += grad[j];
        }
        dz[j] = grad[j] * l.gain[j];
        mean_dxhat += dz[j];
        mean_dxhat_xhat += dz[j] * lc.xhat[j];
      }
      mean_dxhat /= out_n;
      mean_dxhat_xhat /= out_n;
      for (int j = 0; j < out_n; ++j)
        dz[j] = lc.inv_std * (dz[j] - mean_dxhat - lc.xhat[j] * mean_dxhat_xhat);
    }
    if (l.relu) {
      for (int j = 0; j < out_n; ++j)
        if (lc.pre[j] <= 0.0) dz[j] = 0.0;
    }

    if (grads) {
      for (int j = 0; j < out_n; ++j) {
        grads->bias[k][j] += dz[j];
        axpy(dz[j], lc.input, grads->weight[k].row(j));
      }
      if (k == 0 && !model.time_proj.empty()) {
        for (int j = 0; j < out_n; ++j) axpy(dz[j], cache.time_emb, grads->time_proj.row(j));
      }
    }

    prev.assign(l.weight.cols, 0.0);
    for (int j = 0; j < out_n; ++j) axpy(dz[j], l.weight.row(j), prev);
    grad.swap(prev);
  }
  if (input_grad) *input_grad = std::move(grad);
}

}  // namespace

Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   std::span<const double> output_grad) {
  Gradients g;
  g.params = ParamSet::zeros_like(model);
  reverse_pass(model, cache, output_grad, &g.params, &g.input);
  return g;
}

void accumulate_backward(const MlpModel& model, const ForwardCache& cache,
                         std::span<const double> output_grad, ParamSet& grads,
                         std::vector<double>* input_grad) {
  reverse_pass(model, cache, output_grad, &grads, input_grad);
}

std::vector<double> input_gradient(const MlpModel& model, const ForwardCache& cache,
                                   std::span<const double> output_grad) {
  std::vector<double> g;
  reverse_pass(model, cache, output_grad, nullptr, &g);
  return g;
}

std::vector<std::span<double>> param_views(MlpModel& model) {
  std::vector<std::span<double>> v;
  for (auto& l : model.layers) {
    v.emplace_back(l.weight.data);
    v.emplace_back(l.bias);
    v.emplace_back(l.gain);
    v.emplace_back(l.shift);
  }
  v.emplace_back(model.time_proj.data);
  return v;
}

std::vector<std::span<double>> param_views(ParamSet& set) {
  std::vector<std::span<double>> v;
  for (std::size_t k = 0; k < set.weight.size(); ++k) {
    v.emplace_back(set.weight[k].data);
    v.emplace_back(set.bias[k]);
    v.emplace_back(set.gain[k]);
    v.emplace_back(set.shift[k]);
  }
  v.emplace_back(set.time_proj.data);
  return v;
}

std::vector<std::span<const double>> param_views(const MlpModel& model) {
  std::vector<std::span<const double>> v;
  for (const auto& l : model.layers) {
    v.emplace_back(l.weight.data);
    v.emplace_back(l.bias);
    v.emplace_back(l.gain);
    v.emplace_back(l.shift);
  }
  v.emplace_back(model.time_proj.data);
  return v;
}

std::vector<std::span<const double>> param_views(const ParamSet& set) {
  std::vector<std::span<const double>> v;
  for (std::size_t k = 0; k < set.weight.size(); ++k) {
    v.emplace_back(set.weight[k].data);
    v.emplace_back(set.bias[k]);
    v.emplace_back(set.gain[k]);
    v.emplace_back(set.shift[k]);
  }
  v.emplace_back(set.time_proj.data);
  return v;
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

AdamState make_adam_state(const MlpModel& model) {
  AdamState s;
  s.m = ParamSet::zeros_like(model);
  s.v = ParamSet::zeros_like(model);
  return s;
}

void adam_step(MlpModel& model, const ParamSet& grads, AdamState& state, const AdamConfig& cfg) {
  auto p = param_views(model);
  auto g = param_views(grads);
  auto m = param_views(state.m);
  auto v = param_views(state.v);
  for (auto view : g)
    if (!all_finite(view)) throw std::runtime_error("adam_step: non-finite gradient, aborting");

  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p[i].size(); ++j) {
      if (cfg.weight_decay > 0.0) p[i][j] *= 1.0 - cfg.lr * cfg.weight_decay;
      const double gij = g[i][j];
      m[i][j] = cfg.beta1 * m[i][j] + (1.0 - cfg.beta1) * gij;
      v[i][j] = cfg.beta2 * v[i][j] + (1.0 - cfg.beta2) * gij * gij;
      const double mhat = m[i][j] / bc1;
      const double vhat = v[i][j] / bc2;
      p[i][j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

namespace {

constexpr char kMagic[4] = {'P', 'F', 'C', 'K'};
constexpr std::uint32_t kFormatVersion = 1;

void write_u32(std::ofstream& f, std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ofstream& f, std::uint64_t v) { f.write(reinterpret_cast<const char*>(&v), 8); }
void write_i32(std::ofstream& f, std::int32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t read_u32(std::ifstream& f) {
  std::uint32_t v;
  f.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
std::uint64_t read_u64(std::ifstream& f) {
  std::uint64_t v;
  f.read(reinterpret_cast<char*>(&v), 8);
  return v;
}
std::int32_t read_i32(std::ifstream& f) {
  std::int32_t v;
  f.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

void write_array(std::ofstream& f, const std::string& name, std::span<const double> data,
                 std::initializer_list<std::int64_t> dims) {
  write_u32(f, static_cast<std::uint32_t>(name.size()));
  f.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u32(f, static_cast<std::uint32_t>(dims.size()));
  for (auto dv : dims) f.write(reinterpret_cast<const char*>(&dv), 8);
  f.write(reinterpret_cast<const char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(double)));
}

struct NamedArray {
  std::string name;
  std::vector<std::int64_t> dims;
  std::vector<double> data;
};

NamedArray read_array(std::ifstream& f) {
  NamedArray a;
  const std::uint32_t name_len = read_u32(f);
  a.name.resize(name_len);
  f.read(a.name.data(), name_len);
  const std::uint32_t nd = read_u32(f);
  a.dims.resize(nd);
  std::int64_t total = 1;
  for (auto& dv : a.dims) {
    f.read(reinterpret_cast<char*>(&dv), 8);
    total *= dv;
  }
  a.data.resize(static_cast<std::size_t>(total));
  f.read(reinterpret_cast<char*>(a.data.data()),
         static_cast<std::streamsize>(a.data.size() * sizeof(double)));
  if (!f) throw std::runtime_error("checkpoint: truncated array " + a.name);
  return a;
}

}  // namespace

void save_model(const MlpModel& model, const std::string& path, std::uint64_t config_hash) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  f.write(kMagic, 4);
  write_u32(f, kFormatVersion);
  write_u64(f, config_hash);
  write_i32(f, model.time_dim);
  write_i32(f, static_cast<std::int32_t>(model.layers.size()));
  for (const auto& l : model.layers) {
    write_i32(f, l.weight.cols);
    write_i32(f, l.weight.rows);
    write_i32(f, l.relu ? 1 : 0);
    write_i32(f, l.norm ? 1 : 0);
  }
  std::uint32_t n_arrays = static_cast<std::uint32_t>(model.layers.size()) * 2;
  for (const auto& l : model.layers)
    if (l.norm) n_arrays += 2;
  if (!model.time_proj.empty()) n_arrays += 1;
  write_u32(f, n_arrays);
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    const auto& l = model.layers[k];
    const std::string base = "layer" + std::to_string(k);
    write_array(f, base + ".weight", l.weight.data, {l.weight.rows, l.weight.cols});
    write_array(f, base + ".bias", l.bias, {static_cast<std::int64_t>(l.bias.size())});
    if (l.norm) {
      write_array(f, base + ".gain", l.gain, {static_cast<std::int64_t>(l.gain.size())});
      write_array(f, base + ".shift", l.shift, {static_cast<std::int64_t>(l.shift.size())});
    }
  }
  if (!model.time_proj.empty())
    write_array(f, "time_proj", model.time_proj.data, {model.time_proj.rows, model.time_proj.cols});
  if (!f) throw std::runtime_error("checkpoint: write failed for " + path);
}

LoadedModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const std::uint32_t version = read_u32(f);
  if (version != kFormatVersion)
    throw std::runtime_error("checkpoint: unsupported format version " + std::to_string(version));

  LoadedModel lm;
  lm.config_hash = read_u64(f);
  lm.model.time_dim = read_i32(f);
  const std::int32_t n_layers = read_i32(f);
  lm.model.layers.resize(n_layers);
  for (auto& l : lm.model.layers) {
    const std::int32_t in = read_i32(f);
    const std::int32_t out = read_i32(f);
    l.weight = Matrix(out, in);
    l.bias.assign(out, 0.0);
    l.relu = read_i32(f) != 0;
    l.norm = read_i32(f) != 0;
    if (l.norm) {
      l.gain.assign(out, 0.0);
      l.shift.assign(out, 0.0);
    }
  }
  const std::uint32_t n_arrays = read_u32(f);
  for (std::uint32_t i = 0; i < n_arrays; ++i) {
    NamedArray a = read_array(f);
    if (a.name == "time_proj") {
      if (a.dims.size() != 2) throw std::runtime_error("checkpoint: bad time_proj shape");
      lm.model.time_proj = Matrix(static_cast<int>(a.dims[0]), static_cast<int>(a.dims[1]));
      lm.model.time_proj.data = std::move(a.data);
      continue;
    }
    const auto dotpos = a.name.find('.');
    if (a.name.rfind("layer", 0) != 0 || dotpos == std::string::npos)
      throw std::runtime_error("checkpoint: unknown array " + a.name);
    const int k = std::stoi(a.name.substr(5, dotpos - 5));
    if (k < 0 || k >= n_layers) throw std::runtime_error("checkpoint: layer index out of range");
    Layer& l = lm.model.layers[k];
    const std::string field = a.name.substr(dotpos + 1);
    if (field == "weight") {
      if (a.dims.size() != 2 || a.dims[0] != l.weight.rows || a.dims[1] != l.weight.cols)
        throw std::runtime_error("checkpoint: shape mismatch for " + a.name);
      l.weight.data = std::move(a.data);
    } else if (field == "bias") {
      l.bias = std::move(a.data);
    } else if (field == "gain") {
      l.gain = std::move(a.data);
    } else if (field == "shift") {
      l.shift = std::move(a.data);
    } else {
      throw std::runtime_error("checkpoint: unknown array " + a.name);
    }
  }
  return lm;
}

}  // namespace prefdiff
