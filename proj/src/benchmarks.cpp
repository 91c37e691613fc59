#include "prefdiff/benchmarks.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string_view>

#include "json.hpp"
#include "prefdiff/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace prefdiff {

namespace {

constexpr double kPi = 3.14159265358979323846;

double zdt_g(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += x[i];
  return 1.0 + 9.0 * s / static_cast<double>(x.size() - 1);
}

std::vector<double> eval_zdt1(std::span<const double> x) {
  const double f1 = x[0];
  const double g = zdt_g(x);
  return {f1, g * (1.0 - std::sqrt(f1 / g))};
}

std::vector<double> eval_zdt2(std::span<const double> x) {
  const double f1 = x[0];
  const double g = zdt_g(x);
  return {f1, g * (1.0 - (f1 / g) * (f1 / g))};
}

std::vector<double> eval_zdt3(std::span<const double> x) {
  const double f1 = x[0];
  const double g = zdt_g(x);
  return {f1, g * (1.0 - std::sqrt(f1 / g) - (f1 / g) * std::sin(10.0 * kPi * f1))};
}

std::vector<double> eval_zdt4(std::span<const double> x) {
  const double f1 = x[0];
  double g = 1.0 + 10.0 * static_cast<double>(x.size() - 1);
  for (std::size_t i = 1; i < x.size(); ++i) g += x[i] * x[i] - 10.0 * std::cos(4.0 * kPi * x[i]);
  return {f1, g * (1.0 - std::sqrt(f1 / g))};
}

std::vector<double> eval_zdt6(std::span<const double> x) {
  const double f1 = 1.0 - std::exp(-4.0 * x[0]) * std::pow(std::sin(6.0 * kPi * x[0]), 6.0);
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += x[i];
  const double g = 1.0 + 9.0 * std::pow(s / static_cast<double>(x.size() - 1), 0.25);
  return {f1, g * (1.0 - (f1 / g) * (f1 / g))};
}

double dtlz1_g(std::span<const double> x, int m) {
  const int d = static_cast<int>(x.size());
  double s = 0.0;
  for (int i = m - 1; i < d; ++i) {
    const double c = x[i] - 0.5;
    s += c * c - std::cos(20.0 * kPi * c);
  }
  return 100.0 * (static_cast<double>(d - m + 1) + s);
}

double dtlz2_g(std::span<const double> x, int m) {
  const int d = static_cast<int>(x.size());
  double s = 0.0;
  for (int i = m - 1; i < d; ++i) {
    const double c = x[i] - 0.5;
    s += c * c;
  }
  return s;
}

std::vector<double> eval_dtlz1(std::span<const double> x, int m) {
  const double g = dtlz1_g(x, m);
  std::vector<double> f(m);
  for (int j = 0; j < m; ++j) {
    double v = 0.5 * (1.0 + g);
    for (int i = 0; i < m - 1 - j; ++i) v *= x[i];
    if (j > 0) v *= 1.0 - x[m - 1 - j];
    f[j] = v;
  }
  return f;
}

std::vector<double> dtlz_sphere(std::span<const double> theta, double g, int m) {
  // theta holds the m-1 position angles already scaled to [0, pi/2]
  std::vector<double> f(m);
  for (int j = 0; j < m; ++j) {
    double v = 1.0 + g;
    for (int i = 0; i < m - 1 - j; ++i) v *= std::cos(theta[i]);
    if (j > 0) v *= std::sin(theta[m - 1 - j]);
    f[j] = v;
  }
  return f;
}

std::vector<double> eval_dtlz2(std::span<const double> x, int m) {
  const double g = dtlz2_g(x, m);
  std::vector<double> theta(m - 1);
  for (int i = 0; i < m - 1; ++i) theta[i] = x[i] * kPi / 2.0;
  return dtlz_sphere(theta, g, m);
}

std::vector<double> eval_dtlz3(std::span<const double> x, int m) {
  const double g = dtlz1_g(x, m);
  std::vector<double> theta(m - 1);
  for (int i = 0; i < m - 1; ++i) theta[i] = x[i] * kPi / 2.0;
  return dtlz_sphere(theta, g, m);
}

std::vector<double> eval_dtlz4(std::span<const double> x, int m) {
  constexpr double kAlpha = 100.0;
  const double g = dtlz2_g(x, m);
  std::vector<double> theta(m - 1);
  for (int i = 0; i < m - 1; ++i) theta[i] = std::pow(x[i], kAlpha) * kPi / 2.0;
  return dtlz_sphere(theta, g, m);
}

std::vector<double> eval_dtlz5(std::span<const double> x, int m) {
  const double g = dtlz2_g(x, m);
  std::vector<double> theta(m - 1);
  theta[0] = x[0] * kPi / 2.0;
  for (int i = 1; i < m - 1; ++i) theta[i] = kPi / (4.0 * (1.0 + g)) * (1.0 + 2.0 * g * x[i]);
  return dtlz_sphere(theta, g, m);
}

std::vector<double> eval_dtlz6(std::span<const double> x, int m) {
  const int d = static_cast<int>(x.size());
  double g = 0.0;
  for (int i = m - 1; i < d; ++i) g += std::pow(x[i], 0.1);
  std::vector<double> theta(m - 1);
  theta[0] = x[0] * kPi / 2.0;
  for (int i = 1; i < m - 1; ++i) theta[i] = kPi / (4.0 * (1.0 + g)) * (1.0 + 2.0 * g * x[i]);
  return dtlz_sphere(theta, g, m);
}

std::vector<double> eval_dtlz7(std::span<const double> x, int m) {
  const int d = static_cast<int>(x.size());
  double s = 0.0;
  for (int i = m - 1; i < d; ++i) s += x[i];
  const double g = 1.0 + 9.0 * s / static_cast<double>(d - m + 1);
  std::vector<double> f(m);
  double h = static_cast<double>(m);
  for (int j = 0; j < m - 1; ++j) {
    f[j] = x[j];
    h -= f[j] / (1.0 + g) * (1.0 + std::sin(3.0 * kPi * f[j]));
  }
  f[m - 1] = (1.0 + g) * h;
  return f;
}

Matrix extremes_from_rows(std::initializer_list<std::vector<double>> rows) {
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.begin()->size()));
  int r = 0;
  for (const auto& row : rows) {
    std::copy(row.begin(), row.end(), m.row(r++).begin());
  }
  return m;
}

std::vector<Problem> build_registry() {
  std::vector<Problem> reg;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  auto box = [](int d, double lo, double hi) {
    return std::make_pair(std::vector<double>(d, lo), std::vector<double>(d, hi));
  };

  auto add = [&](std::string name, int d, int m, std::vector<double> lo, std::vector<double> hi,
                 std::function<std::vector<double>(std::span<const double>)> fn, Matrix ext) {
    Problem p;
    p.name = std::move(name);
    p.dim = d;
    p.objectives = m;
    p.lower = std::move(lo);
    p.upper = std::move(hi);
    p.eval = std::move(fn);
    p.front_extremes = std::move(ext);
    reg.push_back(std::move(p));
  };

  const Matrix zdt_ext = extremes_from_rows({{1.0, 0.0}, {0.0, 1.0}});

  {
    auto [lo, hi] = box(30, 0.0, 1.0);
    add("zdt1", 30, 2, lo, hi, eval_zdt1, zdt_ext);
    add("zdt2", 30, 2, lo, hi, eval_zdt2, zdt_ext);
    add("zdt3", 30, 2, lo, hi, eval_zdt3, Matrix{});
  }
  {
    auto [lo, hi] = box(10, -5.0, 5.0);
    lo[0] = 0.0;
    hi[0] = 1.0;
    add("zdt4", 10, 2, lo, hi, eval_zdt4, zdt_ext);
  }
  {
    auto [lo, hi] = box(10, 0.0, 1.0);
    add("zdt6", 10, 2, lo, hi, eval_zdt6, Matrix{});
  }

  const Matrix simplex_ext =
      extremes_from_rows({{0.5, 0.0, 0.0}, {0.0, 0.5, 0.0}, {0.0, 0.0, 0.5}});
  const Matrix sphere_ext =
      extremes_from_rows({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}});
  const Matrix curve_ext = extremes_from_rows(
      {{inv_sqrt2, inv_sqrt2, 0.0}, {inv_sqrt2, inv_sqrt2, 0.0}, {0.0, 0.0, 1.0}});

  auto dtlz = [](auto fn, int m) {
    return [fn, m](std::span<const double> x) { return fn(x, m); };
  };

  {
    auto [lo, hi] = box(7, 0.0, 1.0);
    add("dtlz1", 7, 3, lo, hi, dtlz(eval_dtlz1, 3), simplex_ext);
  }
  {
    auto [lo, hi] = box(10, 0.0, 1.0);
    add("dtlz2", 10, 3, lo, hi, dtlz(eval_dtlz2, 3), sphere_ext);
    add("dtlz3", 10, 3, lo, hi, dtlz(eval_dtlz3, 3), sphere_ext);
    add("dtlz4", 10, 3, lo, hi, dtlz(eval_dtlz4, 3), sphere_ext);
    add("dtlz5", 10, 3, lo, hi, dtlz(eval_dtlz5, 3), curve_ext);
    add("dtlz6", 10, 3, lo, hi, dtlz(eval_dtlz6, 3), curve_ext);
    add("dtlz7", 10, 3, lo, hi, dtlz(eval_dtlz7, 3), Matrix{});
  }
  return reg;
}

const std::vector<Problem>& registry() {
  static const std::vector<Problem> reg = build_registry();
  return reg;
}

}  // namespace

const Problem* find_problem(const std::string& name) {
  for (const auto& p : registry())
    if (p.name == name) return &p;
  return nullptr;
}

std::vector<std::string> problem_names() {
  std::vector<std::string> names;
  for (const auto& p : registry()) names.push_back(p.name);
  return names;
}

std::vector<double> evaluate(const Problem& problem, std::span<const double> x) {
  if (static_cast<int>(x.size()) != problem.dim)
    throw std::invalid_argument("evaluate: design dimension mismatch for " + problem.name);
  std::vector<double> clamped(x.begin(), x.end());
  for (int i = 0; i < problem.dim; ++i) {
    const double tol = 1e-9 * (problem.upper[i] - problem.lower[i]);
    if (x[i] < problem.lower[i] - tol || x[i] > problem.upper[i] + tol)
      throw std::domain_error("evaluate: design outside bounds of " + problem.name +
                              " at variable " + std::to_string(i));
    clamped[i] = std::clamp(x[i], problem.lower[i], problem.upper[i]);
  }
  return problem.eval(clamped);
}

std::vector<double> OfflineDataset::normalize_design(std::span<const double> raw) const {
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double range = upper[i] - lower[i];
    out[i] = range > 0.0 ? -1.0 + 2.0 * (raw[i] - lower[i]) / range : 0.0;
  }
  return out;
}

std::vector<double> OfflineDataset::denormalize_design(std::span<const double> norm) const {
  std::vector<double> out(norm.size());
  for (std::size_t i = 0; i < norm.size(); ++i)
    out[i] = lower[i] + (norm[i] + 1.0) * 0.5 * (upper[i] - lower[i]);
  return out;
}

const FrontAssignment& OfflineDataset::front_assignment() {
  if (!fronts) fronts = compute_front_assignment(Y);
  return *fronts;
}

namespace {

void make_split(OfflineDataset& ds, std::uint64_t stream) {
  const int n = ds.count();
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  RngStream rng(ds.seed, stream);
  rng.shuffle(idx);
  const int n_train = static_cast<int>(std::llround(0.9 * n));
  ds.train_idx.assign(idx.begin(), idx.begin() + n_train);
  ds.val_idx.assign(idx.begin() + n_train, idx.end());
}

}  // namespace

OfflineDataset generate_dataset(const Problem& problem, int count, std::uint64_t seed,
                                bool parallel) {
  if (count < 100) throw std::invalid_argument("generate_dataset: count must be >= 100");
  OfflineDataset ds;
  ds.problem_name = problem.name;
  ds.dim = problem.dim;
  ds.objectives = problem.objectives;
  ds.lower = problem.lower;
  ds.upper = problem.upper;
  ds.seed = seed;
  ds.X_raw = Matrix(count, problem.dim);
  ds.X_norm = Matrix(count, problem.dim);
  ds.Y = Matrix(count, problem.objectives);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (int i = 0; i < count; ++i) {
    RngStream rng(seed, stream_id::kDatasetRow + static_cast<std::uint64_t>(i));
    auto xr = ds.X_raw.row(i);
    for (int j = 0; j < problem.dim; ++j)
      xr[j] = problem.lower[j] + rng.uniform() * (problem.upper[j] - problem.lower[j]);
    const auto y = problem.eval(xr);
    std::copy(y.begin(), y.end(), ds.Y.row(i).begin());
    const auto xn = ds.normalize_design(xr);
    std::copy(xn.begin(), xn.end(), ds.X_norm.row(i).begin());
  }

  ds.obj_stats.min.assign(problem.objectives, std::numeric_limits<double>::infinity());
  ds.obj_stats.max.assign(problem.objectives, -std::numeric_limits<double>::infinity());
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < problem.objectives; ++j) {
      ds.obj_stats.min[j] = std::min(ds.obj_stats.min[j], ds.Y(i, j));
      ds.obj_stats.max[j] = std::max(ds.obj_stats.max[j], ds.Y(i, j));
    }

  make_split(ds, stream_id::kDatasetSplit);
  return ds;
}

OfflineDataset prune_top_fraction(const OfflineDataset& ds, double fraction) {
  if (fraction <= 0.0 || fraction > 1.0)
    throw std::invalid_argument("prune_top_fraction: fraction must be in (0, 1]");
  const int n = ds.count();
  const int keep_count = static_cast<int>(std::ceil(fraction * n));

  OfflineDataset src = ds;  // front assignment may need to be computed
  const FrontAssignment& fa = src.front_assignment();

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (fa.front[a] != fa.front[b]) return fa.front[a] < fa.front[b];
    if (fa.crowding[a] != fa.crowding[b]) return fa.crowding[a] > fa.crowding[b];
    return a < b;
  });
  std::vector<int> kept(order.begin(), order.begin() + keep_count);
  std::sort(kept.begin(), kept.end());

  OfflineDataset out;
  out.problem_name = ds.problem_name;
  out.dim = ds.dim;
  out.objectives = ds.objectives;
  out.lower = ds.lower;
  out.upper = ds.upper;
  out.obj_stats = ds.obj_stats;  // frozen: metrics stay comparable across variants
  out.seed = ds.seed;
  out.X_raw = Matrix(keep_count, ds.dim);
  out.X_norm = Matrix(keep_count, ds.dim);
  out.Y = Matrix(keep_count, ds.objectives);
  for (int i = 0; i < keep_count; ++i) {
    const int src_row = kept[i];
    std::copy(ds.X_raw.row(src_row).begin(), ds.X_raw.row(src_row).end(), out.X_raw.row(i).begin());
    std::copy(ds.X_norm.row(src_row).begin(), ds.X_norm.row(src_row).end(), out.X_norm.row(i).begin());
    std::copy(ds.Y.row(src_row).begin(), ds.Y.row(src_row).end(), out.Y.row(i).begin());
  }
  make_split(out, stream_id::kPruneSplit);
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(std::string_view field, int line_no) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw std::runtime_error("dataset: line " + std::to_string(line_no) +
                             ": cannot parse number '" + std::string(field) + "'");
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace

void save_dataset(const OfflineDataset& ds, const std::string& csv_path, bool annotate) {
  const FrontAssignment* fa = nullptr;
  OfflineDataset tmp;
  if (annotate) {
    if (ds.fronts) {
      fa = &*ds.fronts;
    } else {
      tmp = ds;
      fa = &tmp.front_assignment();
    }
  }

  std::ofstream f(csv_path, std::ios::trunc);
  if (!f) throw std::runtime_error("dataset: cannot open " + csv_path + " for writing");
  for (int j = 0; j < ds.dim; ++j) f << (j ? ",x" : "x") << j;
  for (int j = 0; j < ds.objectives; ++j) f << ",y" << j;
  if (annotate) f << ",front,crowding";
  f << "\n";
  for (int i = 0; i < ds.count(); ++i) {
    for (int j = 0; j < ds.dim; ++j) f << (j ? "," : "") << format_double(ds.X_raw(i, j));
    for (int j = 0; j < ds.objectives; ++j) f << "," << format_double(ds.Y(i, j));
    if (annotate) f << "," << fa->front[i] << "," << format_double(fa->crowding[i]);
    f << "\n";
  }
  if (!f) throw std::runtime_error("dataset: write failed for " + csv_path);

  nlohmann::json meta;
  meta["format_version"] = 1;
  meta["problem"] = ds.problem_name;
  meta["dim"] = ds.dim;
  meta["objectives"] = ds.objectives;
  meta["lower"] = ds.lower;
  meta["upper"] = ds.upper;
  meta["objective_min"] = ds.obj_stats.min;
  meta["objective_max"] = ds.obj_stats.max;
  meta["train_idx"] = ds.train_idx;
  meta["val_idx"] = ds.val_idx;
  meta["seed"] = ds.seed;
  meta["count"] = ds.count();
  std::ofstream mf(csv_path + ".meta.json", std::ios::trunc);
  if (!mf) throw std::runtime_error("dataset: cannot write sidecar for " + csv_path);
  mf << meta.dump(2) << "\n";
}

OfflineDataset load_dataset(const std::string& csv_path) {
  std::ifstream f(csv_path);
  if (!f) throw std::runtime_error("dataset: cannot open " + csv_path);

  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("dataset: empty file " + csv_path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);

  int d = 0, m = 0;
  bool annotated = false;
  {
    std::size_t i = 0;
    while (i < header.size() && header[i] == "x" + std::to_string(i)) ++i;
    d = static_cast<int>(i);
    std::size_t j = 0;
    while (i + j < header.size() && header[i + j] == "y" + std::to_string(j)) ++j;
    m = static_cast<int>(j);
    const std::size_t rest = header.size() - i - j;
    if (rest == 2 && header[i + j] == "front" && header[i + j + 1] == "crowding")
      annotated = true;
    else if (rest != 0)
      throw std::runtime_error("dataset: malformed header in " + csv_path);
    if (d == 0 || m == 0) throw std::runtime_error("dataset: malformed header in " + csv_path);
  }

  std::vector<double> xs, ys;
  std::vector<int> front_col;
  std::vector<double> crowd_col;
  int line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    const std::size_t expected = static_cast<std::size_t>(d + m) + (annotated ? 2 : 0);
    if (fields.size() != expected)
      throw std::runtime_error("dataset: line " + std::to_string(line_no) + ": expected " +
                               std::to_string(expected) + " fields, got " +
                               std::to_string(fields.size()));
    for (int j = 0; j < d; ++j) xs.push_back(parse_double(fields[j], line_no));
    for (int j = 0; j < m; ++j) ys.push_back(parse_double(fields[d + j], line_no));
    if (annotated) {
      front_col.push_back(static_cast<int>(parse_double(fields[d + m], line_no)));
      crowd_col.push_back(parse_double(fields[d + m + 1], line_no));
    }
  }
  const int n = static_cast<int>(xs.size()) / d;

  OfflineDataset ds;
  ds.dim = d;
  ds.objectives = m;
  ds.X_raw = Matrix(n, d);
  ds.X_raw.data = std::move(xs);
  ds.Y = Matrix(n, m);
  ds.Y.data = std::move(ys);

  const std::string meta_path = csv_path + ".meta.json";
  std::ifstream mf(meta_path);
  if (mf) {
    nlohmann::json meta = nlohmann::json::parse(mf);
    ds.problem_name = meta.at("problem").get<std::string>();
    if (meta.at("dim").get<int>() != d || meta.at("objectives").get<int>() != m)
      throw std::runtime_error("dataset: sidecar shape disagrees with CSV " + csv_path);
    ds.lower = meta.at("lower").get<std::vector<double>>();
    ds.upper = meta.at("upper").get<std::vector<double>>();
    ds.obj_stats.min = meta.at("objective_min").get<std::vector<double>>();
    ds.obj_stats.max = meta.at("objective_max").get<std::vector<double>>();
    ds.train_idx = meta.at("train_idx").get<std::vector<int>>();
    ds.val_idx = meta.at("val_idx").get<std::vector<int>>();
    ds.seed = meta.at("seed").get<std::uint64_t>();
  } else {
    // External data without a sidecar: bounds and stats come from the data,
    // the evaluator stays disabled (empty problem name).
    ds.problem_name = "";
    ds.lower.assign(d, std::numeric_limits<double>::infinity());
    ds.upper.assign(d, -std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) {
        ds.lower[j] = std::min(ds.lower[j], ds.X_raw(i, j));
        ds.upper[j] = std::max(ds.upper[j], ds.X_raw(i, j));
      }
    ds.obj_stats.min.assign(m, std::numeric_limits<double>::infinity());
    ds.obj_stats.max.assign(m, -std::numeric_limits<double>::infinity());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        ds.obj_stats.min[j] = std::min(ds.obj_stats.min[j], ds.Y(i, j));
        ds.obj_stats.max[j] = std::max(ds.obj_stats.max[j], ds.Y(i, j));
      }
    ds.seed = 0;
    make_split(ds, stream_id::kDatasetSplit);
  }

  ds.X_norm = Matrix(n, d);
  for (int i = 0; i < n; ++i) {
    const auto xn = ds.normalize_design(ds.X_raw.row(i));
    std::copy(xn.begin(), xn.end(), ds.X_norm.row(i).begin());
  }
  if (annotated) {
    FrontAssignment fa;
    fa.front = std::move(front_col);
    fa.crowding = std::move(crowd_col);
    for (int fr : fa.front) fa.front_count = std::max(fa.front_count, fr + 1);
    ds.fronts = std::move(fa);
  }
  return ds;
}

}  // namespace prefdiff
