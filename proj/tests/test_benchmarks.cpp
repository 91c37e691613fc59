#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "prefdiff/benchmarks.hpp"
#include "prefdiff/rng.hpp"

using namespace prefdiff;

namespace {

// Second, test-only implementation of the benchmark objectives written
// straight from the literature definitions. Kept deliberately independent of
// src/benchmarks.cpp (1-based indexing mirrors the usual formula statements).
constexpr double PI = 3.14159265358979323846;

std::vector<double> ref_eval(const std::string& name, const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  auto xi = [&](int i) { return x[i - 1]; };  // 1-based accessor

  if (name == "zdt1" || name == "zdt2" || name == "zdt3") {
    double sum = 0;
    for (int i = 2; i <= n; ++i) sum += xi(i);
    const double g = 1 + 9 * sum / (n - 1);
    const double f1 = xi(1);
    double f2;
    if (name == "zdt1")
      f2 = g * (1 - std::sqrt(f1 / g));
    else if (name == "zdt2")
      f2 = g * (1 - std::pow(f1 / g, 2));
    else
      f2 = g * (1 - std::sqrt(f1 / g) - f1 / g * std::sin(10 * PI * f1));
    return {f1, f2};
  }
  if (name == "zdt4") {
    double g = 1 + 10 * (n - 1);
    for (int i = 2; i <= n; ++i) g += std::pow(xi(i), 2) - 10 * std::cos(4 * PI * xi(i));
    const double f1 = xi(1);
    return {f1, g * (1 - std::sqrt(f1 / g))};
  }
  if (name == "zdt6") {
    const double f1 = 1 - std::exp(-4 * xi(1)) * std::pow(std::sin(6 * PI * xi(1)), 6);
    double sum = 0;
    for (int i = 2; i <= n; ++i) sum += xi(i);
    const double g = 1 + 9 * std::pow(sum / (n - 1), 0.25);
    return {f1, g * (1 - std::pow(f1 / g, 2))};
  }

  const int m = 3;
  const int k = n - m + 1;
  if (name == "dtlz1") {
    double g = 0;
    for (int i = m; i <= n; ++i)
      g += std::pow(xi(i) - 0.5, 2) - std::cos(20 * PI * (xi(i) - 0.5));
    g = 100 * (k + g);
    return {0.5 * xi(1) * xi(2) * (1 + g), 0.5 * xi(1) * (1 - xi(2)) * (1 + g),
            0.5 * (1 - xi(1)) * (1 + g)};
  }
  auto sphere = [&](double t1, double t2, double g) {
    return std::vector<double>{(1 + g) * std::cos(t1) * std::cos(t2),
                               (1 + g) * std::cos(t1) * std::sin(t2), (1 + g) * std::sin(t1)};
  };
  if (name == "dtlz2" || name == "dtlz3" || name == "dtlz4") {
    double g = 0;
    if (name == "dtlz3") {
      for (int i = m; i <= n; ++i)
        g += std::pow(xi(i) - 0.5, 2) - std::cos(20 * PI * (xi(i) - 0.5));
      g = 100 * (k + g);
    } else {
      for (int i = m; i <= n; ++i) g += std::pow(xi(i) - 0.5, 2);
    }
    double a1 = xi(1), a2 = xi(2);
    if (name == "dtlz4") {
      a1 = std::pow(a1, 100.0);
      a2 = std::pow(a2, 100.0);
    }
    return sphere(a1 * PI / 2, a2 * PI / 2, g);
  }
  if (name == "dtlz5" || name == "dtlz6") {
    double g = 0;
    if (name == "dtlz5")
      for (int i = m; i <= n; ++i) g += std::pow(xi(i) - 0.5, 2);
    else
      for (int i = m; i <= n; ++i) g += std::pow(xi(i), 0.1);
    const double t1 = xi(1) * PI / 2;
    const double t2 = PI / (4 * (1 + g)) * (1 + 2 * g * xi(2));
    return sphere(t1, t2, g);
  }
  if (name == "dtlz7") {
    double g = 0;
    for (int i = m; i <= n; ++i) g += xi(i);
    g = 1 + 9.0 / k * g;
    const double f1 = xi(1), f2 = xi(2);
    const double h =
        3 - f1 / (1 + g) * (1 + std::sin(3 * PI * f1)) - f2 / (1 + g) * (1 + std::sin(3 * PI * f2));
    return {f1, f2, (1 + g) * h};
  }
  throw std::runtime_error("ref_eval: unknown problem " + name);
}

}  // namespace

TEST_CASE("zdt1 hand values") {
  const Problem& p = *find_problem("zdt1");
  REQUIRE(p.dim == 30);
  std::vector<double> zeros(30, 0.0);
  auto y = evaluate(p, zeros);
  CHECK(y[0] == doctest::Approx(0.0));
  CHECK(y[1] == doctest::Approx(1.0));

  std::vector<double> pareto(30, 0.0);
  pareto[0] = 1.0;
  y = evaluate(p, pareto);
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(0.0));
}

TEST_CASE("dtlz2 stays on the unit sphere when the tail sits at 0.5") {
  const Problem& p = *find_problem("dtlz2");
  RngStream rng(12, 0);
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<double> x(10, 0.5);
    x[0] = rng.uniform();
    x[1] = rng.uniform();
    const auto y = evaluate(p, x);
    double norm = 0;
    for (double v : y) norm += v * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("every evaluator matches the independent reference implementation") {
  RngStream rng(99, 0);
  for (const auto& name : problem_names()) {
    const Problem& p = *find_problem(name);
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<double> x(p.dim);
      for (int j = 0; j < p.dim; ++j)
        x[j] = p.lower[j] + rng.uniform() * (p.upper[j] - p.lower[j]);
      const auto got = evaluate(p, x);
      const auto want = ref_eval(name, x);
      REQUIRE(got.size() == want.size());
      for (std::size_t j = 0; j < got.size(); ++j) {
        const double rel = std::abs(got[j] - want[j]) / std::max(1.0, std::abs(want[j]));
        CHECK(rel <= 1e-12);
      }
    }
  }
}

TEST_CASE("known Pareto constructions are non-dominated among random samples") {
  RngStream rng(7, 0);
  struct Case {
    const char* name;
    std::vector<double> x;
  };
  std::vector<Case> cases;
  for (const char* name : {"zdt1", "zdt2", "zdt3"}) {
    std::vector<double> x(30, 0.0);
    x[0] = rng.uniform();
    cases.push_back({name, x});
  }
  {
    std::vector<double> x(7, 0.5);  // dtlz1 tail at 0.5
    x[0] = rng.uniform();
    x[1] = rng.uniform();
    cases.push_back({"dtlz1", x});
  }
  for (const char* name : {"dtlz2", "dtlz5"}) {
    std::vector<double> x(10, 0.5);
    x[0] = rng.uniform();
    x[1] = rng.uniform();
    cases.push_back({name, x});
  }
  for (const auto& c : cases) {
    const Problem& p = *find_problem(c.name);
    const auto construct = evaluate(p, c.x);
    bool beaten = false;
    std::vector<double> x(p.dim);
    for (int rep = 0; rep < 10000 && !beaten; ++rep) {
      for (int j = 0; j < p.dim; ++j)
        x[j] = p.lower[j] + rng.uniform() * (p.upper[j] - p.lower[j]);
      if (dominates(evaluate(p, x), construct)) beaten = true;
    }
    CHECK_FALSE(beaten);
  }
}

TEST_CASE("evaluate rejects out-of-bounds designs") {
  const Problem& p = *find_problem("zdt1");
  std::vector<double> x(30, 0.5);
  x[3] = 1.5;
  CHECK_THROWS_AS(evaluate(p, x), std::domain_error);
  x[3] = -0.5;
  CHECK_THROWS_AS(evaluate(p, x), std::domain_error);
}

TEST_CASE("dataset generation: determinism, bounds, moments, split") {
  const Problem& p = *find_problem("zdt4");
  OfflineDataset a = generate_dataset(p, 10000, 5);
  OfflineDataset b = generate_dataset(p, 10000, 5, /*parallel=*/false);
  CHECK(a.X_raw == b.X_raw);  // parallel path equals the serial reference
  CHECK(a.Y == b.Y);
  CHECK(a.train_idx == b.train_idx);

  OfflineDataset c = generate_dataset(p, 10000, 6);
  CHECK(a.X_raw.data != c.X_raw.data);

  for (int i = 0; i < a.count(); ++i)
    for (int j = 0; j < p.dim; ++j) {
      CHECK(a.X_raw(i, j) >= p.lower[j]);
      CHECK(a.X_raw(i, j) <= p.upper[j]);
    }

  // per-variable mean within 4 standard errors of the box midpoint
  for (int j = 0; j < p.dim; ++j) {
    double mean = 0;
    for (int i = 0; i < a.count(); ++i) mean += a.X_raw(i, j);
    mean /= a.count();
    const double range = p.upper[j] - p.lower[j];
    const double se = range / std::sqrt(12.0 * a.count());
    CHECK(std::abs(mean - (p.lower[j] + range / 2)) <= 4 * se);
  }

  CHECK(a.train_idx.size() == 9000);
  CHECK(a.val_idx.size() == 1000);
  std::vector<bool> seen(a.count(), false);
  for (int i : a.train_idx) seen[i] = true;
  for (int i : a.val_idx) {
    CHECK_FALSE(seen[i]);  // disjoint
    seen[i] = true;
  }
  for (bool s : seen) CHECK(s);  // covering
}

TEST_CASE("design normalization round-trips") {
  const Problem& p = *find_problem("zdt4");
  OfflineDataset ds = generate_dataset(p, 500, 3);
  for (int i = 0; i < 50; ++i) {
    const auto norm = ds.normalize_design(ds.X_raw.row(i));
    for (double v : norm) {
      CHECK(v >= -1.0 - 1e-12);
      CHECK(v <= 1.0 + 1e-12);
    }
    const auto back = ds.denormalize_design(norm);
    for (int j = 0; j < p.dim; ++j)
      CHECK(std::abs(back[j] - ds.X_raw(i, j)) <= 1e-12 * std::max(1.0, std::abs(ds.X_raw(i, j))));
  }
}

TEST_CASE("dataset CSV round-trip is bit-exact") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "prefdiff_ds_test";
  fs::create_directories(dir);
  const std::string path = (dir / "ds.csv").string();

  const Problem& p = *find_problem("zdt6");
  OfflineDataset ds = generate_dataset(p, 200, 11);
  ds.front_assignment();
  save_dataset(ds, path, /*annotate=*/true);
  OfflineDataset back = load_dataset(path);

  CHECK(back.X_raw == ds.X_raw);
  CHECK(back.Y == ds.Y);
  CHECK(back.X_norm == ds.X_norm);
  CHECK(back.lower == ds.lower);
  CHECK(back.upper == ds.upper);
  CHECK(back.obj_stats.min == ds.obj_stats.min);
  CHECK(back.obj_stats.max == ds.obj_stats.max);
  CHECK(back.train_idx == ds.train_idx);
  CHECK(back.val_idx == ds.val_idx);
  CHECK(back.problem_name == "zdt6");
  REQUIRE(back.fronts.has_value());
  CHECK(back.fronts->front == ds.fronts->front);

  fs::remove_all(dir);
}

TEST_CASE("malformed rows are reported with their line number") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "prefdiff_ds_bad";
  fs::create_directories(dir);
  const std::string path = (dir / "bad.csv").string();
  {
    std::ofstream f(path);
    f << "x0,x1,y0,y1\n";
    f << "0.1,0.2,0.3,0.4\n";
    f << "0.1,0.2,0.3\n";  // line 3: short row
  }
  try {
    load_dataset(path);
    FAIL("expected a parse error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  {
    std::ofstream f(path);
    f << "x0,x1,y0,y1\n";
    f << "0.1,abc,0.3,0.4\n";
  }
  try {
    load_dataset(path);
    FAIL("expected a parse error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("external dataset without a sidecar loads with the evaluator disabled") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "prefdiff_ds_ext";
  fs::create_directories(dir);
  const std::string path = (dir / "ext.csv").string();
  {
    std::ofstream f(path);
    f << "x0,x1,x2,y0,y1\n";
    for (int i = 0; i < 120; ++i)
      f << 0.01 * i << "," << 0.02 * i << "," << 1.0 - 0.005 * i << "," << i << "," << 120 - i
        << "\n";
  }
  OfflineDataset ds = load_dataset(path);
  CHECK(ds.problem_name.empty());
  CHECK(find_problem(ds.problem_name) == nullptr);  // evaluation refuses downstream
  CHECK(ds.count() == 120);
  CHECK(ds.dim == 3);
  CHECK(ds.objectives == 2);
  CHECK_FALSE(ds.train_idx.empty());
  // normalization derived from the data itself
  for (int i = 0; i < ds.count(); ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(ds.X_norm(i, j) >= -1.0 - 1e-12);
      CHECK(ds.X_norm(i, j) <= 1.0 + 1e-12);
    }
  fs::remove_all(dir);
}

TEST_CASE("prune boundary case: fraction 1 is the identity") {
  const Problem& p = *find_problem("zdt1");
  OfflineDataset ds = generate_dataset(p, 120, 2);
  OfflineDataset same = prune_top_fraction(ds, 1.0);
  CHECK(same.X_raw == ds.X_raw);
  CHECK(same.Y == ds.Y);
}
