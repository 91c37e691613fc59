// Compares the OpenMP-parallel kernels against their serial reference paths
// and checks that both produce identical results.

#include <chrono>
#include <cstdio>
#include <string>

#include "prefdiff/benchmarks.hpp"
#include "prefdiff/diffusion.hpp"
#include "prefdiff/sampler.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void report(const char* task, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-28s %10.1f ms %10.1f ms %8.2fx   identical: %s\n", task, serial_ms, parallel_ms,
              serial_ms / parallel_ms, identical ? "yes" : "NO");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns run serially\n");
#endif
  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  const prefdiff::Problem& problem = *prefdiff::find_problem("zdt2");

  {
    auto t0 = Clock::now();
    auto serial = prefdiff::generate_dataset(problem, 20000, 3, /*parallel=*/false);
    const double s_ms = ms_since(t0);
    t0 = Clock::now();
    auto parallel = prefdiff::generate_dataset(problem, 20000, 3, /*parallel=*/true);
    const double p_ms = ms_since(t0);
    report("dataset generation", s_ms, p_ms,
           serial.X_raw == parallel.X_raw && serial.Y == parallel.Y);
  }

  auto ds = prefdiff::generate_dataset(problem, 2000, 3);
  ds.front_assignment();
  const auto sched = prefdiff::linear_schedule(100, 1e-4, 0.02);
  prefdiff::RngStream rng(17, prefdiff::stream_id::kModelInit);
  const auto denoiser =
      prefdiff::make_time_mlp({problem.dim, 256, 256, problem.dim}, 128, rng);
  const auto classifier =
      prefdiff::make_time_mlp({2 * problem.dim, 2 * problem.dim, 2 * problem.dim, 256, 1}, 128, rng);

  {
    prefdiff::SampleOptions so;
    so.count = 128;
    so.seed = 5;
    so.parallel = false;
    auto t0 = Clock::now();
    auto serial = prefdiff::unconditional_sample(denoiser, sched, so);
    const double s_ms = ms_since(t0);
    so.parallel = true;
    t0 = Clock::now();
    auto parallel = prefdiff::unconditional_sample(denoiser, sched, so);
    const double p_ms = ms_since(t0);
    report("unconditional sampling", s_ms, p_ms, serial == parallel);
  }

  {
    prefdiff::GuidanceConfig gc;
    gc.count = 128;
    gc.seed = 5;
    gc.parallel = false;
    auto t0 = Clock::now();
    auto serial = prefdiff::guided_sample(denoiser, classifier, sched, ds, gc);
    const double s_ms = ms_since(t0);
    gc.parallel = true;
    t0 = Clock::now();
    auto parallel = prefdiff::guided_sample(denoiser, classifier, sched, ds, gc);
    const double p_ms = ms_since(t0);
    report("guided sampling", s_ms, p_ms, serial.designs == parallel.designs);
  }
  return 0;
}
