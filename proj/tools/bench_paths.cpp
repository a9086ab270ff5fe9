// Throughput benchmark: serial reference vs OpenMP kernels for bridge
// generation and the trapezoid Casimir-Polder estimator, plus a check that
// the ordered reduction is bit-identical across worker counts.

#include "wlmc/engine.hpp"
#include "wlmc/media.hpp"

#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

int main(int argc, char** argv) {
  using namespace wlmc;
  std::size_t n_paths = 200000;
  std::size_t n_steps = 1000;
  if (argc > 1) n_paths = static_cast<std::size_t>(std::atof(argv[1]));
  if (argc > 2) n_steps = static_cast<std::size_t>(std::atof(argv[2]));

  engine::RunConfig cfg;
  cfg.geometry = media::DielectricProfile::half_space(1.0, 1.0, media::Side::above);
  cfg.n_steps = n_steps;
  cfg.n_paths = n_paths;
  cfg.seed = 42;

#ifdef _OPENMP
  const int max_workers = omp_get_max_threads();
#else
  const int max_workers = 1;
#endif

  std::printf("paths=%zu  N=%zu\n", n_paths, n_steps);
  std::printf("%8s %12s %10s %14s\n", "workers", "paths/s", "speedup", "eta_bar");
  double serial_rate = 0.0;
  double serial_estimate = 0.0;
  for (int w = 1; w <= max_workers; w *= 2) {
    cfg.workers = w;
    const auto r = engine::estimate_cp(cfg, engine::CpMode::vacuum, 0.0);
    const double rate = static_cast<double>(n_paths) / r.wall_seconds;
    if (w == 1) {
      serial_rate = rate;
      serial_estimate = r.estimate;
    }
    std::printf("%8d %12.0f %9.2fx %14.8g\n", w, rate, rate / serial_rate, r.normalized);
    if (std::memcmp(&r.estimate, &serial_estimate, sizeof(double)) != 0) {
      std::printf("ordered reduction mismatch at %d workers!\n", w);
      return 1;
    }
  }
  std::printf("ordered reduction bit-identical across worker counts\n");
  return 0;
}
