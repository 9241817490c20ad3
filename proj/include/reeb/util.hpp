#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace reeb {

// Quintic smoothstep: 0 below 0, 1 above 1, C^2 join at both ends.
inline double smoothstep5(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

inline double smoothstep5_deriv(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  double a = x * (1.0 - x);
  return 30.0 * a * a;
}

// Septic smoothstep, C^3 join.
inline double smoothstep7(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double x2 = x * x;
  return x2 * x2 * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)));
}

inline double smoothstep7_deriv(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  double u = x * (1.0 - x);
  return 140.0 * u * u * u;
}

// Halton low-discrepancy sequence, radical inverse in the given base.
inline double halton(std::uint64_t index, unsigned base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

// Chunked parallel loop over [0, n). Deterministic as long as the worker
// writes only to index-addressed slots.
inline void parallel_for(std::size_t n, int jobs,
                         const std::function<void(std::size_t, std::size_t)>& chunk_fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs <= 1 || n < 2) {
    chunk_fn(0, n);
    return;
  }
  std::size_t nthreads = std::min<std::size_t>(jobs, n);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  std::size_t chunk = (n + nthreads - 1) / nthreads;
  for (std::size_t w = 0; w < nthreads; ++w) {
    std::size_t lo = w * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(chunk_fn, lo, hi);
  }
  for (auto& th : pool) th.join();
}

}  // namespace reeb
