#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace reeb {

// Adaptive Gauss-Kronrod 15(7) quadrature for small fixed-size vector
// integrands. Allocation-free: uses a fixed-depth segment stack.
//
// F: callable double -> std::array<double, N>.
template <int N, class F>
std::array<double, N> gauss_kronrod_adaptive(F&& f, double a, double b,
                                             double abs_tol = 1e-13,
                                             double rel_tol = 1e-13,
                                             int max_panels = 512) {
  std::array<double, N> total{};
  if (a == b) return total;

  // Kronrod 15 abscissae (positive half) and weights; Gauss-7 weights sit at
  // the odd Kronrod nodes.
  static constexpr double xk[8] = {
      0.991455371120813, 0.949107912342759, 0.864864423359769,
      0.741531185599394, 0.586087235467691, 0.405845151377397,
      0.207784955007898, 0.0};
  static constexpr double wk[8] = {
      0.022935322010529, 0.063092092629979, 0.104790010322250,
      0.140653259715525, 0.169004726639267, 0.190350578064785,
      0.204432940075298, 0.209482141084728};
  static constexpr double wg[4] = {0.129484966168870, 0.279705391489277,
                                   0.381830050505119, 0.417959183673469};

  struct Segment {
    double lo, hi;
  };
  std::array<Segment, 64> stack;
  int top = 0;
  stack[top++] = {a, b};
  const double span = std::abs(b - a);
  int panels = 0;

  auto panel = [&](double lo, double hi, std::array<double, N>& integral,
                   double& err) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);
    std::array<double, N> resk{};
    std::array<double, N> resg{};
    for (int i = 0; i < 8; ++i) {
      std::array<double, N> fsum{};
      if (i < 7) {
        auto f1 = f(c - h * xk[i]);
        auto f2 = f(c + h * xk[i]);
        for (int k = 0; k < N; ++k) fsum[k] = f1[k] + f2[k];
      } else {
        fsum = f(c);
      }
      for (int k = 0; k < N; ++k) resk[k] += wk[i] * fsum[k];
      if (i % 2 == 1) {
        for (int k = 0; k < N; ++k) resg[k] += wg[i / 2] * fsum[k];
      }
    }
    err = 0.0;
    for (int k = 0; k < N; ++k) {
      integral[k] = resk[k] * h;
      err = std::max(err, std::abs((resk[k] - resg[k]) * h));
    }
  };

  while (top > 0) {
    Segment seg = stack[--top];
    std::array<double, N> integral;
    double err;
    panel(seg.lo, seg.hi, integral, err);
    double scale = 0.0;
    for (int k = 0; k < N; ++k) scale = std::max(scale, std::abs(integral[k]));
    double budget =
        abs_tol * std::abs(seg.hi - seg.lo) / span + rel_tol * scale;
    ++panels;
    if (err <= budget || top >= static_cast<int>(stack.size()) - 2 ||
        panels >= max_panels ||
        std::abs(seg.hi - seg.lo) < 1e-14 * (1.0 + std::abs(seg.lo))) {
      for (int k = 0; k < N; ++k) total[k] += integral[k];
    } else {
      double mid = 0.5 * (seg.lo + seg.hi);
      stack[top++] = {seg.lo, mid};
      stack[top++] = {mid, seg.hi};
    }
  }
  return total;
}

// Single non-adaptive Kronrod-15 panel. For short analytic segments.
template <int N, class F>
std::array<double, N> gauss_kronrod_panel(F&& f, double a, double b) {
  static constexpr double xk[8] = {
      0.991455371120813, 0.949107912342759, 0.864864423359769,
      0.741531185599394, 0.586087235467691, 0.405845151377397,
      0.207784955007898, 0.0};
  static constexpr double wk[8] = {
      0.022935322010529, 0.063092092629979, 0.104790010322250,
      0.140653259715525, 0.169004726639267, 0.190350578064785,
      0.204432940075298, 0.209482141084728};
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::array<double, N> res{};
  for (int i = 0; i < 8; ++i) {
    std::array<double, N> fsum{};
    if (i < 7) {
      auto f1 = f(c - h * xk[i]);
      auto f2 = f(c + h * xk[i]);
      for (int k = 0; k < N; ++k) fsum[k] = f1[k] + f2[k];
    } else {
      fsum = f(c);
    }
    for (int k = 0; k < N; ++k) res[k] += wk[i] * fsum[k];
  }
  for (int k = 0; k < N; ++k) res[k] *= h;
  return res;
}

}  // namespace reeb
