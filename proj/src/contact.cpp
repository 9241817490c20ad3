#include "reeb/contact.hpp"

#include <cmath>

namespace reeb {

double alpha_st(const double* p, const double* v, int pairs) {
  double a = v[2 * pairs];
  for (int j = 0; j < pairs; ++j)
    a += 0.5 * (p[2 * j] * v[2 * j + 1] - p[2 * j + 1] * v[2 * j]);
  return a;
}

double dalpha_st(const double* v, const double* w, int pairs) {
  double a = 0.0;
  for (int j = 0; j < pairs; ++j)
    a += v[2 * j] * w[2 * j + 1] - v[2 * j + 1] * w[2 * j];
  return a;
}

void contact_frame(const double* p, int pairs, std::vector<double>& out) {
  const int dim = state_dim(pairs);
  out.assign(2 * pairs * dim, 0.0);
  for (int j = 0; j < pairs; ++j) {
    double* e = out.data() + (2 * j) * dim;
    double* f = out.data() + (2 * j + 1) * dim;
    e[2 * j] = 1.0;
    e[dim - 1] = 0.5 * p[2 * j + 1];
    f[2 * j + 1] = 1.0;
    f[dim - 1] = -0.5 * p[2 * j];
  }
}

void ReebSystem::y_field(const double* p, const HGradient& g,
                         double* out) const {
  const int n = pairs();
  double drag = 0.0;
  for (int j = 0; j < n; ++j) {
    out[2 * j] = 0.5 * p[2 * j] * g.Hz - g.Hy[j];
    out[2 * j + 1] = 0.5 * p[2 * j + 1] * g.Hz + g.Hx[j];
    drag += p[2 * j] * g.Hx[j] + p[2 * j + 1] * g.Hy[j];
  }
  out[2 * n] = -0.5 * drag;
}

void ReebSystem::x_field(const double* p, double* out) const {
  HGradient g;
  ham_->eval(p, g);
  y_field(p, g, out);
  out[2 * pairs()] += g.H;
}

std::pair<double, double> ReebSystem::reeb_residuals(const double* p) const {
  const int n = pairs();
  const int dim = state_dim(n);
  HGradient g;
  ham_->eval(p, g);

  double X[kMaxDim];
  y_field(p, g, X);
  X[2 * n] += g.H;

  auto dH = [&](const double* v) {
    double a = g.Hz * v[2 * n];
    for (int j = 0; j < n; ++j)
      a += g.Hx[j] * v[2 * j] + g.Hy[j] * v[2 * j + 1];
    return a;
  };

  const double aX = alpha_st(p, X, n);
  const double res_alpha = std::abs(aX / g.H - 1.0);

  // d(alpha_st/H)(X, b) = [H d(alpha_st)(X,b) - dH(X) alpha_st(b)
  //                        + dH(b) alpha_st(X)] / H^2
  const double dHX = dH(X);
  const double H2 = g.H * g.H;
  auto residual_against = [&](const double* b) {
    return std::abs((g.H * dalpha_st(X, b, n) - dHX * alpha_st(p, b, n) +
                     dH(b) * aX) /
                    H2);
  };

  std::vector<double> frame;
  contact_frame(p, n, frame);
  double res_dalpha = 0.0;
  for (int k = 0; k < 2 * n; ++k)
    res_dalpha = std::max(res_dalpha, residual_against(frame.data() + k * dim));
  double ez[kMaxDim] = {};
  ez[2 * n] = 1.0;
  res_dalpha = std::max(res_dalpha, residual_against(ez));

  return {res_alpha, res_dalpha};
}

FieldSample ReebSystem::sample(const double* p) const {
  const int n = pairs();
  FieldSample out;
  out.pairs = n;
  for (int k = 0; k < dim(); ++k) out.point[k] = p[k];

  HGradient g;
  ham_->eval(p, g);
  double X[kMaxDim];
  y_field(p, g, X);
  X[2 * n] += g.H;
  for (int k = 0; k < dim(); ++k) out.X[k] = X[k];

  out.H = g.H;
  out.dzX = X[2 * n];
  double drag = 0.0;
  for (int j = 0; j < n; ++j)
    drag += p[2 * j] * g.Hx[j] + p[2 * j + 1] * g.Hy[j];
  out.dzX_identity = g.H - 0.5 * drag;

  auto [ra, rd] = reeb_residuals(p);
  out.res_alpha = ra;
  out.res_dalpha = rd;
  return out;
}

}  // namespace reeb
