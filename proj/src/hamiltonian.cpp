#include "reeb/hamiltonian.hpp"

#include <cmath>
#include <mutex>
#include <random>
#include <stdexcept>

#include "reeb/util.hpp"

namespace reeb {

std::vector<double> Hamiltonian::default_weights(int pairs, double s) {
  std::vector<double> w(pairs);
  w[0] = 1.0;
  if (pairs > 1) w[1] = s;
  // Halving the higher powers keeps sum(w) < 2, so the torus level stays
  // below 1 and g can still rise back to 0; pairwise ratios stay irrational.
  for (int j = 2; j < pairs; ++j)
    w[j] = std::pow(s, j) * std::pow(0.5, j - 1);
  return w;
}

Hamiltonian::Hamiltonian(std::shared_ptr<const ProfileFamily> profiles,
                         int pairs)
    : profiles_(std::move(profiles)), pairs_(pairs) {
  if (pairs_ < 2 || pairs_ > kMaxPairs)
    throw std::invalid_argument("hamiltonian: pairs must lie in [2, 8]");
  weights_ = default_weights(pairs_, profiles_->constants().s);
  double sum = 0.0;
  for (double w : weights_) sum += w;
  torus_level_ = 0.5 * sum;
  // The g construction needs its log window centered on the torus level.
  if (std::abs(profiles_->g_center() - torus_level_) > 1e-12)
    throw std::invalid_argument(
        "hamiltonian: profile family g-window center must equal the torus "
        "level (sum of weights)/2");
}

H0Eval Hamiltonian::eval_H0(const double* u, double z) const {
  H0Eval out;
  for (int j = 0; j < pairs_; ++j) {
    FEval fe = profiles_->f(z, u[j]);
    double e = 0.5 * weights_[j] * std::exp(fe.value);
    out.value += e;
    out.du[j] = e * fe.df_dt;
    out.dz += e * fe.df_dz;
  }
  return out;
}

void Hamiltonian::eval_radial(const double* u, double z,
                              RadialHGradient& out) const {
  H0Eval h0 = eval_H0(u, z);
  GEval ge = profiles_->g(h0.value);
  HEval he = profiles_->h(z);
  const double H1 = std::exp(ge.value);
  const double blend = 1.0 - he.value;

  out.H = blend * H1 + he.value;
  out.Hz = blend * H1 * ge.dg_dt * h0.dz + he.dh_dz * (1.0 - H1);
  for (int j = 0; j < pairs_; ++j)
    out.Hu[j] = blend * H1 * ge.dg_dt * h0.du[j];
}

void Hamiltonian::eval(const double* p, HGradient& out) const {
  double u[kMaxPairs];
  for (int j = 0; j < pairs_; ++j) {
    double x = p[2 * j], y = p[2 * j + 1];
    u[j] = x * x + y * y;
  }
  RadialHGradient rg;
  eval_radial(u, p[2 * pairs_], rg);
  out.H = rg.H;
  out.Hz = rg.Hz;
  out.Hu = rg.Hu;
  for (int j = 0; j < pairs_; ++j) {
    out.Hx[j] = 2.0 * p[2 * j] * rg.Hu[j];
    out.Hy[j] = 2.0 * p[2 * j + 1] * rg.Hu[j];
  }
}

double Hamiltonian::value(const double* p) const {
  HGradient g;
  eval(p, g);
  return g.H;
}

double Hamiltonian::dzX(const double* p) const {
  HGradient g;
  eval(p, g);
  double drag = 0.0;
  for (int j = 0; j < pairs_; ++j)
    drag += p[2 * j] * g.Hx[j] + p[2 * j + 1] * g.Hy[j];
  return g.H - 0.5 * drag;
}

double Hamiltonian::dzX_radial(const double* radii, double z) const {
  double u[kMaxPairs];
  for (int j = 0; j < pairs_; ++j) u[j] = radii[j] * radii[j];
  RadialHGradient rg;
  eval_radial(u, z, rg);
  double drag = 0.0;
  for (int j = 0; j < pairs_; ++j) drag += u[j] * rg.Hu[j];
  return rg.H - drag;
}

bool Hamiltonian::in_trivial_region(const double* p) const {
  if (std::abs(p[2 * pairs_]) >= z_support()) return true;
  const double r2 = support_radius() * support_radius();
  for (int j = 0; j < pairs_; ++j) {
    double x = p[2 * j], y = p[2 * j + 1];
    if (x * x + y * y >= r2) return true;
  }
  return false;
}

double Hamiltonian::torus_distance(const double* p) const {
  double d = std::abs(p[2 * pairs_]);
  for (int j = 0; j < pairs_; ++j) {
    double r = std::hypot(p[2 * j], p[2 * j + 1]);
    d = std::max(d, std::abs(r - 1.0));
  }
  return d;
}

double Hamiltonian::torus_distance_radial(const double* radii,
                                          double z) const {
  double d = std::abs(z);
  for (int j = 0; j < pairs_; ++j) d = std::max(d, std::abs(radii[j] - 1.0));
  return d;
}

HReport check_H_conditions(const Hamiltonian& ham, const HCheckSpec& spec) {
  HReport rep;
  rep.support_radius = ham.support_radius();
  rep.z_support = ham.z_support();
  const int n = ham.pairs();
  const double L = ham.torus_level();
  const double two_pi = 2.0 * std::acos(-1.0);

  // Torus samples: angles from a Halton set.
  {
    HGradient g;
    double p[kMaxDim];
    for (int i = 0; i < spec.torus_samples; ++i) {
      for (int j = 0; j < n; ++j) {
        double th = two_pi * halton(i + 1, j == 0 ? 2 : (j == 1 ? 3 : 5));
        p[2 * j] = std::cos(th);
        p[2 * j + 1] = std::sin(th);
      }
      p[2 * n] = 0.0;
      ham.eval(p, g);
      double dev = std::abs(g.H - L);
      for (int j = 0; j < n; ++j) {
        dev = std::max(dev, std::abs(g.Hx[j] - ham.weights()[j] * p[2 * j]));
        dev = std::max(dev, std::abs(g.Hy[j] - ham.weights()[j] * p[2 * j + 1]));
      }
      dev = std::max(dev, std::abs(g.Hz));
      rep.torus_identity_dev = std::max(rep.torus_identity_dev, dev);
      rep.torus_zdrift =
          std::max(rep.torus_zdrift, std::abs(ham.dzX(p)));
      ++rep.samples;
    }
  }

  // Cylinder r_j = 1, |z| <= z_flat.
  {
    const double z_flat = ham.profiles().constants().z_flat;
    double p[kMaxDim];
    for (int i = 0; i < spec.cylinder_samples; ++i) {
      for (int j = 0; j < n; ++j) {
        double th = two_pi * halton(i + 1, j == 0 ? 2 : (j == 1 ? 3 : 5));
        p[2 * j] = std::cos(th);
        p[2 * j + 1] = std::sin(th);
      }
      p[2 * n] = z_flat * (2.0 * halton(i + 1, 7) - 1.0);
      rep.cylinder_dev =
          std::max(rep.cylinder_dev, std::abs(ham.value(p) - L));
      ++rep.samples;
    }
  }

  // Outside the support box: cycle through the faces (large |z|, large r_j).
  {
    const double R = ham.support_radius();
    const double Z = ham.z_support();
    HGradient g;
    double p[kMaxDim];
    for (int i = 0; i < spec.outside_samples; ++i) {
      double a = halton(i + 1, 2), b = halton(i + 1, 3), c = halton(i + 1, 5);
      for (int j = 0; j < n; ++j) {
        double r = (R + 2.0) * (j == 0 ? a : b);
        double th = two_pi * c;
        p[2 * j] = r * std::cos(th);
        p[2 * j + 1] = r * std::sin(th);
      }
      p[2 * n] = (2.0 * halton(i + 1, 7) - 1.0) * (Z + 3.0);
      switch (i % 3) {
        case 0:  // beyond the z faces
          p[2 * n] = (p[2 * n] >= 0 ? 1 : -1) * (Z + 0.5 + std::abs(p[2 * n]));
          break;
        case 1: {  // beyond the first radial face
          double th = two_pi * a;
          double r = R + 0.5 + 10.0 * b;
          p[0] = r * std::cos(th);
          p[1] = r * std::sin(th);
          break;
        }
        default: {  // beyond the last radial face
          double th = two_pi * b;
          double r = R + 0.5 + 10.0 * a;
          p[2 * (n - 1)] = r * std::cos(th);
          p[2 * (n - 1) + 1] = r * std::sin(th);
          break;
        }
      }
      ham.eval(p, g);
      rep.outside_dev = std::max(rep.outside_dev, std::abs(g.H - 1.0));
      double gm = std::abs(g.Hz);
      for (int j = 0; j < n; ++j)
        gm = std::max({gm, std::abs(g.Hx[j]), std::abs(g.Hy[j])});
      rep.outside_grad = std::max(rep.outside_grad, gm);
      ++rep.samples;
    }
  }

  // dz(X) positivity off tubes around the torus. Stratified samples: the
  // plateau far out is trivial, so concentrate where the field bends.
  {
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double R = ham.support_radius();
    std::vector<double> radii = spec.tube_radii;
    std::vector<double> mins(radii.size(), 1e300);
    double p[kMaxDim];
    for (int i = 0; i < spec.volume_samples; ++i) {
      double half = (i % 2 == 0) ? 4.0 : ((i % 4 == 1) ? 10.0 : (R + 1.0));
      for (int k = 0; k < 2 * n + 1; ++k)
        p[k] = (2.0 * unit(rng) - 1.0) * half;
      double dist = ham.torus_distance(p);
      double v = ham.dzX(p);
      for (std::size_t k = 0; k < radii.size(); ++k)
        if (dist >= radii[k]) mins[k] = std::min(mins[k], v);
      ++rep.samples;
    }
    for (std::size_t k = 0; k < radii.size(); ++k)
      rep.zdrift_min_by_tube.emplace_back(radii[k], mins[k]);
  }

  bool zdrift_ok = true;
  double prev = 1e300;
  for (auto& [radius, mn] : rep.zdrift_min_by_tube) {
    zdrift_ok = zdrift_ok && mn > 0.0 && mn <= prev + 1e-12;
    prev = mn;
  }
  rep.pass = rep.torus_identity_dev < 1e-9 && rep.cylinder_dev < 1e-10 &&
             rep.outside_dev < 1e-12 && rep.outside_grad < 1e-12 &&
             rep.torus_zdrift < 1e-10 && zdrift_ok;
  return rep;
}

}  // namespace reeb
