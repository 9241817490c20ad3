#include "reeb/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "reeb/quadrature.hpp"
#include "reeb/util.hpp"

namespace reeb {

namespace {

constexpr double kTauLo = 0.25;
constexpr double kTauHi = 0.75;

// Radial modulation step: 0 near t = 0 (keeps f finite and flat there),
// 1 from 3/4 on so that t f_t can reach 1 at t = 1.
double tau(double t) {
  if (t <= kTauLo) return 0.0;
  if (t >= kTauHi) return 1.0;
  return smoothstep5((t - kTauLo) / (kTauHi - kTauLo));
}

// d(z,u) = q / (2(1+q)), q = (u-1)^2 + z^2. In [0, 1/2), zero only at (0,1).
double damping(double z, double u) {
  double um1 = u - 1.0;
  double q = um1 * um1 + z * z;
  return 0.5 * q / (1.0 + q);
}

std::array<double, 2> f_integrand(double z, double u) {
  double tu = tau(u);
  if (tu == 0.0) return {0.0, 0.0};
  double um1 = u - 1.0;
  double q = um1 * um1 + z * z;
  double inv1q = 1.0 / (1.0 + q);
  double one_minus_d = (1.0 + 0.5 * q) * inv1q;
  double dd_dz = z * inv1q * inv1q;
  return {tu * one_minus_d / u, -tu * dd_dz / u};
}

}  // namespace

void ProfileConstants::validate(double g_window_center) const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("profile constants: " + what);
  };
  if (!(s > 0.0 && s < 1.0)) fail("s must lie in (0,1)");
  if (!(c > 2.0 / s)) fail("c must exceed 2/s");
  if (!(delta_g > 0.0)) fail("delta_g must be positive");
  double a = g_window_center + delta_g;
  if (!(a < s * c / 2.0)) fail("log window must end before s*c/2");
  if (!(a < 1.0))
    fail("log window must end below t = 1, or g cannot rise back to 0 "
         "monotonically");
  if (!(g_window_center - delta_g > 0.0)) fail("log window must stay positive");
  if (!(z_flat >= 1.0 && z_flat < z_full)) fail("need 1 <= z_flat < z_full");
}

ReferenceProfiles::ReferenceProfiles(ProfileConstants constants,
                                     double g_window_center)
    : constants_(constants),
      g_center_(g_window_center > 0.0 ? g_window_center
                                      : 0.5 * (1.0 + constants.s)) {
  constants_.validate(g_center_);

  // Solve the g ramp: g = log t up to m, then g' = kappa/t with
  // kappa = 1 - smoothstep((t-m)/w), so that g(m+w) = 0 exactly.
  const double a = g_center_ + constants_.delta_g;
  const double t_zero = constants_.s * constants_.c / 2.0;
  const double need = -std::log(a);  // > 0 since a < 1

  auto ramp_integral = [](double m, double w) {
    auto integrand = [m, w](double u) -> std::array<double, 1> {
      return {(1.0 - smoothstep5((u - m) / w)) / u};
    };
    return gauss_kronrod_panel<1>(integrand, m, m + w)[0];
  };

  double w = std::min(1.0, 0.5 * (t_zero - a));
  // Shrink the ramp until (i) even the earliest knot position undershoots the
  // required rise and (ii) the knot can sit above t = 1.
  while (ramp_integral(a, w) >= need || t_zero - w <= 1.0 + 1e-9) w *= 0.5;

  double lo = a, hi = t_zero - w;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    double excess = std::log(mid) + ramp_integral(mid, w);
    (excess < 0.0 ? lo : hi) = mid;
    if (hi - lo < 1e-17 * mid) break;
  }
  g_m_ = 0.5 * (lo + hi);
  g_w_ = w;
}

FEval ReferenceProfiles::f(double z, double t) const {
  if (!std::isfinite(z) || !std::isfinite(t))
    throw std::domain_error("profiles: f requires finite arguments");
  if (t < 0.0) throw std::domain_error("profiles: f requires t >= 0");

  double df_dt = 0.0;
  if (t > kTauLo) df_dt = tau(t) * (1.0 - damping(z, t)) / t;
  if (t == 1.0) return {0.0, df_dt, 0.0};

  const double lo = std::min(t, 1.0);
  const double hi = std::max(t, 1.0);
  const double sign = t >= 1.0 ? 1.0 : -1.0;

  auto integrand = [z](double u) { return f_integrand(z, u); };

  // Split at the smoothstep joins of tau so every panel is analytic.
  double edges[4];
  int ne = 0;
  edges[ne++] = lo;
  if (kTauLo > lo && kTauLo < hi) edges[ne++] = kTauLo;
  if (kTauHi > lo && kTauHi < hi) edges[ne++] = kTauHi;
  edges[ne++] = hi;

  double value = 0.0, df_dz = 0.0;
  for (int i = 0; i + 1 < ne; ++i) {
    auto part = gauss_kronrod_adaptive<2>(integrand, edges[i], edges[i + 1]);
    value += part[0];
    df_dz += part[1];
  }
  return {sign * value, df_dt, sign * df_dz};
}

double ReferenceProfiles::kappa(double t) const {
  if (t <= g_m_) return 1.0;
  return 1.0 - smoothstep5((t - g_m_) / g_w_);
}

GEval ReferenceProfiles::g(double t) const {
  if (!std::isfinite(t) || t <= 0.0)
    throw std::domain_error("profiles: g requires t > 0");
  if (t <= g_m_) return {std::log(t), 1.0 / t};
  const double knot = g_m_ + g_w_;
  if (t >= knot) return {0.0, 0.0};
  auto integrand = [this](double u) -> std::array<double, 1> {
    return {kappa(u) / u};
  };
  double value = std::log(g_m_) + gauss_kronrod_panel<1>(integrand, g_m_, t)[0];
  return {value, kappa(t) / t};
}

HEval ReferenceProfiles::h(double z) const {
  if (!std::isfinite(z)) throw std::domain_error("profiles: h requires finite z");
  const double az = std::abs(z);
  if (az <= constants_.z_flat) return {0.0, 0.0};
  if (az >= constants_.z_full) return {1.0, 0.0};
  const double w = constants_.z_full - constants_.z_flat;
  const double x = (az - constants_.z_flat) / w;
  double deriv = smoothstep7_deriv(x) / w;
  return {smoothstep7(x), z >= 0.0 ? deriv : -deriv};
}

const ConstraintEntry* ConstraintReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

namespace {

struct Worst {
  double value = -1e300;
  double z = 0.0, t = 0.0;
  void take_max(double v, double zz, double tt) {
    if (v > value) {
      value = v;
      z = zz;
      t = tt;
    }
  }
  void record(double zz, double tt) {
    z = zz;
    t = tt;
  }
};

ConstraintEntry make_entry(const std::string& name, double slack,
                           const Worst& w) {
  ConstraintEntry e;
  e.name = name;
  e.margin = slack;
  e.worst_z = w.z;
  e.worst_t = w.t;
  e.pass = slack >= 0.0;
  return e;
}

}  // namespace

ConstraintReport verify_profiles(const ProfileFamily& profiles,
                                 const ProfileGridSpec& grid) {
  const ProfileConstants& pc = profiles.constants();
  ConstraintReport report;

  const double z_max = pc.z_full + 2.0;
  const double t_max = 4.0 * pc.t_star();
  const int nz = std::max(grid.nz, 8);
  const int nt = std::max(grid.nt, 8);

  std::vector<double> zs(nz), ts;
  for (int i = 0; i < nz; ++i)
    zs[i] = -z_max + 2.0 * z_max * i / (nz - 1);
  // Graded t grid: node 0 at t = 0, then geometric. Concentrates samples
  // around the equality point t = 1 while still reaching 4 t_star.
  ts.reserve(nt);
  ts.push_back(0.0);
  const double t_lo = 0.01;
  for (int i = 0; i < nt - 1; ++i)
    ts.push_back(t_lo * std::pow(t_max / t_lo, double(i) / (nt - 2)));

  Worst w_f_at_one, w_slope, w_strict, w_floor, w_zero, w_flat_slope;
  double strict_min = 1e300, floor_min = 1e300;

  // Row sweep over (z, t).
  for (double z : zs) {
    FEval at_one = profiles.f(z, 1.0);
    w_f_at_one.take_max(std::abs(at_one.value), z, 1.0);
    FEval at_zero = profiles.f(z, 0.0);
    w_zero.take_max(std::abs(at_zero.value), z, 0.0);

    for (double t : ts) {
      FEval fe = profiles.f(z, t);
      double tslope = t * fe.df_dt;
      w_slope.take_max(tslope, z, t);
      if (t <= kTauLo) w_flat_slope.take_max(std::abs(fe.df_dt), z, t);

      // Strictness away from the designated equality point, measured
      // against half the reference margin model.
      double dz_ = z, dt_ = t - 1.0;
      if (dz_ * dz_ + dt_ * dt_ > 1e-3 * 1e-3) {
        double floor = (1.0 - tau(t)) + tau(t) * damping(z, t);
        double slack = (1.0 - tslope) - 0.5 * floor;
        if (slack < strict_min) {
          strict_min = slack;
          w_strict.record(z, t);
        }
      }
      if (t >= pc.t_star()) {
        double gap = fe.value - std::log(pc.c);
        if (gap < floor_min) {
          floor_min = gap;
          w_floor.record(z, t);
        }
      }
      ++report.samples;
    }
  }

  report.slope_peak_z = w_slope.z;
  report.slope_peak_t = w_slope.t;
  report.slope_peak_value = w_slope.value;
  report.cell_z = 2.0 * z_max / (nz - 1);
  // Local spacing of the geometric grid at the peak node.
  report.cell_t = w_slope.t * (std::pow(t_max / t_lo, 1.0 / (nt - 2)) - 1.0);
  if (report.cell_t <= 0.0) report.cell_t = t_lo;

  report.entries.push_back(
      make_entry("f_value_at_one", 1e-12 - w_f_at_one.value, w_f_at_one));
  report.entries.push_back(
      make_entry("f_slope_cap", 1.0 + 1e-12 - w_slope.value, w_slope));
  report.entries.push_back(make_entry("f_slope_strict", strict_min, w_strict));
  report.entries.push_back(make_entry("f_log_floor", floor_min, w_floor));
  report.entries.push_back(
      make_entry("f_finite_at_zero", 10.0 - w_zero.value, w_zero));
  report.entries.push_back(make_entry(
      "f_flat_slope_near_zero", 1e-15 - w_flat_slope.value, w_flat_slope));

  // g constraints on its own graded grid.
  {
    Worst w_window, w_tail, w_cap, w_mono;
    double cap_min = 1e300, mono_min = 1e300;
    const double t_zero = pc.s * pc.c / 2.0;
    const double center = profiles.g_center();
    const int m = std::max(grid.nt, 64);
    double prev_val = 0.0;
    bool have_prev = false;
    Worst w_order;
    double order_min = 1e300;
    for (int i = 0; i < m; ++i) {
      double t = 0.05 * std::pow((4.0 * t_zero) / 0.05, double(i) / (m - 1));
      GEval ge = profiles.g(t);
      if (std::abs(t - center) <= pc.delta_g) {
        double dev = std::max(std::abs(ge.value - std::log(t)),
                              std::abs(ge.dg_dt - 1.0 / t));
        w_window.take_max(dev, 0.0, t);
      }
      if (t >= t_zero) {
        double dev = std::max(std::abs(ge.value), std::abs(ge.dg_dt));
        w_tail.take_max(dev, 0.0, t);
      }
      double cap = 1.0 / t - ge.dg_dt;
      if (cap < cap_min) {
        cap_min = cap;
        w_cap.record(0.0, t);
      }
      if (ge.dg_dt < mono_min) {
        mono_min = ge.dg_dt;
        w_mono.record(0.0, t);
      }
      if (have_prev && ge.value - prev_val < order_min) {
        order_min = ge.value - prev_val;
        w_order.record(0.0, t);
      }
      prev_val = ge.value;
      have_prev = true;
    }
    // Window explicitly includes the designated equality points.
    GEval at_center = profiles.g(center);
    w_window.take_max(std::abs(at_center.value - std::log(center)), 0.0,
                      center);
    report.entries.push_back(
        make_entry("g_log_window", 1e-12 - w_window.value, w_window));
    report.entries.push_back(
        make_entry("g_zero_tail", 1e-12 - w_tail.value, w_tail));
    report.entries.push_back(
        make_entry("g_slope_cap", cap_min + 1e-12, w_cap));
    report.entries.push_back(make_entry("g_monotone", mono_min, w_mono));
    report.entries.push_back(
        make_entry("g_value_ordered", order_min + 1e-12, w_order));
  }

  // h constraints.
  {
    Worst w_flat, w_sat, w_range;
    double range_min = 1e300;
    const int m = std::max(grid.nz, 64);
    for (int i = 0; i < m; ++i) {
      double z = -z_max + 2.0 * z_max * i / (m - 1);
      HEval he = profiles.h(z);
      if (std::abs(z) <= pc.z_flat)
        w_flat.take_max(std::max(std::abs(he.value), std::abs(he.dh_dz)), z, 0);
      if (std::abs(z) >= pc.z_full)
        w_sat.take_max(std::max(std::abs(he.value - 1.0), std::abs(he.dh_dz)),
                       z, 0);
      double r = std::min(he.value, 1.0 - he.value);
      if (r < range_min) {
        range_min = r;
        w_range.record(z, 0.0);
      }
    }
    report.entries.push_back(
        make_entry("h_flat_window", 1e-12 - w_flat.value, w_flat));
    report.entries.push_back(
        make_entry("h_saturation", 1e-12 - w_sat.value, w_sat));
    report.entries.push_back(make_entry("h_range", range_min, w_range));
  }

  // Analytic partials against central finite differences.
  {
    std::mt19937_64 rng(grid.seed);
    std::uniform_real_distribution<double> uz(-z_max, z_max);
    std::uniform_real_distribution<double> ulog(std::log(0.05),
                                                std::log(4.0 * pc.t_star()));
    const double hstep = grid.fd_step;
    Worst w_fd;
    for (int i = 0; i < grid.fd_points; ++i) {
      double z = uz(rng);
      double t = std::exp(ulog(rng));
      FEval fe = profiles.f(z, t);
      double fd_t =
          (profiles.f(z, t + hstep).value - profiles.f(z, t - hstep).value) /
          (2 * hstep);
      double fd_z =
          (profiles.f(z + hstep, t).value - profiles.f(z - hstep, t).value) /
          (2 * hstep);
      double et = std::abs(fe.df_dt - fd_t) /
                  std::max({1.0, std::abs(fe.df_dt), std::abs(fd_t)});
      double ez = std::abs(fe.df_dz - fd_z) /
                  std::max({1.0, std::abs(fe.df_dz), std::abs(fd_z)});
      w_fd.take_max(et, z, t);
      w_fd.take_max(ez, z, t);

      GEval ge = profiles.g(t);
      double fd_g =
          (profiles.g(t + hstep).value - profiles.g(t - hstep).value) /
          (2 * hstep);
      w_fd.take_max(std::abs(ge.dg_dt - fd_g) /
                        std::max({1.0, std::abs(ge.dg_dt), std::abs(fd_g)}),
                    0.0, t);

      HEval he = profiles.h(z);
      double fd_h =
          (profiles.h(z + hstep).value - profiles.h(z - hstep).value) /
          (2 * hstep);
      w_fd.take_max(std::abs(he.dh_dz - fd_h) /
                        std::max({1.0, std::abs(he.dh_dz), std::abs(fd_h)}),
                    z, 0.0);
    }
    report.entries.push_back(
        make_entry("fd_consistency", 1e-6 - w_fd.value, w_fd));
  }

  report.pass = true;
  for (const auto& e : report.entries) report.pass = report.pass && e.pass;
  return report;
}

}  // namespace reeb
