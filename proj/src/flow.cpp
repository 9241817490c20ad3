#include "reeb/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "reeb/util.hpp"

namespace reeb {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                 a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Coefficients of the quartic continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

double nrm2(const double* v, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

}  // namespace

void ReducedReebField::eval(const double* y, double* dydt) const {
  const int n = ham_->pairs();
  double u[kMaxPairs];
  for (int j = 0; j < n; ++j) u[j] = y[j] * y[j];
  RadialHGradient g;
  ham_->eval_radial(u, y[n], g);
  double drag = 0.0;
  for (int j = 0; j < n; ++j) {
    dydt[j] = 0.5 * y[j] * g.Hz;
    dydt[n + 1 + j] = 2.0 * g.Hu[j];
    drag += u[j] * g.Hu[j];
  }
  dydt[n] = g.H - drag;
}

void ReducedReebField::reduce_state(const double* full, int pairs,
                                    double* reduced) {
  for (int j = 0; j < pairs; ++j) {
    reduced[j] = std::hypot(full[2 * j], full[2 * j + 1]);
    reduced[pairs + 1 + j] = std::atan2(full[2 * j + 1], full[2 * j]);
  }
  reduced[pairs] = full[2 * pairs];
}

bool EscapeSpec::escaped(const double* y, double dir_sign) const {
  const double zv = y[z_index()];
  if (dir_sign > 0 ? zv >= z_abs + margin : zv <= -(z_abs + margin))
    return true;
  const double rs = r_star + margin;
  if (layout == Layout::full) {
    const double rs2 = rs * rs;
    for (int j = 0; j < pairs; ++j) {
      double x = y[2 * j], yy = y[2 * j + 1];
      if (x * x + yy * yy >= rs2) return true;
    }
  } else {
    for (int j = 0; j < pairs; ++j)
      if (y[j] >= rs) return true;
  }
  return false;
}

EscapeSpec EscapeSpec::for_full(const Hamiltonian& ham) {
  return {Layout::full, ham.pairs(), ham.support_radius(), ham.z_support(),
          1e-9};
}

EscapeSpec EscapeSpec::for_reduced(const Hamiltonian& ham) {
  return {Layout::reduced, ham.pairs(), ham.support_radius(), ham.z_support(),
          1e-9};
}

Dopri5::Dopri5(const VectorField& field, const IntegrateOptions& opts,
               double dir_sign)
    : f_(field), opts_(opts), sign_(dir_sign >= 0 ? 1.0 : -1.0),
      n_(field.dim()) {
  y_.resize(n_);
  y_prev_.resize(n_);
  y_stage_.resize(n_);
  err_vec_.resize(n_);
  for (auto& k : k_) k.resize(n_);
  for (auto& r : rcont_) r.resize(n_);
}

void Dopri5::init(double t0, const double* y0) {
  t_ = t_prev_ = t0;
  std::copy(y0, y0 + n_, y_.begin());
  std::copy(y0, y0 + n_, y_prev_.begin());
  h_abs_ = std::min(std::abs(opts_.h_init), opts_.h_max);
  fsal_valid_ = false;
  accepted_ = rejected_ = 0;
}

bool Dopri5::advance(double t_limit) {
  if (t_ == t_limit) return false;
  if (sign_ * (t_limit - t_) < 0)
    throw std::logic_error("dopri5: t_limit behind current time");

  if (!fsal_valid_) {
    f_.eval(y_.data(), k_[0].data());
    fsal_valid_ = true;
  }

  for (;;) {
    if (accepted_ + rejected_ >= opts_.max_steps)
      throw std::runtime_error("dopri5: step budget exhausted");

    double h = sign_ * h_abs_;
    bool clipped = false;
    if (sign_ * (t_ + h - t_limit) >= 0) {
      h = t_limit - t_;
      clipped = true;
    }

    const double* k1 = k_[0].data();
    auto stage = [&](int ki, auto&&... terms) {
      double* ys = y_stage_.data();
      for (int i = 0; i < n_; ++i) {
        double acc = 0.0;
        ((acc += terms.first * terms.second[i]), ...);
        ys[i] = y_[i] + h * acc;
      }
      f_.eval(ys, k_[ki].data());
    };
    using P = std::pair<double, const double*>;
    stage(1, P{a21, k1});
    stage(2, P{a31, k1}, P{a32, k_[1].data()});
    stage(3, P{a41, k1}, P{a42, k_[1].data()}, P{a43, k_[2].data()});
    stage(4, P{a51, k1}, P{a52, k_[1].data()}, P{a53, k_[2].data()},
          P{a54, k_[3].data()});
    stage(5, P{a61, k1}, P{a62, k_[1].data()}, P{a63, k_[2].data()},
          P{a64, k_[3].data()}, P{a65, k_[4].data()});

    // 5th-order solution (b row); k7 = f(y_new) provides FSAL.
    for (int i = 0; i < n_; ++i)
      y_stage_[i] = y_[i] + h * (b1 * k1[i] + b3 * k_[2][i] + b4 * k_[3][i] +
                                 b5 * k_[4][i] + b6 * k_[5][i]);
    f_.eval(y_stage_.data(), k_[6].data());

    double err = 0.0;
    for (int i = 0; i < n_; ++i) {
      err_vec_[i] = h * (e1 * k1[i] + e3 * k_[2][i] + e4 * k_[3][i] +
                         e5 * k_[4][i] + e6 * k_[5][i] + e7 * k_[6][i]);
      double sc = opts_.atol +
                  opts_.rtol * std::max(std::abs(y_[i]), std::abs(y_stage_[i]));
      double q = err_vec_[i] / sc;
      err += q * q;
    }
    err = std::sqrt(err / n_);
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      ++accepted_;
      t_prev_ = t_;
      y_prev_.swap(y_);
      // y_stage_ holds y_new
      y_.swap(y_stage_);
      t_ = clipped ? t_limit : t_ + h;
      h_last_ = h;
      err_last_ = err;

      // Continuous extension over [t_prev, t].
      for (int i = 0; i < n_; ++i) {
        double dy = y_[i] - y_prev_[i];
        rcont_[0][i] = y_prev_[i];
        rcont_[1][i] = dy;
        rcont_[2][i] = h * k1[i] - dy;
        rcont_[3][i] = dy - h * k_[6][i] - rcont_[2][i];
        rcont_[4][i] = h * (d1 * k1[i] + d3 * k_[2][i] + d4 * k_[3][i] +
                            d5 * k_[4][i] + d6 * k_[5][i] + d7 * k_[6][i]);
      }
      k_[0].swap(k_[6]);  // FSAL

      double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 10.0;
      h_abs_ = std::min(opts_.h_max, h_abs_ * std::clamp(fac, 0.2, 10.0));
      return true;
    }

    ++rejected_;
    double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
    h_abs_ = std::abs(h) * fac;
    if (h_abs_ < 1e-14 * std::max(1.0, std::abs(t_))) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "dopri5: step size underflow at t=%.17g (|h|=%.3g); the "
                    "field should be smooth here",
                    t_, h_abs_);
      throw std::runtime_error(buf);
    }
  }
}

void Dopri5::dense(double t_query, double* out) const {
  const double h = t_ - t_prev_;
  const double th = h != 0.0 ? (t_query - t_prev_) / h : 0.0;
  const double th1 = 1.0 - th;
  for (int i = 0; i < n_; ++i) {
    out[i] = rcont_[0][i] +
             th * (rcont_[1][i] +
                   th1 * (rcont_[2][i] +
                          th * (rcont_[3][i] + th1 * rcont_[4][i])));
  }
}

Trajectory integrate(const VectorField& field, std::span<const double> y0,
                     double t_span, Direction dir,
                     const IntegrateOptions& opts, const EscapeSpec* escape,
                     double record_stride) {
  const int n = field.dim();
  const double sign = dir == Direction::forward ? 1.0 : -1.0;
  const double t_end = sign * t_span;

  Trajectory traj;
  traj.direction = dir;
  traj.h_min = std::numeric_limits<double>::infinity();
  traj.samples.push_back({0.0, {y0.begin(), y0.end()}});

  Dopri5 st(field, opts, sign);
  st.init(0.0, y0.data());
  double next_record = record_stride > 0 ? sign * record_stride : 0.0;

  while (st.t() != t_end) {
    st.advance(t_end);
    traj.h_min = std::min(traj.h_min, std::abs(st.h_last()));
    traj.h_max_used = std::max(traj.h_max_used, std::abs(st.h_last()));
    traj.max_err = std::max(traj.max_err, st.err_last());

    if (record_stride > 0) {
      std::vector<double> buf(n);
      while (sign * (st.t() - next_record) >= 0 &&
             sign * (t_end - next_record) > 0) {
        st.dense(next_record, buf.data());
        traj.samples.push_back({next_record, buf});
        next_record += sign * record_stride;
      }
      if (st.t() == t_end) traj.samples.push_back({st.t(), st.y()});
    } else {
      traj.samples.push_back({st.t(), st.y()});
    }

    if (escape && escape->escaped(st.y().data(), sign)) {
      traj.escape_point = Sample{st.t(), st.y()};
      if (st.t() != t_end) {
        Sample fin{t_end, st.y()};
        fin.y[escape->z_index()] += t_end - st.t();
        traj.samples.push_back(std::move(fin));
        traj.termination = Termination::escaped_analytic;
      }
      break;
    }
  }
  traj.accepted = st.accepted();
  traj.rejected = st.rejected();
  if (traj.samples.size() >= 2 &&
      traj.samples.back().t == traj.samples[traj.samples.size() - 2].t)
    traj.samples.pop_back();
  return traj;
}

void rk4_integrate(const VectorField& field, std::span<const double> y0,
                   double t_span, long n_steps, std::span<double> y_end) {
  const int n = field.dim();
  std::vector<double> y(y0.begin(), y0.end()), k1(n), k2(n), k3(n), k4(n),
      tmp(n);
  const double h = t_span / n_steps;
  for (long s = 0; s < n_steps; ++s) {
    field.eval(y.data(), k1.data());
    for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    field.eval(tmp.data(), k2.data());
    for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    field.eval(tmp.data(), k3.data());
    for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    field.eval(tmp.data(), k4.data());
    for (int i = 0; i < n; ++i)
      y[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  std::copy(y.begin(), y.end(), y_end.begin());
}

double torus_distance_state(const double* y, int pairs) {
  double d = std::abs(y[2 * pairs]);
  for (int j = 0; j < pairs; ++j)
    d = std::max(d, std::abs(std::hypot(y[2 * j], y[2 * j + 1]) - 1.0));
  return d;
}

const char* OrbitVerdict::name() const {
  switch (cls) {
    case Class::on_torus: return "on-torus";
    case Class::forward_trapped: return "forward-trapped";
    case Class::backward_trapped: return "backward-trapped";
    case Class::bi_escaping: return "bi-escaping";
    default: return "horizon-inconclusive";
  }
}

namespace {

struct LegResult {
  double final_z = 0.0;
  double max_torus_dist = 0.0;
  std::optional<double> exit_time;
  double exit_z = 0.0;
};

LegResult run_leg(const VectorField& field, std::span<const double> start,
                  double sign, const ClassifySpec& spec,
                  const EscapeSpec* escape) {
  const int n = field.dim();
  const int pairs = (n - 1) / 2;
  LegResult leg;
  Dopri5 st(field, spec.opts, sign);
  st.init(0.0, start.data());
  leg.max_torus_dist = torus_distance_state(start.data(), pairs);
  const double t_end = sign * spec.horizon;

  auto outside_box = [&](const double* y) {
    for (int i = 0; i < n; ++i)
      if (std::abs(y[i]) > spec.box_half) return true;
    return false;
  };

  while (st.t() != t_end) {
    st.advance(t_end);
    const double* y = st.y().data();
    leg.max_torus_dist =
        std::max(leg.max_torus_dist, torus_distance_state(y, pairs));
    leg.final_z = y[2 * pairs];
    if (outside_box(y)) {
      leg.exit_time = std::abs(st.t());
      leg.exit_z = y[2 * pairs];
      return leg;
    }
    if (escape && escape->escaped(y, sign)) {
      // The tail is an exact z-translation; the box exit time follows
      // analytically.
      double z = y[2 * pairs];
      double dt_to_exit = sign > 0 ? spec.box_half - z : z + spec.box_half;
      double t_exit = std::abs(st.t()) + std::max(0.0, dt_to_exit);
      if (t_exit <= spec.horizon) {
        leg.exit_time = t_exit;
        leg.exit_z = sign > 0 ? spec.box_half : -spec.box_half;
        leg.final_z = leg.exit_z;
      } else {
        leg.final_z = z + sign * (spec.horizon - std::abs(st.t()));
      }
      return leg;
    }
  }
  return leg;
}

}  // namespace

OrbitVerdict classify_orbit(const VectorField& field,
                            std::span<const double> start,
                            const ClassifySpec& spec,
                            const EscapeSpec* escape) {
  LegResult fwd = run_leg(field, start, +1.0, spec, escape);
  LegResult bwd = run_leg(field, start, -1.0, spec, escape);

  OrbitVerdict v;
  v.evidence.fwd_final_z = fwd.final_z;
  v.evidence.bwd_final_z = bwd.final_z;
  v.evidence.fwd_max_torus_dist = fwd.max_torus_dist;
  v.evidence.bwd_max_torus_dist = bwd.max_torus_dist;
  v.evidence.fwd_exit_time = fwd.exit_time;
  v.evidence.bwd_exit_time = bwd.exit_time;
  v.evidence.fwd_exit_z = fwd.exit_z;
  v.evidence.bwd_exit_z = bwd.exit_z;

  using C = OrbitVerdict::Class;
  if (!fwd.exit_time && !bwd.exit_time &&
      fwd.max_torus_dist < spec.eps_torus &&
      bwd.max_torus_dist < spec.eps_torus) {
    v.cls = C::on_torus;
  } else if (!fwd.exit_time && bwd.exit_time && bwd.exit_z < -spec.z_full) {
    v.cls = C::forward_trapped;
  } else if (!bwd.exit_time && fwd.exit_time && fwd.exit_z > spec.z_full) {
    v.cls = C::backward_trapped;
  } else if (fwd.exit_time && bwd.exit_time) {
    v.cls = C::bi_escaping;
  } else {
    v.cls = C::inconclusive;
    v.horizon_limited = true;
  }
  return v;
}

RotationEstimate rotation_number(const VectorField& field,
                                 std::span<const double> start,
                                 long revolutions, const RotationSpec& spec) {
  const int n = field.dim();
  const int pairs = (n - 1) / 2;
  const double two_pi = 2.0 * std::acos(-1.0);

  {
    double d0 = torus_distance_state(start.data(), pairs);
    if (d0 > spec.eps_torus)
      throw std::invalid_argument(
          "rotation_number: start is not on the torus");
  }

  Dopri5 st(field, spec.opts, +1.0);
  st.init(0.0, start.data());

  auto raw_angle = [](const double* y, int j) {
    return std::atan2(y[2 * j + 1], y[2 * j]);
  };
  auto wrap = [two_pi](double a) {
    while (a > 0.5 * two_pi) a -= two_pi;
    while (a < -0.5 * two_pi) a += two_pi;
    return a;
  };

  double raw1 = raw_angle(start.data(), 0), raw2 = raw_angle(start.data(), 1);
  double acc1 = 0.0, acc2 = 0.0;
  double max_drift = 0.0;
  const double target = two_pi * static_cast<double>(revolutions);
  // Generous time cap; the nominal pace is one revolution per 2*pi.
  const double t_limit =
      4.0 * two_pi * static_cast<double>(revolutions) + 100.0;

  while (true) {
    if (!st.advance(t_limit))
      throw std::runtime_error("rotation_number: revolution target not "
                               "reached within the time cap");
    const double* y = st.y().data();
    double drift = torus_distance_state(y, pairs);
    max_drift = std::max(max_drift, drift);
    if (drift > 10.0 * spec.eps_torus) {
      char buf[128];
      std::snprintf(buf, sizeof buf,
                    "rotation_number: orbit drifted %.3g from the torus at "
                    "t=%.6g",
                    drift, st.t());
      throw std::runtime_error(buf);
    }
    double nraw1 = raw_angle(y, 0), nraw2 = raw_angle(y, 1);
    double d1a = wrap(nraw1 - raw1), d2a = wrap(nraw2 - raw2);
    if (acc1 + d1a >= target) {
      // Locate the crossing of the revolution target inside this step.
      double lo = st.t_prev(), hi = st.t();
      std::vector<double> buf(n);
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        st.dense(mid, buf.data());
        double a_mid = acc1 + wrap(raw_angle(buf.data(), 0) - raw1);
        (a_mid < target ? lo : hi) = mid;
      }
      double t_star = 0.5 * (lo + hi);
      st.dense(t_star, buf.data());
      double a1 = acc1 + wrap(raw_angle(buf.data(), 0) - raw1);
      double a2 = acc2 + wrap(raw_angle(buf.data(), 1) - raw2);
      RotationEstimate est;
      est.rho = a2 / a1;
      est.revolutions = revolutions;
      est.error_bound = 2.0 / static_cast<double>(revolutions);
      est.max_torus_drift = max_drift;
      est.t_final = t_star;
      return est;
    }
    acc1 += d1a;
    acc2 += d2a;
    raw1 = nraw1;
    raw2 = nraw2;
  }
}

ScanResult scan_periodic(const VectorField& field, const ScanSpec& spec,
                         const EscapeSpec* escape) {
  const int n = field.dim();
  const int pairs = (n - 1) / 2;

  // Cell-centered lattice over the box.
  std::vector<std::vector<double>> starts;
  {
    long total = 1;
    for (int k = 0; k < n; ++k) total *= spec.per_axis;
    std::vector<double> p(n);
    for (long idx = 0; idx < total; ++idx) {
      long rem = idx;
      for (int k = 0; k < n; ++k) {
        int cell = rem % spec.per_axis;
        rem /= spec.per_axis;
        p[k] = -spec.box_half +
               (cell + 0.5) * (2.0 * spec.box_half / spec.per_axis);
      }
      starts.push_back(p);
    }
  }

  ScanResult res;
  res.horizon = spec.horizon;
  res.return_tol = spec.return_tol;
  res.tube_radius = spec.tube_radius;

  struct PerStart {
    bool skipped = false;
    bool on_torus = false;
    double z_gain = 0.0;
    std::vector<Recurrence> found;
  };
  std::vector<PerStart> slots(starts.size());

  auto run_start = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> buf(n), dbuf(n);
    for (std::size_t si = lo; si < hi; ++si) {
      const auto& y0 = starts[si];
      PerStart& slot = slots[si];
      double dist0 = torus_distance_state(y0.data(), pairs);
      if (spec.tube_radius > 0 && dist0 < spec.tube_radius) {
        slot.skipped = true;
        continue;
      }
      slot.on_torus = dist0 < 1e-6;

      Dopri5 st(field, spec.opts, +1.0);
      st.init(0.0, y0.data());
      double prev_D = 0.0;
      const double z0 = y0[2 * pairs];

      while (st.t() != spec.horizon) {
        st.advance(spec.horizon);
        const double* y = st.y().data();
        const double* yp = st.y_prev().data();

        double D = 0.0, d_end2 = 0.0, d_prev2 = 0.0;
        for (int i = 0; i < n; ++i) {
          double di = y[i] - y0[i];
          D += di * st.deriv_end()[i];
          d_end2 += di * di;
          double dp = yp[i] - y0[i];
          d_prev2 += dp * dp;
        }

        if (prev_D < 0.0 && D >= 0.0) {
          double vmax = std::max(nrm2(st.deriv_begin().data(), n),
                                 nrm2(st.deriv_end().data(), n));
          double gate = spec.return_tol + std::abs(st.h_last()) * vmax;
          if (std::min(std::sqrt(d_prev2), std::sqrt(d_end2)) <= gate) {
            double lo_t = st.t_prev(), hi_t = st.t();
            for (int it = 0; it < 60; ++it) {
              double mid = 0.5 * (lo_t + hi_t);
              st.dense(mid, buf.data());
              field.eval(buf.data(), dbuf.data());
              double g = 0.0;
              for (int i = 0; i < n; ++i)
                g += (buf[i] - y0[i]) * dbuf[i];
              (g < 0.0 ? lo_t : hi_t) = mid;
            }
            double t_star = 0.5 * (lo_t + hi_t);
            st.dense(t_star, buf.data());
            double dist = 0.0;
            for (int i = 0; i < n; ++i) {
              double di = buf[i] - y0[i];
              dist += di * di;
            }
            dist = std::sqrt(dist);
            if (t_star >= spec.t_min && dist < spec.return_tol) {
              Recurrence r;
              r.start_index = si;
              r.t = t_star;
              r.distance = dist;
              r.start = y0;
              r.on_torus_quasi_periodic = slot.on_torus;
              slot.found.push_back(std::move(r));
            }
          }
        }
        prev_D = D;

        slot.z_gain = y[2 * pairs] - z0;
        if (spec.z_gain_stop > 0 &&
            slot.z_gain > std::max(10.0 * spec.return_tol, spec.z_gain_stop))
          break;
        if (escape && escape->escaped(y, +1.0)) {
          slot.z_gain += spec.horizon - st.t();  // exact translation tail
          break;
        }
      }
    }
  };

  parallel_for(starts.size(), spec.jobs, run_start);

  res.min_z_gain = std::numeric_limits<double>::infinity();
  for (auto& slot : slots) {
    if (slot.skipped) {
      ++res.skipped_in_tube;
      continue;
    }
    ++res.starts;
    for (auto& r : slot.found)
      (r.on_torus_quasi_periodic ? res.torus_returns : res.recurrences)
          .push_back(r);
    if (!slot.on_torus) res.min_z_gain = std::min(res.min_z_gain, slot.z_gain);
  }
  return res;
}

SweepResult hyperplane_sweep(const VectorField& field, const SweepSpec& spec) {
  const int n = field.dim();
  const int pairs = (n - 1) / 2;
  SweepResult res;
  res.z0 = spec.z0;
  res.horizon = spec.horizon;
  res.rows.resize(spec.steps);

  auto run_rho = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> y0(n, 0.0), buf(n);
    for (std::size_t i = lo; i < hi; ++i) {
      double rho = spec.steps == 1
                       ? spec.rho_min
                       : spec.rho_min + (spec.rho_max - spec.rho_min) *
                                            double(i) / (spec.steps - 1);
      for (int j = 0; j < pairs; ++j) {
        y0[2 * j] = rho;
        y0[2 * j + 1] = 0.0;
      }
      y0[2 * pairs] = -spec.z0;

      SweepRow row;
      row.rho = rho;
      Dopri5 st(field, spec.opts, +1.0);
      st.init(0.0, y0.data());
      while (st.t() != spec.horizon) {
        st.advance(spec.horizon);
        if (st.y()[2 * pairs] >= 0.0) {
          double lo_t = st.t_prev(), hi_t = st.t();
          for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo_t + hi_t);
            st.dense(mid, buf.data());
            (buf[2 * pairs] < 0.0 ? lo_t : hi_t) = mid;
          }
          row.crossed = true;
          row.crossing_time = 0.5 * (lo_t + hi_t);
          break;
        }
      }
      row.final_z = st.y()[2 * pairs];
      row.final_r1 = std::hypot(st.y()[0], st.y()[1]);
      res.rows[i] = row;
    }
  };
  parallel_for(res.rows.size(), spec.jobs, run_rho);
  return res;
}

double critical_radius(const VectorField& field, int pairs, double z0,
                       double lo, double hi, double horizon, int iters,
                       const IntegrateOptions& opts) {
  const int n = 2 * pairs + 1;
  // Predicate: does the orbit pass the torus on the outside (r > 1)?
  auto passes_outside = [&](double rho) {
    std::vector<double> y0(n, 0.0);
    for (int j = 0; j < pairs; ++j) y0[2 * j] = rho;
    y0[2 * pairs] = -z0;
    Dopri5 st(field, opts, +1.0);
    st.init(0.0, y0.data());
    while (st.t() != horizon) {
      st.advance(horizon);
      if (st.y()[2 * pairs] >= 0.0) break;
    }
    return std::hypot(st.y()[0], st.y()[1]) > 1.0;
  };
  for (int i = 0; i < iters; ++i) {
    double mid = 0.5 * (lo + hi);
    (passes_outside(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace reeb
