#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "reeb/contact.hpp"

namespace reeb {

class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual int dim() const = 0;
  virtual void eval(const double* y, double* dydt) const = 0;
};

// Full flow dp/dt = X(p) on (x_1,y_1,...,x_n,y_n,z).
class ReebField final : public VectorField {
 public:
  explicit ReebField(std::shared_ptr<const ReebSystem> sys)
      : sys_(std::move(sys)) {}
  int dim() const override { return sys_->dim(); }
  void eval(const double* y, double* dydt) const override {
    sys_->x_field(y, dydt);
  }
  const ReebSystem& system() const { return *sys_; }

 private:
  std::shared_ptr<const ReebSystem> sys_;
};

// Symmetry-reduced flow on (r_1,...,r_n, z, th_1,...,th_n):
//   dr_j/dt = r_j Hz / 2,  dz/dt = H - sum_j u_j Hu_j,  dth_j/dt = 2 Hu_j.
// The angles ride along as passengers.
class ReducedReebField final : public VectorField {
 public:
  explicit ReducedReebField(std::shared_ptr<const Hamiltonian> ham)
      : ham_(std::move(ham)) {}
  int dim() const override { return 2 * ham_->pairs() + 1; }
  void eval(const double* y, double* dydt) const override;
  const Hamiltonian& hamiltonian() const { return *ham_; }

  // (x_1,y_1,...,z) -> (r_1,...,r_n, z, th_1,...,th_n).
  static void reduce_state(const double* full, int pairs, double* reduced);

 private:
  std::shared_ptr<const Hamiltonian> ham_;
};

enum class Direction { forward, backward };

struct IntegrateOptions {
  double rtol = 1e-9;
  double atol = 1e-9;
  double h_init = 1e-2;
  double h_max = 1.0;
  long max_steps = 50000000;
};

// Region in which the field is exactly d/dz and a ray in the travel
// direction stays there, so the flow continues as a translation.
struct EscapeSpec {
  enum class Layout { full, reduced };
  Layout layout = Layout::full;
  int pairs = 2;
  double r_star = 0.0;
  double z_abs = 0.0;
  double margin = 1e-9;

  int z_index() const {
    return layout == Layout::full ? 2 * pairs : pairs;
  }
  bool escaped(const double* y, double dir_sign) const;

  static EscapeSpec for_full(const Hamiltonian& ham);
  static EscapeSpec for_reduced(const Hamiltonian& ham);
};

// Adaptive Dormand-Prince 5(4) stepper with the classic quartic dense
// output. Drives one trajectory; not shareable across threads.
class Dopri5 {
 public:
  Dopri5(const VectorField& field, const IntegrateOptions& opts,
         double dir_sign);

  void init(double t0, const double* y0);
  // Take one accepted step, never moving past t_limit. Returns false when
  // already there. Throws on step-size underflow or step-count overflow.
  bool advance(double t_limit);

  double t() const { return t_; }
  double t_prev() const { return t_prev_; }
  const std::vector<double>& y() const { return y_; }
  const std::vector<double>& y_prev() const { return y_prev_; }
  const std::vector<double>& deriv_begin() const { return k_[0]; }
  const std::vector<double>& deriv_end() const { return k_[6]; }
  double h_last() const { return h_last_; }
  double err_last() const { return err_last_; }
  long accepted() const { return accepted_; }
  long rejected() const { return rejected_; }

  // Interpolate the last accepted step at t_query in [t_prev, t].
  void dense(double t_query, double* out) const;

 private:
  const VectorField& f_;
  IntegrateOptions opts_;
  double sign_;
  int n_;
  double t_ = 0.0, t_prev_ = 0.0;
  double h_abs_ = 0.0, h_last_ = 0.0, err_last_ = 0.0;
  long accepted_ = 0, rejected_ = 0;
  bool fsal_valid_ = false;
  std::vector<double> y_, y_prev_, y_stage_, err_vec_;
  std::vector<double> k_[7];
  std::vector<double> rcont_[5];
};

struct Sample {
  double t = 0.0;
  std::vector<double> y;
};

enum class Termination { reached_end, escaped_analytic, max_steps };

struct Trajectory {
  Direction direction = Direction::forward;
  std::vector<Sample> samples;
  Termination termination = Termination::reached_end;
  long accepted = 0;
  long rejected = 0;
  double h_min = 0.0;
  double h_max_used = 0.0;
  double max_err = 0.0;
  std::optional<Sample> escape_point;

  const Sample& front() const { return samples.front(); }
  const Sample& back() const { return samples.back(); }
};

// Integrate for |t_span| time units in the given direction. When `escape`
// is supplied and the state enters the trivial region heading outward, the
// remaining time is applied as an exact z-translation.
Trajectory integrate(const VectorField& field, std::span<const double> y0,
                     double t_span, Direction dir,
                     const IntegrateOptions& opts = {},
                     const EscapeSpec* escape = nullptr,
                     double record_stride = 0.0);

// Fixed-step classical RK4, kept as an independent cross-check path.
void rk4_integrate(const VectorField& field, std::span<const double> y0,
                   double t_span, long n_steps, std::span<double> y_end);

double torus_distance_state(const double* y, int pairs);

struct ClassifySpec {
  double horizon = 200.0;
  double box_half = 4.0;
  double eps_torus = 1e-6;
  double z_full = 2.0;
  IntegrateOptions opts;
};

struct OrbitEvidence {
  double fwd_final_z = 0.0, bwd_final_z = 0.0;
  double fwd_max_torus_dist = 0.0, bwd_max_torus_dist = 0.0;
  std::optional<double> fwd_exit_time, bwd_exit_time;
  double fwd_exit_z = 0.0, bwd_exit_z = 0.0;
};

struct OrbitVerdict {
  enum class Class {
    on_torus,
    forward_trapped,
    backward_trapped,
    bi_escaping,
    inconclusive
  };
  Class cls = Class::inconclusive;
  bool horizon_limited = false;
  OrbitEvidence evidence;
  const char* name() const;
};

OrbitVerdict classify_orbit(const VectorField& field,
                            std::span<const double> start,
                            const ClassifySpec& spec,
                            const EscapeSpec* escape = nullptr);

struct RotationSpec {
  double eps_torus = 1e-6;
  IntegrateOptions opts{1e-10, 1e-10, 1e-2, 1.0, 50000000};
};

struct RotationEstimate {
  double rho = 0.0;
  long revolutions = 0;
  double error_bound = 0.0;  // 2 / revolutions
  double max_torus_drift = 0.0;
  double t_final = 0.0;
};

// Winding ratio theta_2 / theta_1 after the given number of full theta_1
// revolutions, starting within eps_torus of the torus. Throws if the orbit
// drifts beyond 10 * eps_torus (integrator or field defect).
RotationEstimate rotation_number(const VectorField& field,
                                 std::span<const double> start,
                                 long revolutions,
                                 const RotationSpec& spec = {});

struct ScanSpec {
  double box_half = 4.0;
  int per_axis = 4;  // grid starts per axis; total = per_axis^dim
  double horizon = 200.0;
  double return_tol = 1e-4;
  double t_min = 0.5;
  double tube_radius = 0.1;
  // Once z has gained this much the orbit can never return (z is monotone
  // for the real field); 0 disables the shortcut (needed for test doubles).
  double z_gain_stop = 1e-3;
  int jobs = 0;
  IntegrateOptions opts;
};

struct Recurrence {
  std::size_t start_index = 0;
  double t = 0.0;
  double distance = 0.0;
  std::vector<double> start;
  bool on_torus_quasi_periodic = false;
};

struct ScanResult {
  std::vector<Recurrence> recurrences;    // off-torus; expected empty
  std::vector<Recurrence> torus_returns;  // quasi-periodic near-returns
  double min_z_gain = 0.0;                // over off-torus starts
  std::size_t starts = 0;
  std::size_t skipped_in_tube = 0;
  double horizon = 0.0, return_tol = 0.0, tube_radius = 0.0;
};

// Forward-integrate a grid of starts and record any close return of the
// full state. Distance minima are located by a derivative sign change of
// |p(t) - p(0)|^2 refined on dense output.
ScanResult scan_periodic(const VectorField& field, const ScanSpec& spec,
                         const EscapeSpec* escape = nullptr);

struct SweepSpec {
  double z0 = 3.0;
  double rho_min = 1.0;
  double rho_max = 3.0;
  int steps = 21;
  double horizon = 200.0;
  int jobs = 0;
  IntegrateOptions opts;
};

struct SweepRow {
  double rho = 0.0;
  bool crossed = false;
  double crossing_time = 0.0;  // valid when crossed
  double final_z = 0.0;
  double final_r1 = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double z0 = 0.0, horizon = 0.0;
};

// Launch orbits from the hyperplane z = -z0 at radii r_1 = r_2 = rho and
// report the time at which each reaches z > 0, if it does.
SweepResult hyperplane_sweep(const VectorField& field, const SweepSpec& spec);

// Radius on the launch plane whose orbit is forward-asymptotic to the
// torus, found by bisection on which side of the torus the orbit passes.
double critical_radius(const VectorField& field, int pairs, double z0,
                       double lo, double hi, double horizon = 400.0,
                       int iters = 48,
                       const IntegrateOptions& opts = {});

}  // namespace reeb
