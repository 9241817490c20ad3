#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace reeb {

// Constants shared by the three scalar profiles. `s` is the rotation weight
// of the invariant torus; it should be (a floating approximation of) an
// irrational number, by default the golden-ratio conjugate.
struct ProfileConstants {
  double s = 0.6180339887498949;  // (sqrt(5)-1)/2
  double c = 8.0;                 // growth constant, must exceed 2/s
  double delta_g = 0.05;          // half-width of the log window of g
  double z_flat = 1.0;            // h == 0 on [-z_flat, z_flat]
  double z_full = 2.0;            // h == 1 for |z| >= z_full

  // Throws std::invalid_argument on violation.
  void validate(double g_window_center) const;

  // f exceeds log(c) for all t >= t_star(), uniformly in z.
  double t_star() const { return c * c * c * c; }
  // The radial extent of the support box: r >= support_radius() forces the
  // radial profile above the cutoff, so the assembled field is trivial there.
  double support_radius() const { return c * c; }
};

struct FEval {
  double value;
  double df_dt;
  double df_dz;
};

struct GEval {
  double value;
  double dg_dt;
};

struct HEval {
  double value;
  double dh_dz;
};

// Evaluators for the profile triple (f, g, h) with first partials.
// Implementations must be pure after construction; they are shared freely
// across threads.
class ProfileFamily {
 public:
  virtual ~ProfileFamily() = default;
  virtual FEval f(double z, double t) const = 0;
  virtual GEval g(double t) const = 0;
  virtual HEval h(double z) const = 0;
  virtual const ProfileConstants& constants() const = 0;
  // Center of the mandated log window of g.
  virtual double g_center() const = 0;
};

// The concrete construction:
//   f(z,t)  = Int_1^t tau(u) (1 - d(z,u)) / u du,
//             d(z,u) = q/(2(1+q)), q = (u-1)^2 + z^2,
//             tau a quintic smoothstep, 0 on [0,1/4], 1 on [3/4,inf).
//   g(t)    = log t up to a solved knot region, then g' = kappa(t)/t with a
//             smoothstep cutoff kappa shot so that g reaches 0 strictly
//             before s*c/2 and stays 0.
//   h(z)    = septic smoothstep ramp from 0 on [-z_flat, z_flat] to 1 at
//             |z| >= z_full, mirrored in z.
//
// Guarantees (each audited by verify_profiles):
//   f(z,1) = 0;  t f_t <= 1 with equality only at (z,t) = (0,1);
//   f >= (1/2) log t for t >= 1, so f > log c for t >= c^4;
//   f finite and C^2 at t = 0;
//   g monotone, g = log t on the mandated window, g' <= 1/t, g = 0 past the
//   knot;  h in [0,1] with exact flat window and saturation.
class ReferenceProfiles final : public ProfileFamily {
 public:
  explicit ReferenceProfiles(ProfileConstants constants = {},
                             double g_window_center = -1.0);

  FEval f(double z, double t) const override;
  GEval g(double t) const override;
  HEval h(double z) const override;
  const ProfileConstants& constants() const override { return constants_; }
  double g_center() const override { return g_center_; }

  // Knot data of the g construction, exposed for tests.
  double g_ramp_start() const { return g_m_; }
  double g_knot() const { return g_m_ + g_w_; }

 private:
  double kappa(double t) const;

  ProfileConstants constants_;
  double g_center_;  // center of the log window, (1+s)/2 for n = 2
  double g_m_ = 0.0;  // log branch extends to here
  double g_w_ = 0.0;  // width of the kappa ramp; knot = m + w
};

// One audited inequality/equality: worst margin and where it occurred.
struct ConstraintEntry {
  std::string name;
  double margin = 0.0;     // signed; >= 0 means satisfied
  double worst_z = 0.0;
  double worst_t = 0.0;
  bool pass = false;
};

struct ConstraintReport {
  std::vector<ConstraintEntry> entries;
  // Location of the grid maximum of t*df/dt (should hug (z,t) = (0,1)).
  double slope_peak_z = 0.0;
  double slope_peak_t = 0.0;
  double slope_peak_value = 0.0;
  // Grid spacing near the peak, for "within one cell" assertions.
  double cell_z = 0.0;
  double cell_t = 0.0;
  long samples = 0;
  bool pass = false;

  const ConstraintEntry* find(const std::string& name) const;
};

struct ProfileGridSpec {
  int nz = 200;
  int nt = 200;
  int fd_points = 1000;       // random derivative cross-checks
  double fd_step = 1e-5;
  std::uint64_t seed = 20260809;
};

// Numerical audit of every profile constraint on a graded grid covering
// z in [-(z_full+2), z_full+2] and t in [0, 4 t_star]. Failures are report
// entries, never exceptions.
ConstraintReport verify_profiles(const ProfileFamily& profiles,
                                 const ProfileGridSpec& grid = {});

}  // namespace reeb
