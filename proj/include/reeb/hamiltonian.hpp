#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "reeb/profiles.hpp"

namespace reeb {

// Number of (x_j, y_j) pairs supported without allocation in the hot path.
inline constexpr int kMaxPairs = 8;
inline constexpr int kMaxDim = 2 * kMaxPairs + 1;

// State layout used throughout: (x_1, y_1, ..., x_n, y_n, z).
inline int state_dim(int pairs) { return 2 * pairs + 1; }

struct H0Eval {
  double value = 0.0;
  std::array<double, kMaxPairs> du{};
  double dz = 0.0;
};

// Gradient of H in radial coordinates (u_j = r_j^2, z).
struct RadialHGradient {
  double H = 0.0;
  double Hz = 0.0;
  std::array<double, kMaxPairs> Hu{};
};

// Full Cartesian gradient plus the radial form used to derive it.
struct HGradient {
  double H = 0.0;
  double Hz = 0.0;
  std::array<double, kMaxPairs> Hu{};
  std::array<double, kMaxPairs> Hx{};
  std::array<double, kMaxPairs> Hy{};
};

// The rotationally symmetric Hamiltonian
//   H0 = sum_j (w_j/2) exp(f_z(u_j)),   H1 = exp(g(H0)),
//   H  = (1 - h(z)) H1 + h(z),
// built over a ProfileFamily. Pure after construction; safe to share
// between threads.
class Hamiltonian {
 public:
  Hamiltonian(std::shared_ptr<const ProfileFamily> profiles, int pairs = 2);

  int pairs() const { return pairs_; }
  int dim() const { return state_dim(pairs_); }
  const std::vector<double>& weights() const { return weights_; }
  // Value of H on the invariant torus: (sum_j w_j)/2.
  double torus_level() const { return torus_level_; }
  const ProfileFamily& profiles() const { return *profiles_; }

  // Default torus weights: w_1 = 1, w_2 = s, then s^{j-1}/2^{j-2} so the sum
  // stays below 2 while all pairwise ratios remain irrational.
  static std::vector<double> default_weights(int pairs, double s);

  H0Eval eval_H0(const double* u, double z) const;
  void eval_radial(const double* u, double z, RadialHGradient& out) const;
  void eval(const double* point, HGradient& out) const;

  double value(const double* point) const;
  // dz(X) = H - sum_j u_j dH/du_j, the z-component of the assembled field.
  double dzX(const double* point) const;
  double dzX_radial(const double* radii, double z) const;

  // Geometry of the region where the construction is exactly trivial
  // (H == 1 and grad H == 0): any r_j >= support_radius() or
  // |z| >= z_support().
  double support_radius() const { return profiles_->constants().support_radius(); }
  double z_support() const { return profiles_->constants().z_full; }
  bool in_trivial_region(const double* point) const;

  // max(|r_1 - 1|, ..., |r_n - 1|, |z|): distance to the torus in the
  // product metric.
  double torus_distance(const double* point) const;
  double torus_distance_radial(const double* radii, double z) const;

 private:
  std::shared_ptr<const ProfileFamily> profiles_;
  int pairs_;
  std::vector<double> weights_;
  double torus_level_;
};

struct HCheckSpec {
  int torus_samples = 1000;
  int cylinder_samples = 1000;
  int outside_samples = 1000;
  int volume_samples = 100000;
  std::vector<double> tube_radii = {0.3, 0.1, 0.03, 0.01};
  std::uint64_t seed = 20260809;
  int jobs = 0;  // 0: hardware default
};

struct HReport {
  // Worst deviation of the six torus gradient identities
  // H = level, Hx_j = w_j x_j, Hy_j = w_j y_j, Hz = 0.
  double torus_identity_dev = 0.0;
  // max |H - level| on the cylinder r = 1, |z| <= z_flat.
  double cylinder_dev = 0.0;
  // max |H - 1| outside the support box; gradient magnitude there.
  double outside_dev = 0.0;
  double outside_grad = 0.0;
  // Minimum of dz(X) outside tubes of decreasing radius around the torus.
  std::vector<std::pair<double, double>> zdrift_min_by_tube;
  // |dz(X)| sampled on the torus itself (equality case).
  double torus_zdrift = 0.0;
  // Self-describing support box.
  double support_radius = 0.0;
  double z_support = 0.0;
  long samples = 0;
  bool pass = false;
};

// Sampled audit of the structural properties of H. Failures are report
// entries, not exceptions.
HReport check_H_conditions(const Hamiltonian& ham, const HCheckSpec& spec = {});

}  // namespace reeb
