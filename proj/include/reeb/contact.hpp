#pragma once

#include <array>
#include <memory>
#include <vector>

#include "reeb/hamiltonian.hpp"

namespace reeb {

// Standard contact form alpha_st = dz + (1/2) sum_j (x_j dy_j - y_j dx_j)
// paired with a tangent vector v at p. Layout (x_1,y_1,...,x_n,y_n,z).
double alpha_st(const double* p, const double* v, int pairs);

// Exterior derivative d(alpha_st) = sum_j dx_j ^ dy_j on two tangent vectors.
double dalpha_st(const double* v, const double* w, int pairs);

// The 2n frame vectors spanning ker(alpha_st):
//   e_j = d/dx_j + (y_j/2) d/dz,   f_j = d/dy_j - (x_j/2) d/dz.
// Writes 2n vectors of dimension 2n+1 into `out` (row-major).
void contact_frame(const double* p, int pairs, std::vector<double>& out);

// Sample of the assembled field at one point, with the quantities the
// audits care about.
struct FieldSample {
  int pairs = 2;
  std::array<double, kMaxDim> point{};
  std::array<double, kMaxDim> X{};
  double H = 0.0;
  double dzX = 0.0;           // z-component as assembled
  double dzX_identity = 0.0;  // H - (1/2) sum (x Hx + y Hy)
  double res_alpha = 0.0;     // |alpha_st(X)/H - 1|
  double res_dalpha = 0.0;    // max_b |d(alpha_st/H)(X, b)| over the frame
};

// The contact vector field X = H d/dz + Y of a Hamiltonian H, where Y is the
// unique xi_st-tangent field with i_Y d(alpha_st) = dH(d/dz) alpha_st - dH.
// X is the Reeb vector field of alpha_st / H.
class ReebSystem {
 public:
  explicit ReebSystem(std::shared_ptr<const Hamiltonian> ham)
      : ham_(std::move(ham)) {}

  const Hamiltonian& hamiltonian() const { return *ham_; }
  int pairs() const { return ham_->pairs(); }
  int dim() const { return ham_->dim(); }

  // In components:
  //   dx_j/dt = x_j Hz/2 - Hy_j
  //   dy_j/dt = y_j Hz/2 + Hx_j
  //   dz/dt   = H - (1/2) sum_j (x_j Hx_j + y_j Hy_j)
  void x_field(const double* p, double* out) const;

  // Y = X - H d/dz given a precomputed gradient.
  void y_field(const double* p, const HGradient& grad, double* out) const;

  // Residuals of the defining Reeb equations for alpha_st/H, evaluated
  // literally (quotient rule for d(alpha/H), no algebraic shortcuts).
  std::pair<double, double> reeb_residuals(const double* p) const;

  FieldSample sample(const double* p) const;

 private:
  std::shared_ptr<const Hamiltonian> ham_;
};

}  // namespace reeb
