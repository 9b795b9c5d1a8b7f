#pragma once

#include <iosfwd>
#include <vector>

#include "kvstring/mesh.hpp"
#include "kvstring/model.hpp"
#include "kvstring/tridiagonal.hpp"

namespace kvstring {

// Displacement/velocity coefficient pair on the interior nodes.
struct State {
  std::vector<double> u;
  std::vector<double> v;
};

// Discrete mass, stiffness and damping operators on the interior degrees of
// freedom (Dirichlet rows and columns eliminated). M and K are SPD, D is PSD
// and supported on the damped half only.
struct SystemMatrices {
  SymTridiagonal mass;
  SymTridiagonal stiffness;
  SymTridiagonal damping;
  std::size_t n_dof = 0;
  int n_elements = 0;
  double alpha = 0.0;
  double grading = 1.0;

  // Largest frequency the mesh resolves; scans must stay below it.
  double omega_cap(double divisor = 10.0) const {
    return static_cast<double>(n_elements) / divisor;
  }
};

// Closed-form integral of the damping coefficient over [a,b] (zero where the
// coefficient vanishes, power rule elsewhere). Exact, no quadrature error.
double element_damping_integral(double a, double b, double alpha);

// Piecewise-linear conforming assembly:
//   K_ij = int phi_i' phi_j',  M_ij = int phi_i phi_j,  D_ij = int b phi_i' phi_j'.
// phi' is constant per element, so D uses element_damping_integral exactly.
SystemMatrices assemble(const Mesh& mesh, const DampingProfile& profile);

// A(u,v) = (v, w) with M w = -(K u + D v).
State apply_generator(const SystemMatrices& matrices, const State& state);

// u^T K u + v^T M v, the squared energy norm.
double energy(const SystemMatrices& matrices, const State& state);

// Text dump: header "# n_dof=<n>", then one "row col value" line per nonzero.
void write_matrix_dump(std::ostream& out, const SymTridiagonal& matrix);

}  // namespace kvstring
