#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "kvstring/assembly.hpp"
#include "kvstring/resolvent.hpp"

// Independent recomputation paths used to certify the fast implementations.
// Everything here is dense and deliberately avoids the tridiagonal solvers,
// the Lanczos iteration and the midpoint stepper that it checks.
namespace kvstring::oracles {

Eigen::MatrixXd dense_matrix(const SymTridiagonal& t);

Eigen::VectorXd pack_state(const State& state);
State unpack_state(const Eigen::VectorXd& x);

// Energy as a dense quadratic form.
double dense_energy(const SystemMatrices& matrices, const State& state);

// Smallest energy-norm singular value of (i omega I - A) via a dense SVD of
// the Cholesky-weighted matrix.
double dense_sigma_min(const SystemMatrices& matrices, double omega);

// Dense LU solve of the full 2n x 2n system (i omega I - A) U = F.
CState dense_resolvent_solve(const SystemMatrices& matrices, double omega, const CState& rhs);

// exp(C dt) for the first-order companion matrix C; advancing a packed state
// by repeated multiplication gives the exact trajectory of the semidiscrete
// system up to the matrix-exponential accuracy.
Eigen::MatrixXd expm_propagator(const SystemMatrices& matrices, double dt);

// Adaptive Simpson integration (recursive bisection to a relative tolerance).
double adaptive_integral(const std::function<double(double)>& f, double a, double b,
                         double rel_tol = 1e-13, int max_depth = 60);

// Damping matrix assembled with adaptive quadrature instead of the power rule.
SymTridiagonal adaptive_damping_matrix(const Mesh& mesh, const DampingProfile& profile);

// Frequencies sqrt(eig(K, M)) of the undamped pencil, ascending.
std::vector<double> undamped_frequencies(const SystemMatrices& matrices);

}  // namespace kvstring::oracles
