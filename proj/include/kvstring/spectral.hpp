#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "kvstring/assembly.hpp"

namespace kvstring {

// Eigenvalues of the quadratic pencil lambda^2 M + lambda D + K together with
// spectral abscissa (max Re) and imaginary-axis gap (min |Re|). In shift-invert
// mode the fields describe the computed subset, not the full spectrum.
struct SpectrumResult {
  std::vector<Complex> eigenvalues;  // sorted by imaginary part
  double abscissa = 0.0;
  double axis_gap = 0.0;
  std::size_t n_dof = 0;
};

struct SpectrumOptions {
  bool use_shift_invert = false;
  std::vector<Complex> shifts;   // required in shift-invert mode
  int krylov_dim = 60;
  double residual_tol = 1e-8;    // pencil residual acceptance factor
  std::size_t dense_limit = 4096;  // largest 2*n_dof handled by the dense path
};

// Companion form A_lin = [[0, I], [-K, -D]], B_lin = [[I, 0], [0, M]];
// generalized eigenvalues of (A_lin, B_lin) are the pencil roots.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> linearize_pencil(const SystemMatrices& matrices);

// B_lin^{-1} A_lin = [[0, I], [-M^{-1}K, -M^{-1}D]].
Eigen::MatrixXd companion_matrix(const SystemMatrices& matrices);

// Every reported eigenvalue carries an inverse-iteration certificate:
// ||(l^2 M + l D + K) x|| <= tol * (|l|^2 ||M|| + |l| ||D|| + ||K||) ||x||.
// Values failing the certificate after polishing raise an error.
SpectrumResult compute_spectrum(const SystemMatrices& matrices, const SpectrumOptions& options = {});

struct BranchPoint {
  double alpha = 0.0;
  int k = 0;
  Complex eigenvalue;
};

// Follows the k_max lowest branches (smallest |Im|, Im > 0) across a list of
// exponents, matching by nearest neighbour; ambiguous matches are an error.
std::vector<BranchPoint> trace_branches(const std::vector<double>& alphas, int n_elements,
                                        int k_max, double grading = 1.0, unsigned threads = 0);

}  // namespace kvstring
