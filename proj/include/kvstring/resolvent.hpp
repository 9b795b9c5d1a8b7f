#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "kvstring/assembly.hpp"
#include "kvstring/tridiagonal.hpp"

namespace kvstring {

// Complex-valued state pair, used on the resolvent and spectral paths.
struct CState {
  std::vector<Complex> u;
  std::vector<Complex> v;
};

// Squared energy norm u^H K u + v^H M v.
double energy_norm_squared(const SystemMatrices& matrices, const CState& state);

// Factorisation of (sigma I - A) for a fixed complex shift, reduced to the
// n x n Schur complement S(sigma) = sigma^2 M + sigma D + K. One tridiagonal
// LU serves both the solve and its adjoint (S(conj sigma) = conj S(sigma)).
class ShiftedOperator {
 public:
  ShiftedOperator(const SystemMatrices& matrices, Complex sigma);

  Complex sigma() const { return sigma_; }
  bool singular() const { return lu_.singular(); }

  // Solves (sigma I - A) U = F.
  CState solve(const CState& rhs) const;

  // Solves (sigma I - A)^H U = F.
  CState solve_adjoint(const CState& rhs) const;

  // U -> (sigma I - A) U, for residual checks.
  CState apply(const CState& state) const;

 private:
  const SystemMatrices* matrices_;
  Complex sigma_;
  ComplexTridiagonalLU lu_;
  TridiagonalCholesky mass_chol_;
};

// Solves (sigma I - A) U = F for an arbitrary complex shift.
CState shifted_solve(const SystemMatrices& matrices, Complex sigma, const CState& rhs);

// Solves (i omega I - A) U = F and verifies the energy-norm residual to
// 1e-10 relative (one step of iterative refinement if needed). A singular
// Schur complement means i*omega is a discrete eigenvalue and is reported.
CState resolvent_apply(const SystemMatrices& matrices, double omega, const CState& rhs);

struct SigmaMinOptions {
  double tol = 1e-9;           // relative accuracy target for sigma_min
  int max_applications = 500;  // budget of R R* applications
  int max_subspace = 300;      // Krylov dimension per restart
  std::uint64_t seed = 0;
};

// Smallest singular value of (i omega I - A) in the energy norm, i.e. the
// reciprocal of the resolvent norm. Computed by a Lanczos iteration on
// R R* where R is the Cholesky-weighted resolvent; every application is one
// pair of tridiagonal solves.
double sigma_min(const SystemMatrices& matrices, double omega, const SigmaMinOptions& options = {});

enum class ScanSpacing { log_spaced, linear };

struct ResolventScan {
  std::vector<double> omegas;
  std::vector<double> sigma_mins;
  double alpha = 0.0;
  std::size_t n_dof = 0;
  int n_elements = 0;
  double omega_cap = 0.0;
};

// Samples sigma_min over [omega_min, omega_max]. Requests beyond the mesh
// resolution cap n_elements/cap_divisor are rejected, never truncated.
// Grid points are evaluated concurrently; each value is a pure function of
// (matrices, omega), so the schedule cannot change the output.
ResolventScan scan_resolvent(const SystemMatrices& matrices, double omega_min, double omega_max,
                             int points, ScanSpacing spacing = ScanSpacing::log_spaced,
                             unsigned threads = 0, double cap_divisor = 10.0,
                             const SigmaMinOptions& options = {});

// Envelope scan: locates the local minima of sigma_min (the resonance dips,
// where the resolvent norm peaks) inside [omega_min, omega_max] and samples
// exactly there. The growth exponent of Lemma-type resolvent estimates lives
// in this lower envelope; a uniform grid mostly sees the flat plateaus
// between resonances and underestimates it badly.
ResolventScan scan_resolvent_dips(const SystemMatrices& matrices, double omega_min,
                                  double omega_max, unsigned threads = 0,
                                  double cap_divisor = 10.0, const SigmaMinOptions& options = {});

struct RateFit {
  double slope = 0.0;      // fitted resolvent growth exponent (estimate of theta)
  double intercept = 0.0;
  double residual = 0.0;
  double omega_lo = 0.0;
  double omega_hi = 0.0;
  double r_lower = 0.0;    // min over window of omega^slope * sigma_min
};

// Least-squares slope of log(1/sigma_min) against log(omega) over the window.
RateFit fit_theta(const ResolventScan& scan, double omega_lo, double omega_hi);

// min over the window of omega^theta * sigma_min for a caller-chosen theta.
double lower_bound_witness(const ResolventScan& scan, double theta, double omega_lo,
                           double omega_hi);

}  // namespace kvstring
