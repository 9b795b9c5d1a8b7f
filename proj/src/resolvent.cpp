#include "kvstring/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "kvstring/fitting.hpp"
#include "kvstring/parallel.hpp"
#include "kvstring/rng.hpp"

namespace kvstring {

namespace {

// S(sigma) = sigma^2 M + sigma D + K as a complex tridiagonal band triple.
ComplexTridiagonalLU factor_schur(const SystemMatrices& m, Complex sigma) {
  const Complex s2 = sigma * sigma;
  const std::size_t n = m.n_dof;
  std::vector<Complex> diag(n), sub(n > 0 ? n - 1 : 0), sup(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i)
    diag[i] = s2 * m.mass.diag[i] + sigma * m.damping.diag[i] + m.stiffness.diag[i];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Complex o = s2 * m.mass.off[i] + sigma * m.damping.off[i] + m.stiffness.off[i];
    sub[i] = o;
    sup[i] = o;
  }
  return ComplexTridiagonalLU(std::move(sub), std::move(diag), std::move(sup));
}

}  // namespace

double energy_norm_squared(const SystemMatrices& matrices, const CState& state) {
  return matrices.stiffness.quadratic_form(state.u.data()) +
         matrices.mass.quadratic_form(state.v.data());
}

ShiftedOperator::ShiftedOperator(const SystemMatrices& matrices, Complex sigma)
    : matrices_(&matrices), sigma_(sigma), lu_(factor_schur(matrices, sigma)),
      mass_chol_(matrices.mass) {}

CState ShiftedOperator::solve(const CState& rhs) const {
  const std::size_t n = matrices_->n_dof;
  if (rhs.u.size() != n || rhs.v.size() != n)
    throw std::invalid_argument("ShiftedOperator::solve: rhs size mismatch");

  // S(sigma) u = M g + sigma M f + D f, then v = sigma u - f.
  std::vector<Complex> b(n), tmp(n);
  matrices_->mass.mul(rhs.v.data(), b.data());
  matrices_->mass.mul(rhs.u.data(), tmp.data());
  for (std::size_t i = 0; i < n; ++i) b[i] += sigma_ * tmp[i];
  matrices_->damping.mul(rhs.u.data(), tmp.data());
  for (std::size_t i = 0; i < n; ++i) b[i] += tmp[i];

  lu_.solve(b.data());

  CState out;
  out.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.v[i] = sigma_ * b[i] - rhs.u[i];
  out.u = std::move(b);
  return out;
}

CState ShiftedOperator::solve_adjoint(const CState& rhs) const {
  const std::size_t n = matrices_->n_dof;
  if (rhs.u.size() != n || rhs.v.size() != n)
    throw std::invalid_argument("ShiftedOperator::solve_adjoint: rhs size mismatch");

  // S(conj sigma) w = f + conj(sigma) g, then v = M w, u = conj(sigma) v + D w - g.
  const Complex sc = std::conj(sigma_);
  std::vector<Complex> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = rhs.u[i] + sc * rhs.v[i];
  lu_.solve_conjugate(b.data());

  CState out;
  out.u.resize(n);
  out.v.resize(n);
  matrices_->mass.mul(b.data(), out.v.data());
  matrices_->damping.mul(b.data(), out.u.data());
  for (std::size_t i = 0; i < n; ++i) out.u[i] += sc * out.v[i] - rhs.v[i];
  return out;
}

CState ShiftedOperator::apply(const CState& state) const {
  const std::size_t n = matrices_->n_dof;
  CState out;
  out.u.resize(n);
  out.v.resize(n);
  std::vector<Complex> tmp(n);
  for (std::size_t i = 0; i < n; ++i) out.u[i] = sigma_ * state.u[i] - state.v[i];
  matrices_->stiffness.mul(state.u.data(), out.v.data());
  matrices_->damping.mul(state.v.data(), tmp.data());
  for (std::size_t i = 0; i < n; ++i) out.v[i] += tmp[i];
  mass_chol_.solve(out.v.data());
  for (std::size_t i = 0; i < n; ++i) out.v[i] += sigma_ * state.v[i];
  return out;
}

CState shifted_solve(const SystemMatrices& matrices, Complex sigma, const CState& rhs) {
  ShiftedOperator op(matrices, sigma);
  if (op.singular()) {
    std::ostringstream msg;
    msg << "shifted_solve: singular Schur complement at sigma = (" << sigma.real() << ", "
        << sigma.imag() << ")";
    throw std::runtime_error(msg.str());
  }
  return op.solve(rhs);
}

CState resolvent_apply(const SystemMatrices& matrices, double omega, const CState& rhs) {
  ShiftedOperator op(matrices, Complex(0.0, omega));
  if (op.singular()) {
    std::ostringstream msg;
    msg << "resolvent_apply: i*omega is a discrete eigenvalue at omega = " << omega
        << " (singular Schur complement)";
    throw std::runtime_error(msg.str());
  }
  CState sol = op.solve(rhs);

  const double rhs_norm = std::sqrt(energy_norm_squared(matrices, rhs));
  if (rhs_norm == 0.0) return sol;
  const std::size_t n = matrices.n_dof;
  auto residual = [&]() {
    CState r = op.apply(sol);
    for (std::size_t i = 0; i < n; ++i) {
      r.u[i] = rhs.u[i] - r.u[i];
      r.v[i] = rhs.v[i] - r.v[i];
    }
    return r;
  };

  CState r = residual();
  double rnorm = std::sqrt(energy_norm_squared(matrices, r));
  if (rnorm > 0.5e-10 * rhs_norm) {
    CState corr = op.solve(r);
    for (std::size_t i = 0; i < n; ++i) {
      sol.u[i] += corr.u[i];
      sol.v[i] += corr.v[i];
    }
    r = residual();
    rnorm = std::sqrt(energy_norm_squared(matrices, r));
  }
  if (rnorm > 1e-10 * rhs_norm) {
    std::ostringstream msg;
    msg << "resolvent_apply: residual " << rnorm / rhs_norm << " exceeds 1e-10 at omega = " << omega;
    throw std::runtime_error(msg.str());
  }
  return sol;
}

namespace {

// Largest eigenvalue of a real symmetric tridiagonal matrix by bisection on
// the Sturm count, plus its eigenvector by inverse iteration. Used on the
// small Lanczos matrices only.
int sturm_count_below(const std::vector<double>& a, const std::vector<double>& b, double mu) {
  int count = 0;
  double q = 1.0;
  const std::size_t m = a.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double bb = i == 0 ? 0.0 : b[i - 1];
    q = (a[i] - mu) - (q == 0.0 ? std::abs(bb) / 1e-300 : bb * bb / q);
    if (q < 0.0) ++count;
  }
  return count;
}

double tridiag_lambda_max(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t m = a.size();
  double lo = a[0], hi = a[0];
  for (std::size_t i = 0; i < m; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(b[i - 1]);
    if (i + 1 < m) r += std::abs(b[i]);
    lo = std::min(lo, a[i] - r);
    hi = std::max(hi, a[i] + r);
  }
  const int want = static_cast<int>(m) - 1;  // index of the largest eigenvalue
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sturm_count_below(a, b, mid) <= want)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> tridiag_eigvec(const std::vector<double>& a, const std::vector<double>& b,
                                   double lambda) {
  const std::size_t m = a.size();
  std::vector<Complex> diag(m), sub(m > 1 ? m - 1 : 0), sup(m > 1 ? m - 1 : 0);
  double scale = std::abs(lambda);
  for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, std::abs(a[i]));
  const double shift = lambda + 1e-14 * std::max(scale, 1.0);
  for (std::size_t i = 0; i < m; ++i) diag[i] = a[i] - shift;
  for (std::size_t i = 0; i + 1 < m; ++i) sub[i] = sup[i] = b[i];
  ComplexTridiagonalLU lu(std::move(sub), std::move(diag), std::move(sup));

  std::vector<Complex> x(m, Complex(1.0));
  for (int pass = 0; pass < 2; ++pass) {
    lu.solve(x.data());
    double nrm = 0.0;
    for (const auto& xi : x) nrm += std::norm(xi);
    nrm = std::sqrt(nrm);
    for (auto& xi : x) xi /= nrm;
  }
  std::vector<double> y(m);
  for (std::size_t i = 0; i < m; ++i) y[i] = x[i].real();
  double nrm = 0.0;
  for (double yi : y) nrm += yi * yi;
  nrm = std::sqrt(nrm);
  for (auto& yi : y) yi /= nrm;
  return y;
}

}  // namespace

double sigma_min(const SystemMatrices& matrices, double omega, const SigmaMinOptions& options) {
  if (!(omega >= 0.0)) throw std::invalid_argument("sigma_min: omega must be nonnegative");
  const std::size_t n = matrices.n_dof;
  const std::size_t dim = 2 * n;

  ShiftedOperator op(matrices, Complex(0.0, omega));
  if (op.singular())
    throw std::runtime_error("sigma_min: singular Schur complement (i*omega in discrete spectrum)");
  TridiagonalCholesky chol_k(matrices.stiffness);
  TridiagonalCholesky chol_m(matrices.mass);

  // w holds the Cholesky-weighted coordinates: split, unweight, solve, reweight.
  auto apply_g = [&](const std::vector<Complex>& w, std::vector<Complex>& out) {
    CState s;
    s.u.assign(w.begin(), w.begin() + static_cast<long>(n));
    s.v.assign(w.begin() + static_cast<long>(n), w.end());
    // R* part: L w, adjoint resolvent solve, L^{-1}.
    chol_k.mul_l(s.u.data(), s.u.data());
    chol_m.mul_l(s.v.data(), s.v.data());
    CState t = op.solve_adjoint(s);
    chol_k.solve_l(t.u.data());
    chol_m.solve_l(t.v.data());
    // R part: L^{-T} ., resolvent solve, L^T.
    chol_k.solve_lt(t.u.data());
    chol_m.solve_lt(t.v.data());
    CState r = op.solve(t);
    chol_k.mul_lt(r.u.data(), r.u.data());
    chol_m.mul_lt(r.v.data(), r.v.data());
    out.resize(dim);
    std::copy(r.u.begin(), r.u.end(), out.begin());
    std::copy(r.v.begin(), r.v.end(), out.begin() + static_cast<long>(n));
  };

  SplitMix64 rng(seed_from_double(mix_seed(options.seed, dim), omega));
  std::vector<Complex> start(dim);
  for (auto& x : start) x = Complex(rng.symmetric(), rng.symmetric());

  int applications = 0;
  double best = 0.0;
  const int max_dim = static_cast<int>(std::min<std::size_t>(
      dim, static_cast<std::size_t>(std::max(options.max_subspace, 2))));

  while (applications < options.max_applications) {
    // Lanczos with full reorthogonalisation on the Hermitian operator R R*.
    std::vector<std::vector<Complex>> basis;
    std::vector<double> alpha, beta;
    std::vector<Complex> v = start;
    double nrm = 0.0;
    for (const auto& x : v) nrm += std::norm(x);
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) throw std::runtime_error("sigma_min: zero start vector");
    for (auto& x : v) x /= nrm;

    std::vector<Complex> w;
    while (static_cast<int>(alpha.size()) < max_dim && applications < options.max_applications) {
      basis.push_back(v);
      apply_g(v, w);
      ++applications;
      if (!beta.empty()) {
        const auto& prev = basis[basis.size() - 2];
        const double b = beta.back();
        for (std::size_t i = 0; i < dim; ++i) w[i] -= b * prev[i];
      }
      Complex a(0.0);
      for (std::size_t i = 0; i < dim; ++i) a += std::conj(v[i]) * w[i];
      alpha.push_back(a.real());
      for (std::size_t i = 0; i < dim; ++i) w[i] -= alpha.back() * v[i];
      // full reorthogonalisation, twice for safety
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) {
          Complex c(0.0);
          for (std::size_t i = 0; i < dim; ++i) c += std::conj(q[i]) * w[i];
          for (std::size_t i = 0; i < dim; ++i) w[i] -= c * q[i];
        }
      }
      double bnorm = 0.0;
      for (const auto& x : w) bnorm += std::norm(x);
      bnorm = std::sqrt(bnorm);

      const std::size_t m = alpha.size();
      if (m >= 2 || bnorm <= 1e-14 * std::abs(alpha[0])) {
        const double lambda = tridiag_lambda_max(alpha, beta);
        best = std::max(best, lambda);
        const auto y = tridiag_eigvec(alpha, beta, lambda);
        const double res = bnorm * std::abs(y.back());
        if (res <= options.tol * lambda || bnorm <= 1e-14 * lambda || m == dim) {
          if (!(lambda > 0.0)) throw std::runtime_error("sigma_min: nonpositive Ritz value");
          return 1.0 / std::sqrt(lambda);
        }
      }
      if (bnorm == 0.0) break;  // invariant subspace hit exactly
      beta.push_back(bnorm);
      v = w;
      for (auto& x : v) x /= bnorm;
    }

    // Restart from the best Ritz vector of the exhausted subspace.
    const double lambda = tridiag_lambda_max(alpha, beta);
    const auto y = tridiag_eigvec(alpha, beta, lambda);
    std::vector<Complex> next(dim, Complex(0.0));
    for (std::size_t j = 0; j < basis.size(); ++j)
      for (std::size_t i = 0; i < dim; ++i) next[i] += y[j] * basis[j][i];
    start = std::move(next);
  }

  std::ostringstream msg;
  msg << "sigma_min: no convergence within " << options.max_applications
      << " applications at omega = " << omega << " (last estimate "
      << (best > 0.0 ? 1.0 / std::sqrt(best) : 0.0) << ")";
  throw std::runtime_error(msg.str());
}

ResolventScan scan_resolvent(const SystemMatrices& matrices, double omega_min, double omega_max,
                             int points, ScanSpacing spacing, unsigned threads, double cap_divisor,
                             const SigmaMinOptions& options) {
  if (!(omega_min > 0.0)) throw std::invalid_argument("scan_resolvent: omega_min must be positive");
  if (points < 1) throw std::invalid_argument("scan_resolvent: points must be >= 1");
  if (points > 1 && !(omega_min < omega_max))
    throw std::invalid_argument("scan_resolvent: omega_min must be below omega_max");
  const double cap = matrices.omega_cap(cap_divisor);
  if (omega_max > cap) {
    std::ostringstream msg;
    msg << "scan_resolvent: omega_max " << omega_max << " exceeds the mesh resolution cap " << cap
        << " (n_elements/" << cap_divisor << ")";
    throw std::invalid_argument(msg.str());
  }

  ResolventScan scan;
  scan.alpha = matrices.alpha;
  scan.n_dof = matrices.n_dof;
  scan.n_elements = matrices.n_elements;
  scan.omega_cap = cap;
  scan.omegas.resize(static_cast<std::size_t>(points));
  scan.sigma_mins.resize(static_cast<std::size_t>(points));

  for (int i = 0; i < points; ++i) {
    double w;
    if (points == 1)
      w = omega_min;
    else if (spacing == ScanSpacing::log_spaced)
      w = std::exp(std::log(omega_min) +
                   (std::log(omega_max) - std::log(omega_min)) * static_cast<double>(i) /
                       static_cast<double>(points - 1));
    else
      w = omega_min + (omega_max - omega_min) * static_cast<double>(i) / static_cast<double>(points - 1);
    scan.omegas[static_cast<std::size_t>(i)] = w;
  }
  if (points > 1) {
    scan.omegas.front() = omega_min;
    scan.omegas.back() = omega_max;
  }

  parallel_for(static_cast<std::size_t>(points), threads, [&](std::size_t i) {
    scan.sigma_mins[i] = sigma_min(matrices, scan.omegas[i], options);
  });
  return scan;
}

ResolventScan scan_resolvent_dips(const SystemMatrices& matrices, double omega_min,
                                  double omega_max, unsigned threads, double cap_divisor,
                                  const SigmaMinOptions& options) {
  if (!(omega_min > 0.0 && omega_min < omega_max))
    throw std::invalid_argument("scan_resolvent_dips: bad window");
  const double cap = matrices.omega_cap(cap_divisor);
  if (omega_max > cap) {
    std::ostringstream msg;
    msg << "scan_resolvent_dips: omega_max " << omega_max << " exceeds the mesh resolution cap "
        << cap << " (n_elements/" << cap_divisor << ")";
    throw std::invalid_argument(msg.str());
  }

  // Presample finely enough that no dip can hide between grid points (the
  // mode spacing of the string is pi), then refine each bracketed minimum by
  // golden-section search.
  const double step = 0.35;
  const auto n_pre = static_cast<std::size_t>((omega_max - omega_min) / step) + 2;
  std::vector<double> ws(n_pre), ss(n_pre);
  for (std::size_t i = 0; i < n_pre; ++i)
    ws[i] = std::min(omega_min + step * static_cast<double>(i), omega_max);
  parallel_for(n_pre, threads, [&](std::size_t i) { ss[i] = sigma_min(matrices, ws[i], options); });

  std::vector<std::size_t> bracket;
  for (std::size_t i = 1; i + 1 < n_pre; ++i)
    if (ss[i] < ss[i - 1] && ss[i] < ss[i + 1]) bracket.push_back(i);

  std::vector<double> dip_w(bracket.size()), dip_s(bracket.size());
  parallel_for(bracket.size(), threads, [&](std::size_t j) {
    double a = ws[bracket[j] - 1];
    double b = ws[bracket[j] + 1];
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = sigma_min(matrices, x1, options);
    double f2 = sigma_min(matrices, x2, options);
    for (int it = 0; it < 30 && (b - a) > 1e-10 * b; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = sigma_min(matrices, x1, options);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = sigma_min(matrices, x2, options);
      }
    }
    dip_w[j] = f1 < f2 ? x1 : x2;
    dip_s[j] = std::min(f1, f2);
  });

  ResolventScan scan;
  scan.alpha = matrices.alpha;
  scan.n_dof = matrices.n_dof;
  scan.n_elements = matrices.n_elements;
  scan.omega_cap = cap;
  scan.omegas = std::move(dip_w);
  scan.sigma_mins = std::move(dip_s);
  return scan;
}

RateFit fit_theta(const ResolventScan& scan, double omega_lo, double omega_hi) {
  if (!(omega_lo > 0.0 && omega_lo < omega_hi))
    throw std::invalid_argument("fit_theta: degenerate window");
  std::vector<double> lx, ly;
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < scan.omegas.size(); ++i) {
    const double w = scan.omegas[i];
    if (w < omega_lo || w > omega_hi) continue;
    lx.push_back(std::log(w));
    ly.push_back(-std::log(scan.sigma_mins[i]));
    used.push_back(i);
  }
  if (lx.size() < 10) throw std::invalid_argument("fit_theta: window holds fewer than 10 samples");
  const LineFit line = fit_line(lx, ly);

  RateFit fit;
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.residual = line.residual;
  fit.omega_lo = omega_lo;
  fit.omega_hi = omega_hi;
  fit.r_lower = lower_bound_witness(scan, line.slope, omega_lo, omega_hi);
  return fit;
}

double lower_bound_witness(const ResolventScan& scan, double theta, double omega_lo,
                           double omega_hi) {
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scan.omegas.size(); ++i) {
    const double w = scan.omegas[i];
    if (w < omega_lo || w > omega_hi) continue;
    r = std::min(r, std::pow(w, theta) * scan.sigma_mins[i]);
  }
  if (!std::isfinite(r)) throw std::invalid_argument("lower_bound_witness: empty window");
  return r;
}

}  // namespace kvstring
