#include "kvstring/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "kvstring/parallel.hpp"
#include "kvstring/resolvent.hpp"
#include "kvstring/rng.hpp"

namespace kvstring {

namespace {

Eigen::MatrixXd dense_from_tridiagonal(const SymTridiagonal& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = t.diag[static_cast<std::size_t>(i)];
    if (i + 1 < n) {
      m(i, i + 1) = t.off[static_cast<std::size_t>(i)];
      m(i + 1, i) = t.off[static_cast<std::size_t>(i)];
    }
  }
  return m;
}

struct ResidualScale {
  double mass, damping, stiffness;
};

// Inverse iteration on the Schur pencil at a slightly perturbed shift, plus a
// few Rayleigh-functional Newton corrections. Returns the polished eigenvalue
// and its relative pencil residual.
std::pair<Complex, double> certify_eigenvalue(const SystemMatrices& m, Complex lambda,
                                              const ResidualScale& scale) {
  const std::size_t n = m.n_dof;
  const double magnitude = std::abs(lambda) + 1.0;

  auto build_lu = [&](Complex s) {
    const Complex s2 = s * s;
    std::vector<Complex> diag(n), sub(n > 1 ? n - 1 : 0), sup(n > 1 ? n - 1 : 0);
    for (std::size_t i = 0; i < n; ++i)
      diag[i] = s2 * m.mass.diag[i] + s * m.damping.diag[i] + m.stiffness.diag[i];
    for (std::size_t i = 0; i + 1 < n; ++i)
      sub[i] = sup[i] = s2 * m.mass.off[i] + s * m.damping.off[i] + m.stiffness.off[i];
    return ComplexTridiagonalLU(std::move(sub), std::move(diag), std::move(sup));
  };

  auto pencil_apply = [&](Complex s, const std::vector<Complex>& x, std::vector<Complex>& y) {
    std::vector<Complex> t1(n), t2(n);
    m.mass.mul(x.data(), y.data());
    m.damping.mul(x.data(), t1.data());
    m.stiffness.mul(x.data(), t2.data());
    const Complex s2 = s * s;
    for (std::size_t i = 0; i < n; ++i) y[i] = s2 * y[i] + s * t1[i] + t2[i];
  };

  auto residual_of = [&](Complex s, const std::vector<Complex>& x) {
    std::vector<Complex> y(n);
    pencil_apply(s, x, y);
    double rn = 0.0, xn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      rn += std::norm(y[i]);
      xn += std::norm(x[i]);
    }
    const double denom = std::abs(s) * std::abs(s) * scale.mass + std::abs(s) * scale.damping +
                         scale.stiffness;
    return std::sqrt(rn / xn) / denom;
  };

  auto eigvec_at = [&](Complex s) {
    Complex shift = s * (1.0 + 3e-14) + Complex(1e-300, 1e-300);
    std::vector<Complex> x(n);
    SplitMix64 rng(seed_from_double(0x517aull, s.imag() + 0.37 * s.real()));
    for (auto& xi : x) xi = Complex(rng.symmetric(), rng.symmetric());
    for (int attempt = 0; attempt < 3; ++attempt) {
      auto lu = build_lu(shift);
      if (lu.singular()) {
        shift = s * (1.0 + 1e-12 * (attempt + 1)) + Complex(0.0, 1e-13 * magnitude);
        continue;
      }
      for (int pass = 0; pass < 2; ++pass) {
        lu.solve(x.data());
        double nr = 0.0;
        for (const auto& xi : x) nr += std::norm(xi);
        nr = std::sqrt(nr);
        if (!(nr > 0.0) || !std::isfinite(nr)) break;
        for (auto& xi : x) xi /= nr;
      }
      break;
    }
    return x;
  };

  Complex best_lambda = lambda;
  std::vector<Complex> x = eigvec_at(lambda);
  double best_res = residual_of(lambda, x);

  Complex current = lambda;
  for (int it = 0; it < 6 && best_res > 1e-13; ++it) {
    // Rayleigh functional Newton step: s -= x^H S(s) x / x^H S'(s) x.
    std::vector<Complex> sx(n), t1(n), t2(n);
    pencil_apply(current, x, sx);
    m.mass.mul(x.data(), t1.data());
    m.damping.mul(x.data(), t2.data());
    Complex num(0.0), den(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      num += std::conj(x[i]) * sx[i];
      den += std::conj(x[i]) * (2.0 * current * t1[i] + t2[i]);
    }
    if (den == Complex(0.0)) break;
    const Complex next = current - num / den;
    if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) break;
    if (std::abs(next - lambda) > 0.05 * magnitude) break;  // walked off to another root
    current = next;
    x = eigvec_at(current);
    const double res = residual_of(current, x);
    if (res < best_res) {
      best_res = res;
      best_lambda = current;
    }
  }
  if (std::abs(best_lambda.imag()) <= 1e-13 * (1.0 + std::abs(best_lambda)))
    best_lambda = Complex(best_lambda.real(), 0.0);
  return {best_lambda, best_res};
}

void finalize(SpectrumResult& result) {
  std::sort(result.eigenvalues.begin(), result.eigenvalues.end(),
            [](const Complex& a, const Complex& b) {
              if (a.imag() != b.imag()) return a.imag() < b.imag();
              return a.real() < b.real();
            });
  result.abscissa = -std::numeric_limits<double>::infinity();
  result.axis_gap = std::numeric_limits<double>::infinity();
  for (const auto& ev : result.eigenvalues) {
    result.abscissa = std::max(result.abscissa, ev.real());
    result.axis_gap = std::min(result.axis_gap, std::abs(ev.real()));
  }
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> linearize_pencil(const SystemMatrices& matrices) {
  const auto n = static_cast<Eigen::Index>(matrices.n_dof);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  a.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  a.bottomLeftCorner(n, n) = -dense_from_tridiagonal(matrices.stiffness);
  a.bottomRightCorner(n, n) = -dense_from_tridiagonal(matrices.damping);
  b.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  b.bottomRightCorner(n, n) = dense_from_tridiagonal(matrices.mass);
  return {std::move(a), std::move(b)};
}

Eigen::MatrixXd companion_matrix(const SystemMatrices& matrices) {
  const std::size_t n = matrices.n_dof;
  const auto ne = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * ne, 2 * ne);
  c.topRightCorner(ne, ne) = Eigen::MatrixXd::Identity(ne, ne);

  TridiagonalCholesky mass_chol(matrices.mass);
  std::vector<double> col(n);
  auto fill_block = [&](const SymTridiagonal& t, Eigen::Index col_offset) {
    for (std::size_t j = 0; j < n; ++j) {
      std::fill(col.begin(), col.end(), 0.0);
      col[j] = t.diag[j];
      if (j > 0) col[j - 1] = t.off[j - 1];
      if (j + 1 < n) col[j + 1] = t.off[j];
      mass_chol.solve(col.data());
      for (std::size_t i = 0; i < n; ++i)
        c(ne + static_cast<Eigen::Index>(i), col_offset + static_cast<Eigen::Index>(j)) = -col[i];
    }
  };
  fill_block(matrices.stiffness, 0);
  fill_block(matrices.damping, ne);
  return c;
}

SpectrumResult compute_spectrum(const SystemMatrices& matrices, const SpectrumOptions& options) {
  const std::size_t n = matrices.n_dof;
  SpectrumResult result;
  result.n_dof = n;

  const ResidualScale scale{matrices.mass.inf_norm(), matrices.damping.inf_norm(),
                            matrices.stiffness.inf_norm()};

  std::vector<Complex> raw;
  if (!options.use_shift_invert) {
    if (2 * n > options.dense_limit) {
      std::ostringstream msg;
      msg << "compute_spectrum: problem size " << 2 * n << " exceeds dense limit "
          << options.dense_limit << "; request the shift-invert mode";
      throw std::invalid_argument(msg.str());
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion_matrix(matrices), false);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("compute_spectrum: dense eigensolver failed to converge");
    const auto& values = solver.eigenvalues();
    raw.reserve(static_cast<std::size_t>(values.size()));
    for (Eigen::Index i = 0; i < values.size(); ++i) raw.push_back(values[i]);
  } else {
    if (options.shifts.empty())
      throw std::invalid_argument("compute_spectrum: shift-invert mode needs at least one shift");
    for (const Complex& shift : options.shifts) {
      const std::size_t dim = 2 * n;
      ShiftedOperator op(matrices, shift);
      if (op.singular()) continue;  // shift sits on an eigenvalue; neighbours found from others
      const int m = std::min<int>(options.krylov_dim, static_cast<int>(dim));

      // Arnoldi on (C - shift I)^{-1} with modified Gram-Schmidt.
      std::vector<std::vector<Complex>> basis;
      Eigen::MatrixXcd hess = Eigen::MatrixXcd::Zero(m + 1, m);
      SplitMix64 rng(seed_from_double(0xa51ull, shift.imag() + 0.11 * shift.real()));
      std::vector<Complex> v(dim);
      double nrm = 0.0;
      for (auto& x : v) {
        x = Complex(rng.symmetric(), rng.symmetric());
        nrm += std::norm(x);
      }
      nrm = std::sqrt(nrm);
      for (auto& x : v) x /= nrm;
      basis.push_back(v);

      int built = 0;
      for (int j = 0; j < m; ++j) {
        CState in;
        in.u.assign(basis.back().begin(), basis.back().begin() + static_cast<long>(n));
        in.v.assign(basis.back().begin() + static_cast<long>(n), basis.back().end());
        CState out = op.solve(in);
        std::vector<Complex> w(dim);
        for (std::size_t i = 0; i < n; ++i) {
          w[i] = -out.u[i];
          w[n + i] = -out.v[i];
        }
        for (int i = 0; i <= j; ++i) {
          Complex h(0.0);
          for (std::size_t k = 0; k < dim; ++k) h += std::conj(basis[static_cast<std::size_t>(i)][k]) * w[k];
          hess(i, j) = h;
          for (std::size_t k = 0; k < dim; ++k) w[k] -= h * basis[static_cast<std::size_t>(i)][k];
        }
        double wn = 0.0;
        for (const auto& x : w) wn += std::norm(x);
        wn = std::sqrt(wn);
        hess(j + 1, j) = wn;
        built = j + 1;
        if (wn < 1e-13) break;
        for (auto& x : w) x /= wn;
        basis.push_back(std::move(w));
      }

      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> small(hess.topLeftCorner(built, built));
      if (small.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "compute_spectrum: Krylov eigen-iteration did not converge at shift ("
            << shift.real() << "," << shift.imag() << ")";
        throw std::runtime_error(msg.str());
      }
      for (Eigen::Index i = 0; i < small.eigenvalues().size(); ++i) {
        const Complex nu = small.eigenvalues()[i];
        if (std::abs(nu) < 1e-12) continue;
        raw.push_back(shift + 1.0 / nu);
      }
    }
  }

  // Certify with pencil residuals; in shift-invert mode unconverged Ritz
  // values are discarded, in dense mode they are an error.
  std::vector<Complex> accepted;
  accepted.reserve(raw.size());
  for (const Complex& lambda : raw) {
    const auto [polished, res] = certify_eigenvalue(matrices, lambda, scale);
    if (res <= options.residual_tol) {
      accepted.push_back(polished);
    } else if (!options.use_shift_invert) {
      std::ostringstream msg;
      msg << "compute_spectrum: eigenvalue (" << lambda.real() << "," << lambda.imag()
          << ") failed the pencil residual certificate (" << res << " > " << options.residual_tol
          << ")";
      throw std::runtime_error(msg.str());
    }
  }

  if (options.use_shift_invert) {
    // Deduplicate values found from several shifts.
    std::sort(accepted.begin(), accepted.end(), [](const Complex& a, const Complex& b) {
      if (a.imag() != b.imag()) return a.imag() < b.imag();
      return a.real() < b.real();
    });
    std::vector<Complex> unique;
    const double merge_tol = 1e-9;
    for (const auto& ev : accepted) {
      if (!unique.empty() && std::abs(ev - unique.back()) <= merge_tol * (std::abs(ev) + 1.0))
        continue;
      unique.push_back(ev);
    }
    accepted = std::move(unique);
  }

  result.eigenvalues = std::move(accepted);
  finalize(result);
  return result;
}

std::vector<BranchPoint> trace_branches(const std::vector<double>& alphas, int n_elements,
                                        int k_max, double grading, unsigned threads) {
  if (k_max < 1) throw std::invalid_argument("trace_branches: k_max must be >= 1");
  for (double a : alphas)
    if (!(a >= 0.0 && a < 1.0)) throw std::invalid_argument("trace_branches: alpha out of [0,1)");

  const Mesh mesh = build_mesh(n_elements, grading);
  std::vector<std::vector<Complex>> upper(alphas.size());
  parallel_for(alphas.size(), threads, [&](std::size_t i) {
    const SystemMatrices sys = assemble(mesh, DampingProfile(alphas[i]));
    const SpectrumResult spec = compute_spectrum(sys);
    std::vector<Complex> ups;
    for (const auto& ev : spec.eigenvalues)
      if (ev.imag() > 1e-8 * (1.0 + std::abs(ev))) ups.push_back(ev);
    std::sort(ups.begin(), ups.end(),
              [](const Complex& a, const Complex& b) { return std::abs(a.imag()) < std::abs(b.imag()); });
    if (static_cast<int>(ups.size()) < k_max)
      throw std::runtime_error("trace_branches: fewer upper-half eigenvalues than k_max");
    ups.resize(static_cast<std::size_t>(k_max));
    upper[i] = std::move(ups);
  });

  std::vector<BranchPoint> table;
  std::vector<Complex> previous;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    std::vector<Complex> row(static_cast<std::size_t>(k_max));
    if (i == 0) {
      row = upper[0];
    } else {
      // Continuity matching: nearest candidate to the previous branch value.
      std::vector<bool> taken(upper[i].size(), false);
      for (int k = 0; k < k_max; ++k) {
        double best = std::numeric_limits<double>::infinity();
        double second = std::numeric_limits<double>::infinity();
        std::size_t best_j = 0;
        for (std::size_t j = 0; j < upper[i].size(); ++j) {
          if (taken[j]) continue;
          const double d = std::abs(upper[i][j] - previous[static_cast<std::size_t>(k)]);
          if (d < best) {
            second = best;
            best = d;
            best_j = j;
          } else if (d < second) {
            second = d;
          }
        }
        if (second - best < 1e-6) {
          std::ostringstream msg;
          msg << "trace_branches: ambiguous branch match at alpha = " << alphas[i] << ", k = "
              << (k + 1) << " (two candidates within 1e-6)";
          throw std::runtime_error(msg.str());
        }
        taken[best_j] = true;
        row[static_cast<std::size_t>(k)] = upper[i][best_j];
      }
    }
    for (int k = 0; k < k_max; ++k)
      table.push_back({alphas[i], k + 1, row[static_cast<std::size_t>(k)]});
    previous = std::move(row);
  }
  return table;
}

}  // namespace kvstring
