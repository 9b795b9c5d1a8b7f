#include "kvstring/tridiagonal.hpp"

#include <cmath>
#include <stdexcept>

namespace kvstring {

namespace {

template <typename T>
void mul_impl(const std::vector<double>& diag, const std::vector<double>& off, const T* x, T* y) {
  const std::size_t n = diag.size();
  if (n == 0) return;
  if (n == 1) {
    y[0] = diag[0] * x[0];
    return;
  }
  y[0] = diag[0] * x[0] + off[0] * x[1];
  for (std::size_t i = 1; i + 1 < n; ++i)
    y[i] = off[i - 1] * x[i - 1] + diag[i] * x[i] + off[i] * x[i + 1];
  y[n - 1] = off[n - 2] * x[n - 2] + diag[n - 1] * x[n - 1];
}

}  // namespace

void SymTridiagonal::mul(const double* x, double* y) const { mul_impl(diag, off, x, y); }
void SymTridiagonal::mul(const Complex* x, Complex* y) const { mul_impl(diag, off, x, y); }

double SymTridiagonal::quadratic_form(const double* x) const {
  const std::size_t n = diag.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += diag[i] * x[i] * x[i];
  for (std::size_t i = 0; i + 1 < n; ++i) s += 2.0 * off[i] * x[i] * x[i + 1];
  return s;
}

double SymTridiagonal::quadratic_form(const Complex* x) const {
  const std::size_t n = diag.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += diag[i] * std::norm(x[i]);
  for (std::size_t i = 0; i + 1 < n; ++i)
    s += 2.0 * off[i] * (x[i].real() * x[i + 1].real() + x[i].imag() * x[i + 1].imag());
  return s;
}

double SymTridiagonal::inf_norm() const {
  const std::size_t n = diag.size();
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = std::abs(diag[i]);
    if (i > 0) row += std::abs(off[i - 1]);
    if (i + 1 < n) row += std::abs(off[i]);
    m = std::max(m, row);
  }
  return m;
}

SymTridiagonal combine(double a, const SymTridiagonal& A, double b, const SymTridiagonal& B,
                       double c, const SymTridiagonal& C) {
  const std::size_t n = A.size();
  if (B.size() != n || C.size() != n) throw std::invalid_argument("combine: size mismatch");
  SymTridiagonal r(n);
  for (std::size_t i = 0; i < n; ++i) r.diag[i] = a * A.diag[i] + b * B.diag[i] + c * C.diag[i];
  for (std::size_t i = 0; i + 1 < n; ++i) r.off[i] = a * A.off[i] + b * B.off[i] + c * C.off[i];
  return r;
}

TridiagonalCholesky::TridiagonalCholesky(const SymTridiagonal& a) {
  const std::size_t n = a.size();
  ld_.resize(n);
  le_.resize(n > 0 ? n - 1 : 0);
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a.diag[i];
    if (i > 0) d -= prev * prev;
    if (!(d > 0.0)) throw std::runtime_error("TridiagonalCholesky: matrix is not positive definite");
    ld_[i] = std::sqrt(d);
    if (i + 1 < n) {
      prev = a.off[i] / ld_[i];
      le_[i] = prev;
    }
  }
}

namespace {

template <typename T>
void chol_solve(const std::vector<double>& ld, const std::vector<double>& le, T* x) {
  const std::size_t n = ld.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) x[i] -= le[i - 1] * x[i - 1];
    x[i] /= ld[i];
  }
  for (std::size_t i = n; i-- > 0;) {
    if (i + 1 < n) x[i] -= le[i] * x[i + 1];
    x[i] /= ld[i];
  }
}

}  // namespace

void TridiagonalCholesky::solve(double* x) const { chol_solve(ld_, le_, x); }
void TridiagonalCholesky::solve(Complex* x) const { chol_solve(ld_, le_, x); }

void TridiagonalCholesky::mul_l(const Complex* x, Complex* y) const {
  const std::size_t n = ld_.size();
  for (std::size_t i = n; i-- > 0;) {
    Complex v = ld_[i] * x[i];
    if (i > 0) v += le_[i - 1] * x[i - 1];
    y[i] = v;
  }
}

void TridiagonalCholesky::mul_lt(const Complex* x, Complex* y) const {
  const std::size_t n = ld_.size();
  for (std::size_t i = 0; i < n; ++i) {
    Complex v = ld_[i] * x[i];
    if (i + 1 < n) v += le_[i] * x[i + 1];
    y[i] = v;
  }
}

void TridiagonalCholesky::solve_l(Complex* x) const {
  const std::size_t n = ld_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) x[i] -= le_[i - 1] * x[i - 1];
    x[i] /= ld_[i];
  }
}

void TridiagonalCholesky::solve_lt(Complex* x) const {
  const std::size_t n = ld_.size();
  for (std::size_t i = n; i-- > 0;) {
    if (i + 1 < n) x[i] -= le_[i] * x[i + 1];
    x[i] /= ld_[i];
  }
}

ComplexTridiagonalLU::ComplexTridiagonalLU(std::vector<Complex> sub, std::vector<Complex> diag,
                                           std::vector<Complex> sup)
    : dl_(std::move(sub)), d_(std::move(diag)), du_(std::move(sup)) {
  const std::size_t n = d_.size();
  if (dl_.size() + 1 != n || du_.size() + 1 != n)
    throw std::invalid_argument("ComplexTridiagonalLU: inconsistent band sizes");
  du2_.assign(n > 2 ? n - 2 : 0, Complex(0.0));
  pivoted_.assign(n > 1 ? n - 1 : 0, 0);

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d_[i]) >= std::abs(dl_[i])) {
      // no row interchange
      if (d_[i] == Complex(0.0)) {
        singular_ = true;
        continue;
      }
      const Complex m = dl_[i] / d_[i];
      dl_[i] = m;
      d_[i + 1] -= m * du_[i];
    } else {
      // interchange rows i and i+1
      const Complex m = d_[i] / dl_[i];
      d_[i] = dl_[i];
      dl_[i] = m;
      const Complex tmp = du_[i];
      du_[i] = d_[i + 1];
      d_[i + 1] = tmp - m * d_[i + 1];
      if (i + 2 < n) {
        du2_[i] = du_[i + 1];
        du_[i + 1] = -m * du_[i + 1];
      }
      pivoted_[i] = 1;
    }
  }
  if (n > 0 && d_[n - 1] == Complex(0.0)) singular_ = true;
}

void ComplexTridiagonalLU::solve(Complex* x) const {
  if (singular_) throw std::runtime_error("ComplexTridiagonalLU: matrix is singular");
  const std::size_t n = d_.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (pivoted_[i]) std::swap(x[i], x[i + 1]);
    x[i + 1] -= dl_[i] * x[i];
  }
  for (std::size_t i = n; i-- > 0;) {
    Complex v = x[i];
    if (i + 1 < n) v -= du_[i] * x[i + 1];
    if (i + 2 < n) v -= du2_[i] * x[i + 2];
    x[i] = v / d_[i];
  }
}

void ComplexTridiagonalLU::solve_conjugate(Complex* x) const {
  const std::size_t n = d_.size();
  for (std::size_t i = 0; i < n; ++i) x[i] = std::conj(x[i]);
  solve(x);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::conj(x[i]);
}

}  // namespace kvstring
