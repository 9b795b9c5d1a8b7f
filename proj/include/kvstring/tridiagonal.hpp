#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace kvstring {

using Complex = std::complex<double>;

// Real symmetric tridiagonal matrix: diag[i] on the diagonal, off[i] linking
// rows i and i+1. This is the shape of all three assembled operators.
struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  SymTridiagonal() = default;
  explicit SymTridiagonal(std::size_t n) : diag(n, 0.0), off(n > 0 ? n - 1 : 0, 0.0) {}

  std::size_t size() const { return diag.size(); }

  void mul(const double* x, double* y) const;
  void mul(const Complex* x, Complex* y) const;

  // x^T A x for real x, x^H A x for complex x (real by symmetry).
  double quadratic_form(const double* x) const;
  double quadratic_form(const Complex* x) const;

  double inf_norm() const;
};

// a*A + b*B + c*C, all of the same size.
SymTridiagonal combine(double a, const SymTridiagonal& A, double b, const SymTridiagonal& B,
                       double c, const SymTridiagonal& C);

// Cholesky factorisation A = L L^T of an SPD tridiagonal matrix; L is lower
// bidiagonal. Throws std::runtime_error if a pivot is not positive.
class TridiagonalCholesky {
 public:
  explicit TridiagonalCholesky(const SymTridiagonal& a);

  std::size_t size() const { return ld_.size(); }

  // In-place solve A x = b.
  void solve(double* x) const;
  void solve(Complex* x) const;

  // y = L x, y = L^T x and the corresponding triangular solves. Aliasing of
  // x and y is allowed.
  void mul_l(const Complex* x, Complex* y) const;
  void mul_lt(const Complex* x, Complex* y) const;
  void solve_l(Complex* x) const;
  void solve_lt(Complex* x) const;

 private:
  std::vector<double> ld_;  // diag(L)
  std::vector<double> le_;  // subdiag(L)
};

// LU factorisation with partial pivoting of a general complex tridiagonal
// matrix (LAPACK gttrf layout: a second superdiagonal appears as fill).
class ComplexTridiagonalLU {
 public:
  ComplexTridiagonalLU(std::vector<Complex> sub, std::vector<Complex> diag,
                       std::vector<Complex> sup);

  std::size_t size() const { return d_.size(); }
  bool singular() const { return singular_; }

  // In-place solve A x = b. Throws std::runtime_error if the factorisation
  // met an exactly zero pivot.
  void solve(Complex* x) const;

  // Solves conj(A) x = b using the same factorisation.
  void solve_conjugate(Complex* x) const;

 private:
  std::vector<Complex> dl_;   // multipliers
  std::vector<Complex> d_;    // U diagonal
  std::vector<Complex> du_;   // U first superdiagonal
  std::vector<Complex> du2_;  // U second superdiagonal (pivoting fill)
  std::vector<int> pivoted_;  // 1 if rows i, i+1 were swapped
  bool singular_ = false;
};

}  // namespace kvstring
