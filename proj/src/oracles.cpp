#include "kvstring/oracles.hpp"

#include <cmath>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

#include "kvstring/spectral.hpp"

namespace kvstring::oracles {

Eigen::MatrixXd dense_matrix(const SymTridiagonal& t) {
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

Eigen::VectorXd pack_state(const State& state) {
  const auto n = static_cast<Eigen::Index>(state.u.size());
  Eigen::VectorXd x(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = state.u[static_cast<std::size_t>(i)];
    x[n + i] = state.v[static_cast<std::size_t>(i)];
  }
  return x;
}

State unpack_state(const Eigen::VectorXd& x) {
  const auto n = x.size() / 2;
  State s;
  s.u.resize(static_cast<std::size_t>(n));
  s.v.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    s.u[static_cast<std::size_t>(i)] = x[i];
    s.v[static_cast<std::size_t>(i)] = x[n + i];
  }
  return s;
}

double dense_energy(const SystemMatrices& matrices, const State& state) {
  const Eigen::MatrixXd k = dense_matrix(matrices.stiffness);
  const Eigen::MatrixXd m = dense_matrix(matrices.mass);
  Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(state.u.data(),
                                                        static_cast<Eigen::Index>(state.u.size()));
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(state.v.data(),
                                                        static_cast<Eigen::Index>(state.v.size()));
  return u.dot(k * u) + v.dot(m * v);
}

namespace {

Eigen::MatrixXcd dense_shifted_generator(const SystemMatrices& matrices, double omega) {
  const auto n = static_cast<Eigen::Index>(matrices.n_dof);
  const Eigen::MatrixXd m = dense_matrix(matrices.mass);
  const Eigen::MatrixXd k = dense_matrix(matrices.stiffness);
  const Eigen::MatrixXd d = dense_matrix(matrices.damping);
  const Eigen::MatrixXd minv_k = m.ldlt().solve(k);
  const Eigen::MatrixXd minv_d = m.ldlt().solve(d);

  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  const Complex iw(0.0, omega);
  t.topLeftCorner(n, n) = iw * Eigen::MatrixXcd::Identity(n, n);
  t.topRightCorner(n, n) = -Eigen::MatrixXcd::Identity(n, n);
  t.bottomLeftCorner(n, n) = minv_k.cast<Complex>();
  t.bottomRightCorner(n, n) = minv_d.cast<Complex>() + iw * Eigen::MatrixXcd::Identity(n, n);
  return t;
}

}  // namespace

double dense_sigma_min(const SystemMatrices& matrices, double omega) {
  const auto n = static_cast<Eigen::Index>(matrices.n_dof);
  const Eigen::MatrixXcd t = dense_shifted_generator(matrices, omega);

  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  e.topLeftCorner(n, n) = dense_matrix(matrices.stiffness);
  e.bottomRightCorner(n, n) = dense_matrix(matrices.mass);
  const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(e).matrixL();

  // weighted = L^T T L^{-T}
  const Eigen::MatrixXcd lt = l.transpose().cast<Complex>();
  const Eigen::MatrixXcd weighted =
      lt * t * lt.triangularView<Eigen::Upper>().solve(Eigen::MatrixXcd::Identity(2 * n, 2 * n));
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(weighted);
  return svd.singularValues().tail(1)(0);
}

CState dense_resolvent_solve(const SystemMatrices& matrices, double omega, const CState& rhs) {
  const auto n = static_cast<Eigen::Index>(matrices.n_dof);
  const Eigen::MatrixXcd t = dense_shifted_generator(matrices, omega);
  Eigen::VectorXcd f(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    f[i] = rhs.u[static_cast<std::size_t>(i)];
    f[n + i] = rhs.v[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXcd x = t.fullPivLu().solve(f);
  CState out;
  out.u.resize(static_cast<std::size_t>(n));
  out.v.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    out.u[static_cast<std::size_t>(i)] = x[i];
    out.v[static_cast<std::size_t>(i)] = x[n + i];
  }
  return out;
}

Eigen::MatrixXd expm_propagator(const SystemMatrices& matrices, double dt) {
  const Eigen::MatrixXd c = companion_matrix(matrices);
  return (c * dt).exp();
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa, double b,
                     double fb, double fm, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  if (depth <= 0) return left + right;
  if (std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return adaptive_step(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_integral(const std::function<double(double)>& f, double a, double b,
                         double rel_tol, int max_depth) {
  if (!(a < b)) throw std::invalid_argument("adaptive_integral: requires a < b");
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double rough = simpson(a, fa, b, fb, fm);
  const double tol = std::max(std::abs(rough), 1e-30) * rel_tol;
  return adaptive_step(f, a, fa, b, fb, fm, rough, tol, max_depth);
}

SymTridiagonal adaptive_damping_matrix(const Mesh& mesh, const DampingProfile& profile) {
  const std::size_t n = mesh.n_interior();
  SymTridiagonal d(n);
  for (std::size_t e = 0; e + 1 < mesh.nodes.size(); ++e) {
    const double a = mesh.nodes[e];
    const double b = mesh.nodes[e + 1];
    if (b <= 0.0) continue;
    const double h = b - a;
    const double integral =
        adaptive_integral([&](double x) { return damping_value(profile, x); }, std::max(a, 0.0), b);
    const double d_loc = integral / (h * h);
    const long left = static_cast<long>(e) - 1;
    const long right = static_cast<long>(e);
    if (left >= 0) d.diag[left] += d_loc;
    if (right < static_cast<long>(n)) d.diag[right] += d_loc;
    if (left >= 0 && right < static_cast<long>(n)) d.off[left] += -d_loc;
  }
  return d;
}

std::vector<double> undamped_frequencies(const SystemMatrices& matrices) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      dense_matrix(matrices.stiffness), dense_matrix(matrices.mass));
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("undamped_frequencies: eigensolver failed");
  std::vector<double> freq(static_cast<std::size_t>(solver.eigenvalues().size()));
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
    freq[static_cast<std::size_t>(i)] = std::sqrt(solver.eigenvalues()[i]);
  return freq;
}

}  // namespace kvstring::oracles
