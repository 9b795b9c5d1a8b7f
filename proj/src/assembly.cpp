#include "kvstring/assembly.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace kvstring {

double element_damping_integral(double a, double b, double alpha) {
  if (!(a < b)) throw std::invalid_argument("element_damping_integral: requires a < b");
  if (!(a >= -1.0 && b <= 1.0))
    throw std::invalid_argument("element_damping_integral: interval outside [-1,1]");
  if (b <= 0.0) return 0.0;
  const double lo = std::max(a, 0.0);
  const double p = 1.0 + alpha;
  return (std::pow(b, p) - std::pow(lo, p)) / p;
}

SystemMatrices assemble(const Mesh& mesh, const DampingProfile& profile) {
  const std::size_t n_nodes = mesh.nodes.size();
  if (n_nodes < 3) throw std::invalid_argument("assemble: mesh has no interior node");
  const std::size_t n = n_nodes - 2;

  SystemMatrices sys;
  sys.mass = SymTridiagonal(n);
  sys.stiffness = SymTridiagonal(n);
  sys.damping = SymTridiagonal(n);
  sys.n_dof = n;
  sys.n_elements = static_cast<int>(n_nodes - 1);
  sys.alpha = profile.alpha;
  sys.grading = mesh.grading;

  // Element loop over [x_e, x_{e+1}]; local dofs are nodes e and e+1, global
  // interior indices are node-1. Boundary contributions are dropped.
  for (std::size_t e = 0; e + 1 < n_nodes; ++e) {
    const double a = mesh.nodes[e];
    const double b = mesh.nodes[e + 1];
    const double h = b - a;
    const double k_loc = 1.0 / h;          // [[1,-1],[-1,1]] scale
    const double m_diag = h / 3.0;         // (h/6)[[2,1],[1,2]]
    const double m_off = h / 6.0;
    const double d_loc = element_damping_integral(a, b, profile.alpha) / (h * h);

    const long left = static_cast<long>(e) - 1;   // interior index of node e
    const long right = static_cast<long>(e);      // interior index of node e+1

    if (left >= 0) {
      sys.stiffness.diag[left] += k_loc;
      sys.mass.diag[left] += m_diag;
      sys.damping.diag[left] += d_loc;
    }
    if (right < static_cast<long>(n)) {
      sys.stiffness.diag[right] += k_loc;
      sys.mass.diag[right] += m_diag;
      sys.damping.diag[right] += d_loc;
    }
    if (left >= 0 && right < static_cast<long>(n)) {
      sys.stiffness.off[left] += -k_loc;
      sys.mass.off[left] += m_off;
      sys.damping.off[left] += -d_loc;
    }
  }
  return sys;
}

State apply_generator(const SystemMatrices& matrices, const State& state) {
  const std::size_t n = matrices.n_dof;
  if (state.u.size() != n || state.v.size() != n)
    throw std::invalid_argument("apply_generator: state size mismatch");
  State out;
  out.u = state.v;
  out.v.resize(n);
  std::vector<double> tmp(n);
  matrices.stiffness.mul(state.u.data(), out.v.data());
  matrices.damping.mul(state.v.data(), tmp.data());
  for (std::size_t i = 0; i < n; ++i) out.v[i] = -(out.v[i] + tmp[i]);
  TridiagonalCholesky chol(matrices.mass);
  chol.solve(out.v.data());
  return out;
}

double energy(const SystemMatrices& matrices, const State& state) {
  if (state.u.size() != matrices.n_dof || state.v.size() != matrices.n_dof)
    throw std::invalid_argument("energy: state size mismatch");
  return matrices.stiffness.quadratic_form(state.u.data()) +
         matrices.mass.quadratic_form(state.v.data());
}

void write_matrix_dump(std::ostream& out, const SymTridiagonal& matrix) {
  const std::size_t n = matrix.size();
  out << "# n_dof=" << n << "\n";
  char buf[128];
  auto emit = [&](std::size_t i, std::size_t j, double v) {
    if (v == 0.0) return;
    std::snprintf(buf, sizeof buf, "%zu %zu %.17e\n", i, j, v);
    out << buf;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) emit(i, i - 1, matrix.off[i - 1]);
    emit(i, i, matrix.diag[i]);
    if (i + 1 < n) emit(i, i + 1, matrix.off[i]);
  }
}

}  // namespace kvstring
