#include "kvstring/evolution.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kvstring {

InitialDataKind parse_initial_data_kind(std::string_view name) {
  if (name == "sine_displacement" || name == "sine") return InitialDataKind::sine_displacement;
  if (name == "bump_velocity" || name == "bump") return InitialDataKind::bump_velocity;
  if (name == "graph_normalized" || name == "graph") return InitialDataKind::graph_normalized;
  throw std::invalid_argument("unknown initial data kind: " + std::string(name));
}

State make_initial_data(const Mesh& mesh, const SystemMatrices& matrices, InitialDataKind kind) {
  const std::size_t n = matrices.n_dof;
  if (mesh.n_interior() != n) throw std::invalid_argument("make_initial_data: mesh/matrix mismatch");
  State state;
  state.u.assign(n, 0.0);
  state.v.assign(n, 0.0);
  switch (kind) {
    case InitialDataKind::sine_displacement:
    case InitialDataKind::graph_normalized:
      for (std::size_t i = 0; i < n; ++i)
        state.u[i] = std::sin(std::numbers::pi * (mesh.nodes[i + 1] + 1.0) / 2.0);
      break;
    case InitialDataKind::bump_velocity:
      for (std::size_t i = 0; i < n; ++i) {
        const double x = mesh.nodes[i + 1];
        const double w = 1.0 - x * x;
        state.v[i] = w * w;
      }
      break;
  }
  if (kind == InitialDataKind::graph_normalized) {
    const double total = energy(matrices, state) + energy(matrices, apply_generator(matrices, state));
    const double scale = 1.0 / std::sqrt(total);
    for (auto& x : state.u) x *= scale;
  }
  return state;
}

namespace {

// dt < 0 steps backward (used to probe reversibility of the undamped flow)
double checked_dt(double dt) {
  if (dt == 0.0 || !std::isfinite(dt)) throw std::invalid_argument("MidpointStepper: bad dt");
  return dt;
}

}  // namespace

MidpointStepper::MidpointStepper(const SystemMatrices& matrices, double dt)
    : matrices_(&matrices),
      dt_(checked_dt(dt)),
      schur_(combine(4.0 / (dt * dt), matrices.mass, 2.0 / dt, matrices.damping, 1.0,
                     matrices.stiffness)) {}

State MidpointStepper::step(const State& state, std::vector<double>* v_mid) const {
  const std::size_t n = matrices_->n_dof;
  if (state.u.size() != n || state.v.size() != n)
    throw std::invalid_argument("step: state size mismatch");

  // rhs = (4/dt^2) M u + (4/dt) M v - K u + (2/dt) D u
  std::vector<double> rhs(n), tmp(n);
  matrices_->mass.mul(state.u.data(), rhs.data());
  for (std::size_t i = 0; i < n; ++i) rhs[i] *= 4.0 / (dt_ * dt_);
  matrices_->mass.mul(state.v.data(), tmp.data());
  for (std::size_t i = 0; i < n; ++i) rhs[i] += (4.0 / dt_) * tmp[i];
  matrices_->stiffness.mul(state.u.data(), tmp.data());
  for (std::size_t i = 0; i < n; ++i) rhs[i] -= tmp[i];
  matrices_->damping.mul(state.u.data(), tmp.data());
  for (std::size_t i = 0; i < n; ++i) rhs[i] += (2.0 / dt_) * tmp[i];

  schur_.solve(rhs.data());

  State next;
  next.u = std::move(rhs);
  next.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) next.v[i] = (2.0 / dt_) * (next.u[i] - state.u[i]) - state.v[i];
  if (v_mid) {
    v_mid->resize(n);
    for (std::size_t i = 0; i < n; ++i) (*v_mid)[i] = (next.u[i] - state.u[i]) / dt_;
  }
  return next;
}

State step(const SystemMatrices& matrices, const State& state, double dt) {
  return MidpointStepper(matrices, dt).step(state);
}

EnergyTrace simulate(const SystemMatrices& matrices, const State& initial, double t_final,
                     double dt, int sample_every) {
  if (!(t_final > 0.0)) throw std::invalid_argument("simulate: t_final must be positive");
  if (sample_every < 1) throw std::invalid_argument("simulate: sample_every must be >= 1");

  MidpointStepper stepper(matrices, dt);
  EnergyTrace trace;
  trace.alpha = matrices.alpha;
  trace.n_elements = matrices.n_elements;
  trace.dt = dt;

  const long n_steps = static_cast<long>(std::ceil(t_final / dt - 1e-9));
  trace.times.reserve(static_cast<std::size_t>(n_steps / sample_every) + 2);
  trace.energies.reserve(trace.times.capacity());
  trace.times.push_back(0.0);
  trace.energies.push_back(energy(matrices, initial));

  State state = initial;
  for (long k = 1; k <= n_steps; ++k) {
    state = stepper.step(state);
    if (k % sample_every == 0 || k == n_steps) {
      trace.times.push_back(static_cast<double>(k) * dt);
      trace.energies.push_back(energy(matrices, state));
    }
  }
  return trace;
}

LineFit fit_decay_exponent(const EnergyTrace& trace, double t_lo, double t_hi) {
  if (!(t_lo > 0.0 && t_lo < t_hi)) throw std::invalid_argument("fit_decay_exponent: bad window");
  if (trace.energies.empty()) throw std::invalid_argument("fit_decay_exponent: empty trace");

  const double floor = trace.energies.front() * 1e-28;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    const double t = trace.times[i];
    if (t < t_lo || t > t_hi) continue;
    const double e = trace.energies[i];
    if (!(e > 0.0) || e < floor)
      throw std::invalid_argument("fit_decay_exponent: energy at round-off floor inside window");
    lx.push_back(std::log(t));
    ly.push_back(std::log(e));
  }
  if (lx.size() < 20)
    throw std::invalid_argument("fit_decay_exponent: window holds fewer than 20 samples");
  return fit_line(lx, ly);
}

}  // namespace kvstring
