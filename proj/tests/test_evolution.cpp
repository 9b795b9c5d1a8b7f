#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "kvstring/evolution.hpp"
#include "kvstring/oracles.hpp"
#include "kvstring/rng.hpp"

using namespace kvstring;

namespace {

struct Setup {
  Mesh mesh;
  SystemMatrices sys;
  Setup(int n, double alpha, double grading = 1.0)
      : mesh(build_mesh(n, grading)), sys(assemble(mesh, DampingProfile(alpha))) {}
};

SystemMatrices without_damping(SystemMatrices sys) {
  sys.damping = SymTridiagonal(sys.n_dof);
  return sys;
}

double state_distance(const SystemMatrices& sys, const State& a, const State& b) {
  State d;
  d.u.resize(sys.n_dof);
  d.v.resize(sys.n_dof);
  for (std::size_t i = 0; i < sys.n_dof; ++i) {
    d.u[i] = a.u[i] - b.u[i];
    d.v[i] = a.v[i] - b.v[i];
  }
  return std::sqrt(energy(sys, d));
}

}  // namespace

TEST_CASE("initial data kinds") {
  const Setup s(4, 0.5);
  const State sine = make_initial_data(s.mesh, s.sys, InitialDataKind::sine_displacement);
  const double r2 = std::sqrt(2.0) / 2.0;
  CHECK(sine.u[0] == doctest::Approx(r2).epsilon(1e-15));
  CHECK(sine.u[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sine.u[2] == doctest::Approx(r2).epsilon(1e-15));
  for (double v : sine.v) CHECK(v == 0.0);

  const State bump = make_initial_data(s.mesh, s.sys, InitialDataKind::bump_velocity);
  for (double u : bump.u) CHECK(u == 0.0);
  CHECK(energy(s.sys, bump) ==
        doctest::Approx(s.sys.mass.quadratic_form(bump.v.data())).epsilon(1e-15));

  const State graph = make_initial_data(s.mesh, s.sys, InitialDataKind::graph_normalized);
  const double total = energy(s.sys, graph) + energy(s.sys, apply_generator(s.sys, graph));
  CHECK(std::abs(total - 1.0) <= 1e-12);

  CHECK_THROWS_AS(parse_initial_data_kind("fourier"), std::invalid_argument);
  CHECK(parse_initial_data_kind("sine") == InitialDataKind::sine_displacement);
  CHECK(parse_initial_data_kind("graph_normalized") == InitialDataKind::graph_normalized);
}

TEST_CASE("midpoint step conserves energy exactly when undamped") {
  const Setup s(32, 0.5);
  const SystemMatrices undamped = without_damping(s.sys);
  State state = make_initial_data(s.mesh, undamped, InitialDataKind::sine_displacement);
  const double e0 = energy(undamped, state);
  MidpointStepper stepper(undamped, 0.01);
  for (int k = 0; k < 200; ++k) state = stepper.step(state);
  CHECK(std::abs(energy(undamped, state) - e0) <= 1e-12 * e0);
}

TEST_CASE("zero state stays zero") {
  const Setup s(8, 0.3);
  State zero;
  zero.u.assign(s.sys.n_dof, 0.0);
  zero.v.assign(s.sys.n_dof, 0.0);
  const State next = step(s.sys, zero, 0.1);
  for (double x : next.u) CHECK(x == 0.0);
  for (double x : next.v) CHECK(x == 0.0);
}

TEST_CASE("one step is third-order accurate against the matrix exponential") {
  const Setup s(8, 0.5);
  const State u0 = make_initial_data(s.mesh, s.sys, InitialDataKind::sine_displacement);
  double err_coarse = 0.0, err_fine = 0.0;
  for (double dt : {1e-3, 5e-4}) {
    const Eigen::MatrixXd prop = oracles::expm_propagator(s.sys, dt);
    const State exact = oracles::unpack_state(prop * oracles::pack_state(u0));
    const State approx = step(s.sys, u0, dt);
    (dt == 1e-3 ? err_coarse : err_fine) = state_distance(s.sys, approx, exact);
  }
  const double order = std::log2(err_coarse / err_fine);
  CHECK(order >= 2.7);  // local truncation order 3
  CHECK(err_coarse <= 1e-6);
}

TEST_CASE("trajectory matches the dense exponential oracle at t=1") {
  const Setup s(8, 0.5);
  const State u0 = make_initial_data(s.mesh, s.sys, InitialDataKind::sine_displacement);
  const double dt = 1e-4;
  const int sample_every = 1000;  // every 0.1 seconds
  const EnergyTrace trace = simulate(s.sys, u0, 1.0, dt, sample_every);

  const Eigen::MatrixXd prop = oracles::expm_propagator(s.sys, dt * sample_every);
  Eigen::VectorXd x = oracles::pack_state(u0);
  const double e0 = trace.energies.front();
  for (std::size_t k = 1; k < trace.times.size(); ++k) {
    x = prop * x;
    const double exact = oracles::dense_energy(s.sys, oracles::unpack_state(x));
    CHECK(std::abs(trace.energies[k] - exact) <= 1e-6 * e0);
  }
}

TEST_CASE("undamped trace is constant over many steps") {
  const Setup s(16, 0.5);
  const SystemMatrices undamped = without_damping(s.sys);
  const State u0 = make_initial_data(s.mesh, undamped, InitialDataKind::bump_velocity);
  const EnergyTrace trace = simulate(undamped, u0, 10.0, 1e-3, 100);
  const double e0 = trace.energies.front();
  for (double e : trace.energies) CHECK(std::abs(e - e0) <= 1e-10 * e0);
  for (std::size_t i = 1; i < trace.times.size(); ++i) CHECK(trace.times[i] > trace.times[i - 1]);
}

TEST_CASE("damped smooth data decays strictly") {
  const Setup s(64, 0.0);
  const State u0 = make_initial_data(s.mesh, s.sys, InitialDataKind::sine_displacement);
  const EnergyTrace trace = simulate(s.sys, u0, 2.0, 1e-3, 50);
  for (std::size_t i = 1; i < trace.energies.size(); ++i)
    CHECK(trace.energies[i] < trace.energies[i - 1]);
}

TEST_CASE("unconditional stability across step sizes") {
  const Setup s(32, 0.25);
  const State u0 = make_initial_data(s.mesh, s.sys, InitialDataKind::bump_velocity);
  for (double dt : {1e-4, 1e-2, 1.0}) {
    const double t_final = dt * 300;
    const EnergyTrace trace = simulate(s.sys, u0, t_final, dt, 1);
    const double slack = 1e-12 * trace.energies.front();
    for (std::size_t i = 1; i < trace.energies.size(); ++i)
      CHECK(trace.energies[i] <= trace.energies[i - 1] + slack);
  }
}

TEST_CASE("dissipation bookkeeping is exact") {
  // E(U_0) - E(U_N) = 2 dt sum v_mid^T D v_mid for the midpoint rule
  const Setup s(32, 0.5);
  State state = make_initial_data(s.mesh, s.sys, InitialDataKind::sine_displacement);
  const double dt = 1e-2;
  MidpointStepper stepper(s.sys, dt);
  const double e0 = energy(s.sys, state);
  double dissipated = 0.0;
  std::vector<double> v_mid;
  for (int k = 0; k < 500; ++k) {
    state = stepper.step(state, &v_mid);
    dissipated += 2.0 * dt * s.sys.damping.quadratic_form(v_mid.data());
  }
  const double drop = e0 - energy(s.sys, state);
  CHECK(drop > 0.0);
  CHECK(std::abs(drop - dissipated) <= 1e-8 * drop);
}

TEST_CASE("undamped stepping is reversible") {
  const Setup s(24, 0.5);
  const SystemMatrices undamped = without_damping(s.sys);
  const State u0 = make_initial_data(s.mesh, undamped, InitialDataKind::sine_displacement);
  MidpointStepper forward(undamped, 0.05);
  MidpointStepper backward(undamped, -0.05);
  State state = u0;
  for (int k = 0; k < 40; ++k) state = forward.step(state);
  for (int k = 0; k < 40; ++k) state = backward.step(state);
  CHECK(state_distance(undamped, state, u0) <= 1e-10 * std::sqrt(energy(undamped, u0)));
}

TEST_CASE("decay exponent fitting on synthetic traces") {
  EnergyTrace power;
  power.dt = 1.0;
  for (int i = 1; i <= 200; ++i) {
    const double t = 0.5 * i;
    power.times.push_back(t);
    power.energies.push_back(std::pow(t, -4.0));
  }
  const LineFit f1 = fit_decay_exponent(power, 1.0, 100.0);
  CHECK(std::abs(f1.slope + 4.0) <= 1e-8);
  CHECK(f1.residual <= 1e-10);

  EnergyTrace flat = power;
  for (auto& e : flat.energies) e = 3.0;
  const LineFit f2 = fit_decay_exponent(flat, 1.0, 100.0);
  CHECK(std::abs(f2.slope) <= 1e-12);

  CHECK_THROWS_AS(fit_decay_exponent(power, 90.0, 95.0), std::invalid_argument);  // < 20 samples
  EnergyTrace floored = power;
  floored.energies[50] = 0.0;
  CHECK_THROWS_AS(fit_decay_exponent(floored, 1.0, 100.0), std::invalid_argument);
}

TEST_CASE("decay-slope fits agree with the matrix exponential oracle") {
  // moderate mesh so the dense propagator stays cheap; both traces are fitted
  // over the same window and must see the same decay
  const Setup s(256, 0.0);
  const State u0 = make_initial_data(s.mesh, s.sys, InitialDataKind::graph_normalized);
  const double dt = 1e-3;
  const int sample_every = 200;  // 0.2 s sampling
  const EnergyTrace trace = simulate(s.sys, u0, 40.0, dt, sample_every);

  EnergyTrace oracle;
  oracle.alpha = trace.alpha;
  oracle.n_elements = trace.n_elements;
  oracle.dt = dt;
  const Eigen::MatrixXd prop = oracles::expm_propagator(s.sys, dt * sample_every);
  Eigen::VectorXd x = oracles::pack_state(u0);
  oracle.times.push_back(0.0);
  oracle.energies.push_back(energy(s.sys, u0));
  for (std::size_t k = 1; k < trace.times.size(); ++k) {
    x = prop * x;
    oracle.times.push_back(trace.times[k]);
    oracle.energies.push_back(oracles::dense_energy(s.sys, oracles::unpack_state(x)));
  }
  const LineFit fit_mid = fit_decay_exponent(trace, 10.0, 40.0);
  const LineFit fit_exp = fit_decay_exponent(oracle, 10.0, 40.0);
  CHECK(std::abs(fit_mid.slope - fit_exp.slope) <= 0.05);
  CHECK(fit_mid.slope <= -3.5);  // consistent with second-order norm decay
}

TEST_CASE("simulate validates its inputs") {
  const Setup s(8, 0.1);
  const State u0 = make_initial_data(s.mesh, s.sys, InitialDataKind::sine_displacement);
  CHECK_THROWS_AS(simulate(s.sys, u0, -1.0, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate(s.sys, u0, 1.0, 0.1, 0), std::invalid_argument);
  CHECK_THROWS_AS(MidpointStepper(s.sys, 0.0), std::invalid_argument);
}
