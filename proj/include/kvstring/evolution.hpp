#pragma once

#include <string_view>
#include <vector>

#include "kvstring/assembly.hpp"
#include "kvstring/fitting.hpp"

namespace kvstring {

// Sampled energy history of one simulation, with the configuration echoed so
// a trace file is self-describing.
struct EnergyTrace {
  std::vector<double> times;
  std::vector<double> energies;
  double alpha = 0.0;
  int n_elements = 0;
  double dt = 0.0;
};

enum class InitialDataKind {
  sine_displacement,  // u interpolates sin(pi (x+1)/2), v = 0
  bump_velocity,      // u = 0, v interpolates (1-x^2)^2
  graph_normalized,   // sine_displacement rescaled so E(U0) + E(A U0) = 1
};

InitialDataKind parse_initial_data_kind(std::string_view name);

State make_initial_data(const Mesh& mesh, const SystemMatrices& matrices, InitialDataKind kind);

// One step of the implicit midpoint rule (I - dt/2 A)U+ = (I + dt/2 A)U,
// realised through a single SPD solve with (4/dt^2)M + (2/dt)D + K. The
// factorisation is reused across steps.
class MidpointStepper {
 public:
  MidpointStepper(const SystemMatrices& matrices, double dt);

  double dt() const { return dt_; }

  // Advances one step. If v_mid is non-null it receives (v + v+)/2, the
  // midpoint velocity entering the discrete dissipation identity
  //   E(U+) - E(U) = -2 dt v_mid^T D v_mid.
  State step(const State& state, std::vector<double>* v_mid = nullptr) const;

 private:
  const SystemMatrices* matrices_;
  double dt_;
  TridiagonalCholesky schur_;
};

// Convenience one-shot form.
State step(const SystemMatrices& matrices, const State& state, double dt);

EnergyTrace simulate(const SystemMatrices& matrices, const State& initial, double t_final,
                     double dt, int sample_every = 1);

// Least-squares slope of log(energy) against log(t) over [t_lo, t_hi].
// Requires at least 20 samples with energy above the round-off floor.
LineFit fit_decay_exponent(const EnergyTrace& trace, double t_lo, double t_hi);

}  // namespace kvstring
