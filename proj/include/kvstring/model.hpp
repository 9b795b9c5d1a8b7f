#pragma once

#include <string>
#include <vector>

namespace kvstring {

// Damping coefficient of the string: zero on [-1,0], x^alpha on (0,1].
// The exponent controls how fast the damping degenerates at the interface.
struct DampingProfile {
  double alpha;

  explicit DampingProfile(double alpha_);
};

double damping_value(const DampingProfile& profile, double x);

// Closed-form rate predictions for a given exponent:
//   theta        growth exponent of the resolvent norm along the imaginary axis,
//   decay_order  gamma in the t^-gamma semigroup decay (1/theta),
//   prior_order  exponent of the previously best known rate.
struct RatePrediction {
  double theta;
  double decay_order;
  double prior_order;
};

RatePrediction predict_rates(double alpha);

struct RunConfig {
  double alpha = 0.5;
  int n_elements = 128;
  double grading = 1.0;
  double dt = 1e-3;
  double t_final = 10.0;
  double omega_min = 10.0;
  double omega_max = 100.0;
  int omega_points = 100;
  long long seed = 0;
  std::string output_dir = "out";
};

// Checks every RunConfig invariant; returns one message per violation (empty
// means the config is valid). Field names appear in the messages.
std::vector<std::string> validate_config(const RunConfig& config);

// Same checks, throwing std::invalid_argument with all messages joined.
RunConfig validated(RunConfig config);

}  // namespace kvstring
