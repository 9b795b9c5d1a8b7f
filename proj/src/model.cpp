#include "kvstring/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kvstring {

DampingProfile::DampingProfile(double alpha_) : alpha(alpha_) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::invalid_argument("DampingProfile: alpha out of [0,1)");
}

double damping_value(const DampingProfile& profile, double x) {
  if (!(x >= -1.0 && x <= 1.0)) throw std::invalid_argument("damping_value: x outside [-1,1]");
  if (x <= 0.0) return 0.0;
  return std::pow(x, profile.alpha);
}

RatePrediction predict_rates(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("predict_rates: alpha out of [0,1)");
  RatePrediction p;
  p.theta = (1.0 - alpha) / (2.0 - alpha);
  p.decay_order = (2.0 - alpha) / (1.0 - alpha);
  p.prior_order = (3.0 - alpha) / (2.0 * (1.0 - alpha));
  return p;
}

std::vector<std::string> validate_config(const RunConfig& c) {
  std::vector<std::string> errors;
  if (!(c.alpha >= 0.0 && c.alpha < 1.0)) errors.push_back("alpha out of [0,1)");
  if (c.n_elements < 2) errors.push_back("n_elements must be at least 2");
  if (c.n_elements % 2 != 0) errors.push_back("n_elements must be even");
  if (!(c.grading >= 1.0)) errors.push_back("grading must be >= 1");
  if (!(c.dt > 0.0)) errors.push_back("dt must be positive");
  if (!(c.t_final > 0.0)) errors.push_back("t_final must be positive");
  if (!(c.omega_min > 0.0)) errors.push_back("omega_min must be positive");
  if (!(c.omega_min < c.omega_max)) errors.push_back("omega_min must be below omega_max");
  if (c.omega_points < 1) errors.push_back("omega_points must be at least 1");
  if (c.output_dir.empty()) errors.push_back("output_dir must not be empty");
  return errors;
}

RunConfig validated(RunConfig config) {
  const auto errors = validate_config(config);
  if (!errors.empty()) {
    std::ostringstream msg;
    msg << "invalid configuration:";
    for (const auto& e : errors) msg << " " << e << ";";
    throw std::invalid_argument(msg.str());
  }
  return config;
}

}  // namespace kvstring
