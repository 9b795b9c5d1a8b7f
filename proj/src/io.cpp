#include "kvstring/io.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace kvstring {

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string energy_csv(const EnergyTrace& trace) {
  std::string out = "t,energy\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    out += format_double(trace.times[i]);
    out += ',';
    out += format_double(trace.energies[i]);
    out += '\n';
  }
  return out;
}

std::string spectrum_csv(const SpectrumResult& spectrum) {
  std::string out = "re,im\n";
  for (const auto& ev : spectrum.eigenvalues) {
    out += format_double(ev.real());
    out += ',';
    out += format_double(ev.imag());
    out += '\n';
  }
  return out;
}

std::string branches_csv(std::span<const BranchPoint> table) {
  std::string out = "alpha,k,re,im\n";
  for (const auto& row : table) {
    out += format_double(row.alpha);
    out += ',';
    out += std::to_string(row.k);
    out += ',';
    out += format_double(row.eigenvalue.real());
    out += ',';
    out += format_double(row.eigenvalue.imag());
    out += '\n';
  }
  return out;
}

std::string resolvent_csv(const ResolventScan& scan) {
  std::string out = "omega,sigma_min,resolvent_norm\n";
  for (std::size_t i = 0; i < scan.omegas.size(); ++i) {
    out += format_double(scan.omegas[i]);
    out += ',';
    out += format_double(scan.sigma_mins[i]);
    out += ',';
    out += format_double(1.0 / scan.sigma_mins[i]);
    out += '\n';
  }
  return out;
}

std::string fit_json(double alpha, int n_elements, const RateFit& fit, double theta_predicted) {
  nlohmann::json j;  // keys serialize lexicographically sorted
  j["alpha"] = alpha;
  j["n_elements"] = n_elements;
  j["theta_fit"] = fit.slope;
  j["theta_predicted"] = theta_predicted;
  j["r_lower"] = fit.r_lower;
  j["window"] = {fit.omega_lo, fit.omega_hi};
  j["residual"] = fit.residual;
  return j.dump(2) + "\n";
}

std::string hardy_csv(std::span<const HardyCase> cases) {
  std::string out = "alpha,beta,ratio,ratio_coarse,ratio_fine,n_samples\n";
  for (const auto& hc : cases) {
    out += format_double(hc.alpha);
    out += ',';
    out += format_double(hc.beta);
    out += ',';
    out += format_double(hc.ratio);
    out += ',';
    out += format_double(hc.ratio_coarse);
    out += ',';
    out += format_double(hc.ratio_fine);
    out += ',';
    out += std::to_string(hc.n_samples);
    out += '\n';
  }
  return out;
}

std::string table_csv(std::span<const ComparisonRow> rows) {
  std::string out = "alpha,decay_order,prior_order,theta_fit,slope_energy\n";
  for (const auto& row : rows) {
    out += format_double(row.alpha);
    out += ',';
    out += format_double(row.decay_order);
    out += ',';
    out += format_double(row.prior_order);
    out += ',';
    if (row.theta_fit) out += format_double(*row.theta_fit);
    out += ',';
    if (row.slope_energy) out += format_double(*row.slope_energy);
    out += '\n';
  }
  return out;
}

std::string table_txt(std::span<const ComparisonRow> rows) {
  // Aligned text table in the style of the summary table of the model:
  // exponent | damping coefficient | decay rate (with the previously known rate).
  auto rate_cell = [](const ComparisonRow& row) {
    char buf[96];
    if (row.alpha == 0.0)
      std::snprintf(buf, sizeof buf, "optimal polynomial decay rate t^-%g", row.decay_order);
    else
      std::snprintf(buf, sizeof buf, "polynomial decay rate t^-%g", row.decay_order);
    return std::string(buf);
  };
  auto prior_cell = [](const ComparisonRow& row) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "t^-%g", row.prior_order);
    return std::string(buf);
  };

  std::vector<std::array<std::string, 4>> cells;
  cells.push_back({"alpha", "damping coefficient", "decay rate of solution", "previous rate"});
  for (const auto& row : rows) {
    char a[32];
    std::snprintf(a, sizeof a, "%g", row.alpha);
    cells.push_back({a, "x^alpha", rate_cell(row), prior_cell(row)});
  }

  std::array<std::size_t, 4> width{};
  for (const auto& line : cells)
    for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], line[c].size());

  std::ostringstream out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    out << "|";
    for (std::size_t c = 0; c < 4; ++c) {
      out << ' ' << cells[r][c] << std::string(width[c] - cells[r][c].size(), ' ') << " |";
    }
    out << '\n';
    if (r == 0) {
      out << "|";
      for (std::size_t c = 0; c < 4; ++c) out << std::string(width[c] + 2, '-') << "|";
      out << '\n';
    }
  }
  return out.str();
}

std::string matrix_dump(const SymTridiagonal& matrix) {
  std::ostringstream out;
  write_matrix_dump(out, matrix);
  return out.str();
}

}  // namespace kvstring
