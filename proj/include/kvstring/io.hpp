#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kvstring/analysis.hpp"
#include "kvstring/evolution.hpp"
#include "kvstring/resolvent.hpp"
#include "kvstring/spectral.hpp"

namespace kvstring {

// Shortest representation that round-trips a double exactly.
std::string format_double(double x);

// Writes via a temporary name in the same directory, renamed on success, so a
// failed run never leaves a partial artifact behind.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string energy_csv(const EnergyTrace& trace);
std::string spectrum_csv(const SpectrumResult& spectrum);
std::string branches_csv(std::span<const BranchPoint> table);
std::string resolvent_csv(const ResolventScan& scan);
std::string fit_json(double alpha, int n_elements, const RateFit& fit, double theta_predicted);
std::string hardy_csv(std::span<const HardyCase> cases);
std::string table_csv(std::span<const ComparisonRow> rows);
std::string table_txt(std::span<const ComparisonRow> rows);
std::string matrix_dump(const SymTridiagonal& matrix);

}  // namespace kvstring
