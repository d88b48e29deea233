#pragma once

#include <string>
#include <vector>

#include "hubreg/experiments.hpp"
#include "hubreg/types.hpp"

namespace hubreg::csv {

/// Shortest decimal string that round-trips the exact binary double.
std::string format_double(double value);

/// Dataset file: optional '#' provenance lines, a `y,x1,...,xd` header,
/// one observation per row.
void write_dataset(const std::string& path, const Dataset& data,
                   const std::vector<std::string>& provenance);
Dataset read_dataset(const std::string& path);

/// Vector file: '#' provenance lines, then `index,value` rows.
void write_indexed_vector(const std::string& path, const Vector& v,
                          const std::vector<std::string>& provenance);
Vector read_indexed_vector(const std::string& path);

void write_sweep_rows(const std::string& path, const SweepReport& report,
                      const std::vector<std::string>& provenance);

/// Two-column-per-estimator plot data: n, log n, log median l2 error.
void write_sweep_plot(const std::string& path, const SweepReport& report,
                      const std::vector<std::string>& provenance);

/// Minimal self-contained SVG line chart of the sweep medians.
void write_sweep_svg(const std::string& path, const SweepReport& report);

void write_probe_rows(const std::string& path, const ProbeReport& report,
                      const std::vector<std::string>& provenance);

}  // namespace hubreg::csv
