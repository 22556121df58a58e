#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "decolab/analytic_engine.hpp"

namespace decolab {

/// Two-column numeric table with a header line, written with %.17g so that
/// values round-trip exactly.
struct Series {
  std::string x_name;
  std::string y_name;
  std::vector<std::pair<double, double>> rows;
};

void write_pattern_csv(const IntensityProfile& profile, std::ostream& os);
void write_pattern_csv(const IntensityProfile& profile, const std::filesystem::path& path);

void write_series_csv(const Series& series, std::ostream& os);
void write_series_csv(const Series& series, const std::filesystem::path& path);

/// Generic CSV for tables with more than two columns.
void write_table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
                     std::ostream& os);

/// 800 x 500 line plot of the profile, x axis in micrometres (profile x in m).
std::string render_svg(const IntensityProfile& profile, const std::string& y_label);
void write_svg(const IntensityProfile& profile, const std::filesystem::path& path,
               const std::string& y_label = "intensity (normalized)");

/// Formats a double with 17 significant digits.
std::string format_g17(double v);

}  // namespace decolab
