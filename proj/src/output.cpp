#include "decolab/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "decolab/errors.hpp"

namespace decolab {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InvalidParameter("cannot open " + path.string() + " for writing");
  return os;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw InvalidParameter("write failed for " + path.string());
}

// Short tick label, e.g. 1.5 or -200.
std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_pattern_csv(const IntensityProfile& profile, std::ostream& os) {
  os << "x_m,intensity_norm\n";
  for (std::size_t i = 0; i < profile.size(); ++i) {
    os << format_g17(profile.x[i]) << ',' << format_g17(profile.intensity[i]) << '\n';
  }
}

void write_pattern_csv(const IntensityProfile& profile, const std::filesystem::path& path) {
  auto os = open_for_write(path);
  write_pattern_csv(profile, os);
  finish(os, path);
}

void write_series_csv(const Series& series, std::ostream& os) {
  os << series.x_name << ',' << series.y_name << '\n';
  for (const auto& [x, y] : series.rows) os << format_g17(x) << ',' << format_g17(y) << '\n';
}

void write_series_csv(const Series& series, const std::filesystem::path& path) {
  auto os = open_for_write(path);
  write_series_csv(series, os);
  finish(os, path);
}

void write_table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
                     std::ostream& os) {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_g17(r[i]);
    os << '\n';
  }
}

std::string render_svg(const IntensityProfile& profile, const std::string& y_label) {
  if (profile.size() == 0) throw InvalidParameter("cannot plot an empty profile");
  constexpr double W = 800, H = 500, left = 80, right = 20, top = 20, bottom = 60;
  const double pw = W - left - right;
  const double ph = H - top - bottom;

  std::vector<double> xs(profile.x.size());
  std::transform(profile.x.begin(), profile.x.end(), xs.begin(), [](double x) { return x * 1e6; });
  const auto [xmin_it, xmax_it] = std::minmax_element(xs.begin(), xs.end());
  double x0 = *xmin_it, x1 = *xmax_it;
  if (x1 <= x0) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  const auto [ymin_it, ymax_it] = std::minmax_element(profile.intensity.begin(), profile.intensity.end());
  double y0 = std::min(0.0, *ymin_it), y1 = *ymax_it;
  if (y1 <= y0) y1 = y0 + (y0 == 0.0 ? 1.0 : std::abs(y0));

  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };
  char buf[96];

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\" width=\"800\" height=\"500\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
  s << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
  std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", left,
                top + ph, left + pw, top + ph);
  s << buf;
  std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", left, top,
                left, top + ph);
  s << buf;

  const double xs_step = nice_step(x1 - x0);
  for (double v = std::ceil(x0 / xs_step) * xs_step; v <= x1 + 1e-9 * xs_step; v += xs_step) {
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">", px(v), top + ph + 18);
    s << buf << tick(v) << "</text>\n";
  }
  const double ys_step = nice_step(y1 - y0);
  for (double v = std::ceil(y0 / ys_step) * ys_step; v <= y1 + 1e-9 * ys_step; v += ys_step) {
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">", left - 6, py(v) + 4);
    s << buf << tick(v) << "</text>\n";
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">x (um)</text>\n";
  s << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << top + ph / 2 << ")\">" << y_label << "</text>\n";
  s << "</g>\n";

  s << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", i ? " " : "", px(xs[i]), py(profile.intensity[i]));
    s << buf;
  }
  s << "\"/>\n</svg>\n";
  return s.str();
}

void write_svg(const IntensityProfile& profile, const std::filesystem::path& path, const std::string& y_label) {
  const std::string svg = render_svg(profile, y_label);
  auto os = open_for_write(path);
  os << svg;
  finish(os, path);
}

}  // namespace decolab
