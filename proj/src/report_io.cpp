#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fastrate/experiments.hpp"

namespace fastrate {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_csv(const std::vector<ResultRow>& rows) {
  std::string out = "experiment,n,replicate,seed,excess,se,wall_ms\r\n";
  for (const auto& r : rows) {
    out += csv_field(r.experiment);
    out += ',' + std::to_string(r.n);
    out += ',' + std::to_string(r.replicate);
    out += ',' + std::to_string(r.seed);
    out += ',' + fmt_double(r.excess);
    out += ',' + fmt_double(r.se);
    out += ',';
    if (r.wall_ms) out += fmt_double(*r.wall_ms);
    out += "\r\n";
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

void write_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  write_text(path, format_csv(rows));
}

void write_summary(const std::string& path, const nlohmann::json& summary) {
  write_text(path, summary.dump(2) + "\n");
}

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title) {
  constexpr double W = 640, H = 420, ml = 70, mr = 150, mt = 40, mb = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0) || !(s.y[i] > 0)) continue;
      x0 = std::min(x0, std::log10(s.x[i]));
      x1 = std::max(x1, std::log10(s.x[i]));
      y0 = std::min(y0, std::log10(s.y[i]));
      y1 = std::max(y1, std::log10(s.y[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  x0 = std::floor(x0), x1 = std::max(std::ceil(x1), x0 + 1);
  y0 = std::floor(y0), y1 = std::max(std::ceil(y1), y0 + 1);
  auto px = [&](double lx) { return ml + (lx - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double ly) { return H - mb - (ly - y0) / (y1 - y0) * (H - mt - mb); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"14\">" << title << "</text>\n";
  o << "<g stroke=\"#ccc\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double d = x0; d <= x1 + 1e-9; d += 1) {
    o << "<line x1=\"" << px(d) << "\" y1=\"" << mt << "\" x2=\"" << px(d) << "\" y2=\""
      << H - mb << "\"/>";
    o << "<text stroke=\"none\" x=\"" << px(d) << "\" y=\"" << H - mb + 16
      << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (double d = y0; d <= y1 + 1e-9; d += 1) {
    o << "<line x1=\"" << ml << "\" y1=\"" << py(d) << "\" x2=\"" << W - mr << "\" y2=\""
      << py(d) << "\"/>";
    o << "<text stroke=\"none\" x=\"" << ml - 6 << "\" y=\"" << py(d) + 4
      << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  o << "</g>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = colors[k % 5];
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0) || !(s.y[i] > 0)) continue;
      o << px(std::log10(s.x[i])) << ',' << py(std::log10(s.y[i])) << ' ';
    }
    o << "\"/>\n";
    o << "<text x=\"" << W - mr + 10 << "\" y=\"" << mt + 16 * (k + 1) << "\" fill=\"" << col
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace fastrate
