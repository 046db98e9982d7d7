#include "plume/eval/svg.hpp"

#include "plume/core/error.hpp"
#include "plume/core/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace plume::eval {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_violin_svg(const std::filesystem::path& path, const std::string& title, const std::string& y_label,
                      const std::vector<ViolinSeries>& series, bool log10_axis) {
  std::vector<std::vector<double>> data;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    std::vector<double> v;
    for (double x : s.values) {
      if (!std::isfinite(x)) continue;
      if (log10_axis) {
        if (x <= 0.0) continue;
        x = std::log10(x);
      }
      v.push_back(x);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    data.push_back(std::move(v));
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-9) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  constexpr double kWidthPer = 110.0, kLeft = 70.0, kTop = 40.0, kPlotH = 300.0, kBottom = 50.0;
  const double width = kLeft + kWidthPer * static_cast<double>(std::max<std::size_t>(series.size(), 1)) + 20.0;
  const double height = kTop + kPlotH + kBottom;
  auto ymap = [&](double v) { return kTop + kPlotH * (hi - v) / (hi - lo); };

  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << fmt(width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
  os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
     << fmt(kTop + kPlotH) << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = lo + (hi - lo) * t / 5.0;
    os << "<text x=\"" << fmt(kLeft - 5) << "\" y=\"" << fmt(ymap(v) + 4) << "\" text-anchor=\"end\">" << fmt(v)
       << "</text>\n";
    os << "<line x1=\"" << fmt(kLeft - 3) << "\" y1=\"" << fmt(ymap(v)) << "\" x2=\"" << fmt(width - 20) << "\" y2=\""
       << fmt(ymap(v)) << "\" stroke=\"#ddd\"/>\n";
  }
  os << "<text transform=\"translate(16," << fmt(kTop + kPlotH / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(log10_axis ? "log10 " + y_label : y_label) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const double cx = kLeft + kWidthPer * (static_cast<double>(i) + 0.5);
    os << "<text x=\"" << fmt(cx) << "\" y=\"" << fmt(kTop + kPlotH + 18) << "\" text-anchor=\"middle\">"
       << escape(series[i].label) << "</text>\n";
    const auto& v = data[i];
    if (v.empty()) continue;
    const double sd = stddev(v);
    const double bw = sd > 0.0 ? 1.06 * sd * std::pow(static_cast<double>(v.size()), -0.2) : 0.0;
    if (bw > 0.0) {
      constexpr int kSteps = 60;
      const auto [vmin, vmax] = std::minmax_element(v.begin(), v.end());
      std::vector<std::pair<double, double>> pts;
      double peak = 0.0;
      for (int s = 0; s <= kSteps; ++s) {
        const double y = *vmin + (*vmax - *vmin) * s / kSteps;
        double dens = 0.0;
        for (double x : v) dens += std::exp(-0.5 * std::pow((y - x) / bw, 2));
        pts.emplace_back(y, dens);
        peak = std::max(peak, dens);
      }
      std::string d = "M";
      for (const auto& [y, dens] : pts) d += " " + fmt(cx + 45.0 * dens / peak) + "," + fmt(ymap(y));
      for (auto it = pts.rbegin(); it != pts.rend(); ++it) d += " " + fmt(cx - 45.0 * it->second / peak) + "," + fmt(ymap(it->first));
      d += " Z";
      os << "<path d=\"" << d << "\" fill=\"#8fb3d9\" fill-opacity=\"0.7\" stroke=\"#2b5d8c\"/>\n";
    }
    const double med = median(v);
    os << "<line x1=\"" << fmt(cx - 30) << "\" y1=\"" << fmt(ymap(med)) << "\" x2=\"" << fmt(cx + 30) << "\" y2=\""
       << fmt(ymap(med)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    for (double x : v) {
      os << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(ymap(x)) << "\" r=\"1.5\" fill=\"#333\"/>\n";
    }
  }
  os << "</svg>\n";
}

}  // namespace plume::eval
