#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace plume::eval {

struct ViolinSeries {
  std::string label;
  std::vector<double> values;
};

/// Side-by-side violin plots (Gaussian KDE outline plus a median tick) in a
/// standalone SVG. With `log10_axis` the values are plotted as log10 and
/// non-positive values are dropped.
void write_violin_svg(const std::filesystem::path& path, const std::string& title, const std::string& y_label,
                      const std::vector<ViolinSeries>& series, bool log10_axis);

}  // namespace plume::eval
