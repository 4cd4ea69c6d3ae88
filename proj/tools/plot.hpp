#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fda/basis.hpp"

namespace fda::cli {

struct CurvePlot {
  std::string title;
  std::vector<double> t;
  MatrixXd values;  // one row per curve
  /// Colour class per curve; empty means a single colour.
  std::vector<int> labels;
  /// Legend text per label value, in label order.
  std::vector<std::pair<int, std::string>> legend;
};

/// Writes a standalone SVG line plot.
void write_svg(const std::filesystem::path& path, const CurvePlot& plot);

}  // namespace fda::cli
