#include "plot.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>

#include "fda/error.hpp"

namespace fda::cli {

namespace {

constexpr double kWidth = 800, kHeight = 500;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* colour(int label) {
  if (label <= 0) return "#555555";
  return kPalette[static_cast<std::size_t>(label - 1) % kPalette.size()];
}

}  // namespace

void write_svg(const std::filesystem::path& path, const CurvePlot& plot) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");

  const double t_lo = plot.t.front(), t_hi = plot.t.back();
  double y_lo = plot.values.minCoeff(), y_hi = plot.values.maxCoeff();
  if (y_hi - y_lo < 1e-12) {
    y_lo -= 1.0;
    y_hi += 1.0;
  }
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;
  const double w = kWidth - kLeft - kRight, h = kHeight - kTop - kBottom;
  auto px = [&](double t) { return kLeft + w * (t - t_lo) / (t_hi - t_lo); };
  auto py = [&](double y) { return kTop + h * (1.0 - (y - y_lo) / (y_hi - y_lo)); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"15\">" << escape(plot.title) << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double t = t_lo + (t_hi - t_lo) * i / 4.0, y = y_lo + (y_hi - y_lo) * i / 4.0;
    out << "<text x=\"" << px(t) << "\" y=\"" << kTop + h + 18 << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << fmt(y) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + w / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">t</text>\n";

  for (Eigen::Index i = 0; i < plot.values.rows(); ++i) {
    const int label = plot.labels.empty() ? 0 : plot.labels[static_cast<std::size_t>(i)];
    out << "<polyline fill=\"none\" stroke=\"" << colour(label) << "\" stroke-opacity=\"0.7\" stroke-width=\"1.2\" points=\"";
    for (std::size_t l = 0; l < plot.t.size(); ++l)
      out << fmt(px(plot.t[l])) << ',' << fmt(py(plot.values(i, static_cast<Eigen::Index>(l)))) << ' ';
    out << "\"/>\n";
  }

  double y = kTop + 10;
  for (const auto& [label, text] : plot.legend) {
    out << "<line x1=\"" << kWidth - kRight + 15 << "\" y1=\"" << y << "\" x2=\"" << kWidth - kRight + 40 << "\" y2=\"" << y
        << "\" stroke=\"" << colour(label) << "\" stroke-width=\"3\"/>\n";
    out << "<text x=\"" << kWidth - kRight + 46 << "\" y=\"" << y + 4 << "\">" << escape(text) << "</text>\n";
    y += 18;
  }
  out << "</svg>\n";
}

}  // namespace fda::cli
