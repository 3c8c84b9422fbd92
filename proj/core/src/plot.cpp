#include "cslearn/plot.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cslearn {
namespace {

constexpr double kPanelWidth = 460.0;
constexpr double kPanelHeight = 320.0;
constexpr double kMargin = 60.0;
constexpr double kLegendRow = 18.0;
// Errors below this are drawn on the floor of the log axis.
constexpr double kErrorFloor = 1e-16;

constexpr std::array<const char*, 8> kColors{
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double number(const std::string& text, std::size_t row) {
  std::istringstream in(text);
  double v = 0.0;
  in >> v;
  if (text.empty() || !in || !(in >> std::ws).eof() || !std::isfinite(v)) {
    throw std::invalid_argument(
        fmt::format("trace row {}: '{}' is not a finite number", row, text));
  }
  return v;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) hi = lo + 1.0;
  }
};

// One panel: x linear in `xs`, y = log10(error).
void panel(std::ostream& out, const std::vector<TraceSeries>& series, double left,
           const char* x_label, bool use_bits) {
  Range xr;
  Range yr;
  for (const auto& s : series) {
    const auto& xs = use_bits ? s.bits : s.rounds;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xr.add(xs[i]);
      yr.add(std::log10(std::max(s.error[i], kErrorFloor)));
    }
  }
  yr.lo = std::floor(yr.lo);
  yr.hi = std::ceil(yr.hi);
  xr.pad();
  yr.pad();
  const double top = kMargin / 2.0;
  const auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * kPanelWidth; };
  const auto py = [&](double y) {
    return top + (yr.hi - y) / (yr.hi - yr.lo) * kPanelHeight;
  };

  out << fmt::format(
      "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
      "fill=\"none\" stroke=\"#333\"/>\n",
      left, top, kPanelWidth, kPanelHeight);
  const auto decades = static_cast<int>(yr.hi - yr.lo);
  const int step = std::max(1, decades / 8);
  for (int d = static_cast<int>(yr.lo); d <= static_cast<int>(yr.hi); d += step) {
    const double y = py(d);
    out << fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n"
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\" text-anchor=\"end\">1e{}</text>\n",
        left, y, left + kPanelWidth, y, left - 4.0, y + 4.0, d);
  }
  for (int i = 0; i <= 4; ++i) {
    const double x = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    out << fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"11\" "
        "text-anchor=\"middle\">{:.3g}</text>\n",
        px(x), top + kPanelHeight + 14.0, x);
  }
  out << fmt::format(
      "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
      left + kPanelWidth / 2.0, top + kPanelHeight + 32.0, x_label);
  out << fmt::format(
      "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 {:.2f} {:.2f})\">convergence error</text>\n",
      left - 42.0, top + kPanelHeight / 2.0, left - 42.0, top + kPanelHeight / 2.0);

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const auto& xs = use_bits ? s.bits : s.rounds;
    std::string points;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      points += fmt::format("{:.2f},{:.2f} ", px(xs[i]),
                            py(std::log10(std::max(s.error[i], kErrorFloor))));
    }
    if (!points.empty()) points.pop_back();
    out << fmt::format(
        "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        kColors[k % kColors.size()], points);
  }
}

}  // namespace

TraceSeries read_trace_csv(std::istream& in, std::string name) {
  TraceSeries s;
  s.name = std::move(name);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("trace is empty");
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "t" || header[1] != "error" ||
      header[2] != "bits") {
    throw std::invalid_argument("trace header must start with t,error,bits");
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument(
          fmt::format("trace row {}: expected {} columns, got {}", row, header.size(),
                      cells.size()));
    }
    s.rounds.push_back(number(cells[0], row));
    const double error = number(cells[1], row);
    if (error < 0.0) {
      throw std::invalid_argument(fmt::format("trace row {}: negative error", row));
    }
    s.error.push_back(error);
    s.bits.push_back(number(cells[2], row));
  }
  if (s.rounds.empty()) throw std::invalid_argument("trace has no rows");
  return s;
}

TraceSeries read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return read_trace_csv(in, path.stem().string());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_plot_svg(std::ostream& out, const std::vector<TraceSeries>& series) {
  if (series.empty()) throw std::invalid_argument("nothing to plot");
  const double width = 2.0 * kPanelWidth + 3.0 * kMargin;
  const double height =
      kPanelHeight + 2.0 * kMargin + kLegendRow * static_cast<double>(series.size());
  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "font-family=\"sans-serif\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      width, height);
  panel(out, series, kMargin, "rounds", false);
  panel(out, series, 2.0 * kMargin + kPanelWidth, "transmitted bits", true);
  const double legend_top = kMargin / 2.0 + kPanelHeight + 50.0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double y = legend_top + kLegendRow * static_cast<double>(k);
    out << fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
        "stroke-width=\"3\"/>\n"
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"12\">{}</text>\n",
        kMargin, y, kMargin + 24.0, y, kColors[k % kColors.size()], kMargin + 30.0,
        y + 4.0, escape(series[k].name));
  }
  out << "</svg>\n";
}

void plot_traces(const std::vector<std::filesystem::path>& inputs,
                 const std::filesystem::path& output) {
  if (inputs.empty()) throw std::invalid_argument("no trace files given");
  std::vector<TraceSeries> series;
  for (const auto& p : inputs) series.push_back(read_trace_csv(p));
  std::ostringstream svg;
  write_plot_svg(svg, series);
  std::ofstream out(output, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + output.string());
  out << svg.str();
  if (!out) throw std::runtime_error("failed writing " + output.string());
}

}  // namespace cslearn
