#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cslearn {

/// The t, error and bits columns of one trace CSV.
struct TraceSeries {
  std::string name;
  std::vector<double> rounds;
  std::vector<double> error;
  std::vector<double> bits;
};

/// Parses a trace written by write_trace_csv. Throws std::invalid_argument
/// on a malformed or empty trace.
[[nodiscard]] TraceSeries read_trace_csv(std::istream& in, std::string name);
[[nodiscard]] TraceSeries read_trace_csv(const std::filesystem::path& path);

/// Two panels, error vs rounds and error vs bits, log-scale error axis, one
/// polyline per series and a legend.
void write_plot_svg(std::ostream& out, const std::vector<TraceSeries>& series);

/// Reads every input (series named after the file stem) and writes the SVG.
/// Nothing is written when any input fails to parse.
void plot_traces(const std::vector<std::filesystem::path>& inputs,
                 const std::filesystem::path& output);

}  // namespace cslearn
