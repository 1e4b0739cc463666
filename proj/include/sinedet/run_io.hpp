#ifndef SINEDET_RUN_IO_HPP
#define SINEDET_RUN_IO_HPP

#include <map>
#include <string>
#include <vector>

namespace sinedet {

inline constexpr const char* kToolVersion = "1.0.0";

// Reproducibility record written next to every CLI output.  Serialized as
// JSON with stable key order.
struct RunManifest {
  std::string command;
  std::string version = kToolVersion;
  std::map<std::string, std::string> parameters;
  std::vector<std::string> outputs;
  std::map<std::string, double> residual_summary;
  double wall_time_seconds = 0.0;
  std::string to_json() const;
  void write(const std::string& path) const;
};

// CSV with a header row; every numeric cell printed with %.17g so runs are
// bitwise reproducible and round-trip through double exactly.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  void add_row(const std::vector<double>& row);
  void write(const std::string& path) const;
};

std::string format_full(double v);

// Minimal gnuplot script pointing at a CSV produced above: one plot per
// y column against the first column.
void write_plot_script(const std::string& script_path, const std::string& csv_path,
                       const std::vector<std::string>& columns,
                       const std::string& title, const std::string& ylabel);

}  // namespace sinedet

#endif
