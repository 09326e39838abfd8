#pragma once

#include <string>
#include <vector>

namespace tempogan {

//! Moving average with edge padding; output length equals input length.
std::vector<double> moving_average(const std::vector<double>& series, int window);

//! Parsed metrics table: one named column per scalar series.
struct MetricsTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data; // data[col][row]
};

MetricsTable read_metrics_csv(const std::string& path);

//! One SVG per loss column: raw series in a light tone, the window-101 moving
//! average on top in a dark one.
std::vector<std::string> plot_metrics(const std::string& metrics_path, const std::string& out_dir,
                                      int smooth_window = 101);

//! Minimal line chart used by plot_metrics; exposed for tests.
void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::vector<double>& raw, const std::vector<double>& smoothed);

} // namespace tempogan
