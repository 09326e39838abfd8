#include "tempogan/plot.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tempogan {

namespace fs = std::filesystem;

std::vector<double> moving_average(const std::vector<double>& series, int window) {
    if (window < 1) throw std::runtime_error("moving_average: window must be >= 1");
    const int n = int(series.size());
    std::vector<double> out(size_t(n), 0.0);
    const int half = window / 2;
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) {
            int j = std::clamp(i + k, 0, n - 1); // edge padding
            acc += series[size_t(j)];
        }
        out[size_t(i)] = acc / double(2 * half + 1);
    }
    return out;
}

MetricsTable read_metrics_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("metrics: cannot open " + path);
    MetricsTable t;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("metrics: empty file " + path);
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
    }
    t.data.assign(t.columns.size(), {});
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',') && col < t.columns.size())
            t.data[col++].push_back(std::stod(cell));
        if (col != t.columns.size())
            throw std::runtime_error("metrics: ragged row in " + path);
    }
    if (t.data.empty() || t.data[0].empty())
        throw std::runtime_error("metrics: no data rows in " + path);
    return t;
}

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::vector<double>& raw, const std::vector<double>& smoothed) {
    const int W = 960, H = 420, ml = 70, mr = 20, mt = 40, mb = 40;
    double lo = raw[0], hi = raw[0];
    for (double v : raw) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : smoothed) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo < 1e-12) {
        hi += 0.5;
        lo -= 0.5;
    }
    const double n = double(raw.size());
    auto px = [&](std::size_t i) { return ml + (W - ml - mr) * (n > 1 ? double(i) / (n - 1) : 0.5); };
    auto py = [&](double v) { return mt + (H - mt - mb) * (1.0 - (v - lo) / (hi - lo)); };

    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("plot: cannot write " + path);
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-family='sans-serif' "
          "font-size='16'>"
       << title << "</text>\n";
    os << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
       << "' stroke='#888'/>\n";
    os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
       << "' stroke='#888'/>\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", hi);
    os << "<text x='" << ml - 6 << "' y='" << mt + 5
       << "' text-anchor='end' font-family='sans-serif' font-size='11'>" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.4g", lo);
    os << "<text x='" << ml - 6 << "' y='" << H - mb
       << "' text-anchor='end' font-family='sans-serif' font-size='11'>" << buf << "</text>\n";

    auto polyline = [&](const std::vector<double>& series, const char* color, double width) {
        os << "<polyline fill='none' stroke='" << color << "' stroke-width='" << width
           << "' points='";
        for (std::size_t i = 0; i < series.size(); ++i)
            os << px(i) << "," << py(series[i]) << (i + 1 < series.size() ? " " : "");
        os << "'/>\n";
    };
    polyline(raw, "#9ecbff", 1.0);      // light: full data
    polyline(smoothed, "#1f4e9c", 1.8); // dark: smoothed
    os << "</svg>\n";
}

std::vector<std::string> plot_metrics(const std::string& metrics_path, const std::string& out_dir,
                                      int smooth_window) {
    MetricsTable t = read_metrics_csv(metrics_path);
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (t.columns[c] == "iteration") continue;
        const std::vector<double>& raw = t.data[c];
        std::vector<double> smooth = moving_average(raw, smooth_window);
        const std::string path = (fs::path(out_dir) / (t.columns[c] + ".svg")).string();
        write_line_chart_svg(path, t.columns[c], raw, smooth);
        written.push_back(path);
    }
    if (written.empty()) throw std::runtime_error("plot: no data columns in " + metrics_path);
    return written;
}

} // namespace tempogan
