#include "qsteer/csv.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace qsteer {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header,
                     const std::string& preamble)
    : out_(path), width_(header.size()) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
    if (!preamble.empty()) out_ << preamble << "\n";
    for (std::size_t k = 0; k < header.size(); ++k)
        out_ << header[k] << (k + 1 < header.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != width_) throw std::runtime_error("CsvWriter: row width mismatch");
    for (std::size_t k = 0; k < values.size(); ++k)
        out_ << format_double(values[k]) << (k + 1 < values.size() ? "," : "\n");
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::runtime_error("CsvWriter: row width mismatch");
    for (std::size_t k = 0; k < cells.size(); ++k)
        out_ << cells[k] << (k + 1 < cells.size() ? "," : "\n");
}

std::vector<std::pair<double, double>> read_two_column_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_two_column_csv: cannot open " + path);
    std::vector<std::pair<double, double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x, y;
        if (ss >> x >> y) rows.emplace_back(x, y);
        // Non-numeric rows (e.g. the header) are skipped.
    }
    return rows;
}

}  // namespace qsteer
