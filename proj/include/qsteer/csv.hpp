// csv.hpp — comma-separated tables with a header row and 17 significant
// digits, plus a two-column reader for tabulated potentials.

#pragma once

#include <Eigen/Core>

#include <fstream>
#include <string>
#include <vector>

namespace qsteer {

std::string format_double(double v);  // %.17g

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header,
              const std::string& preamble = "");
    void row(const std::vector<double>& values);
    void raw_row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
    std::size_t width_;
};

// Two numeric columns, header row optional, '#' lines ignored.
std::vector<std::pair<double, double>> read_two_column_csv(const std::string& path);

}  // namespace qsteer
