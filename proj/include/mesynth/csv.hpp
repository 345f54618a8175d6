#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace mesynth {

// Minimal CSV support for the pipeline's own file contracts: header row,
// comma-separated, no quoting. Cells are trimmed of surrounding whitespace
// (OpenFace pads header cells with spaces).

inline std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

// Reads a line, tolerating CRLF endings. Returns false at EOF.
inline bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

}  // namespace mesynth
