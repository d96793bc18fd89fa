#pragma once

#include <string>
#include <vector>

namespace rtsched {

struct CsvRow {
    int line = 0; // 1-based line number in the file
    std::vector<std::string> fields;
};

// Comma-separated rows, fields trimmed; '#' lines and blank lines skipped.
// No quoting: none of the wire formats here needs embedded commas.
std::vector<CsvRow> read_csv(const std::string& path);
std::vector<CsvRow> parse_csv(const std::string& content);

std::string join_csv(const std::vector<std::string>& fields);

} // namespace rtsched
