#pragma once
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <meboost/common.hpp>

namespace meboost {

/// RFC-4180 table: first record is the header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Parses quoted fields, doubled quotes, embedded separators and newlines, LF or CRLF endings.
/// Every record must have as many fields as the header.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

void write_csv(std::ostream& out, const CsvTable& table);
std::string to_csv_string(const CsvTable& table);

/// Shortest-safe decimal form: 17 significant digits, so parsing returns the same double.
std::string format_double(double value);

/// Strict numeric parse of a whole cell; throws DataError naming row (1-based, data rows) and column.
double parse_cell(std::string_view cell, std::size_t row, std::string_view column);

struct NumericData {
    std::vector<std::string> names;
    Matrix values;  ///< rows x names.size()
};

/// All cells numeric; empty cells are missing values and rejected.
NumericData to_numeric(const CsvTable& table);

/// Position of `name` in `names`; DataError if absent.
std::size_t column_index(const std::vector<std::string>& names, std::string_view name);

} // namespace meboost
