#include <meboost/csv.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace meboost {

CsvTable parse_csv(std::string_view text)
{
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    bool closed = false;  // a quoted field just ended
    std::size_t line = 1;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
        closed = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                    closed = true;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            if (field_started || closed || !field.empty())
                throw DataError(fmt::format("CSV line {}: quote inside an unquoted field", line));
            quoted = true;
            field_started = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n') break;
            throw DataError(fmt::format("CSV line {}: bare carriage return", line));
        case '\n':
            end_record();
            ++line;
            break;
        default:
            if (closed) throw DataError(fmt::format("CSV line {}: characters after a closing quote", line));
            field += c;
        }
    }
    if (quoted) throw DataError("CSV: unterminated quoted field");
    if (field_started || !field.empty() || !record.empty()) end_record();

    if (records.empty()) throw DataError("CSV: no header row");
    CsvTable table;
    table.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != table.header.size())
            throw DataError(fmt::format("CSV record {}: {} fields, header has {}", r, records[r].size(),
                                        table.header.size()));
        table.rows.push_back(std::move(records[r]));
    }
    return table;
}

CsvTable read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str());
}

namespace {

void write_field(std::ostream& out, const std::string& field)
{
    if (field.find_first_of(",\"\r\n") == std::string::npos) {
        out << field;
        return;
    }
    out << '"';
    for (char c : field) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

void write_record(std::ostream& out, const std::vector<std::string>& record)
{
    for (std::size_t i = 0; i < record.size(); ++i) {
        if (i > 0) out << ',';
        write_field(out, record[i]);
    }
    out << '\n';
}

} // namespace

void write_csv(std::ostream& out, const CsvTable& table)
{
    write_record(out, table.header);
    for (const auto& r : table.rows) write_record(out, r);
}

std::string to_csv_string(const CsvTable& table)
{
    std::ostringstream out;
    write_csv(out, table);
    return out.str();
}

std::string format_double(double value)
{
    return fmt::format("{:.17g}", value);
}

double parse_cell(std::string_view cell, std::size_t row, std::string_view column)
{
    std::string_view s = cell;
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (s.empty()) throw DataError(fmt::format("row {}, column '{}': missing value", row, column));
    if (s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || end != s.data() + s.size())
        throw DataError(fmt::format("row {}, column '{}': '{}' is not a number", row, column, cell));
    if (!std::isfinite(value))
        throw DataError(fmt::format("row {}, column '{}': '{}' is not finite", row, column, cell));
    return value;
}

NumericData to_numeric(const CsvTable& table)
{
    NumericData data;
    data.names = table.header;
    data.values.resize(static_cast<Index>(table.rows.size()), static_cast<Index>(table.header.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        for (std::size_t c = 0; c < table.header.size(); ++c)
            data.values(static_cast<Index>(r), static_cast<Index>(c)) =
                parse_cell(table.rows[r][c], r + 1, table.header[c]);
    return data;
}

std::size_t column_index(const std::vector<std::string>& names, std::string_view name)
{
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw DataError(fmt::format("column '{}' not found", name));
}

} // namespace meboost
