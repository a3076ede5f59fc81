#pragma once

// Minimal RFC-4180 style field splitting shared by the readers.

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rte/errors.hpp"

namespace rte::detail {

struct CsvRow {
    std::size_t row = 0;  // 1-based data row, header excluded
    std::vector<std::string> fields;
};

inline std::vector<std::string> split_csv_line(std::string_view line, std::size_t row) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (quoted) throw ParseError(row, fields.size() + 1, "unterminated quoted field");
    fields.push_back(std::move(current));
    return fields;
}

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

/// Splits text into header fields and data rows. Blank lines are skipped;
/// a UTF-8 byte-order mark is tolerated.
inline std::vector<CsvRow> read_csv_rows(std::string_view text, std::vector<std::string>& header) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    std::vector<CsvRow> rows;
    bool have_header = false;
    std::size_t data_row = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) {
            if (end == text.size()) break;
            continue;
        }
        if (!have_header) {
            header = split_csv_line(line, 0);
            for (auto& h : header) h = std::string(trim(h));
            have_header = true;
        } else {
            ++data_row;
            rows.push_back({data_row, split_csv_line(line, data_row)});
        }
        if (end == text.size()) break;
    }
    return rows;
}

inline double parse_real(const std::string& field, std::size_t row, std::size_t column) {
    const std::string_view s = trim(field);
    if (s.empty()) throw ParseError(row, column, "empty numeric field");
    double value = 0.0;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(row, column, "not a decimal number: '" + std::string(s) + "'");
    return value;
}

inline long parse_integer(const std::string& field, std::size_t row, std::size_t column) {
    const std::string_view s = trim(field);
    if (s.empty()) throw ParseError(row, column, "empty integer field");
    long value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(row, column, "not an integer: '" + std::string(s) + "'");
    return value;
}

}  // namespace rte::detail
