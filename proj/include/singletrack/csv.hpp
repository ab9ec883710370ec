#pragma once

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "singletrack/errors.hpp"

namespace singletrack::csv {

/// Numeric table with a named header row. All cells are doubles; values are
/// written with shortest-round-trip formatting so a write/read cycle is
/// bit-exact.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column_index(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw ParseError("missing column \"" + std::string(name) + "\"");
    }

    std::vector<double> column(std::string_view name) const {
        const std::size_t idx = column_index(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[idx]);
        return out;
    }
};

inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view s, std::size_t line, std::size_t col) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ParseError("bad number \"" + std::string(s) + "\" at line " + std::to_string(line) +
                         ", column " + std::to_string(col + 1));
    return v;
}

inline void write(std::ostream& os, const Table& table) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) os << ',';
        os << table.columns[i];
    }
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            os << format_double(row[i]);
        }
        os << '\n';
    }
}

inline void write_file(const std::string& path, const Table& table) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open \"" + path + "\" for writing");
    write(os, table);
    if (!os) throw ParseError("write failed for \"" + path + "\"");
}

inline std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

inline Table read(std::istream& is) {
    Table table;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(is, line)) throw ParseError("empty file: no header row");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    for (auto field : split_line(line)) table.columns.emplace_back(field);
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != table.columns.size())
            throw ParseError("line " + std::to_string(line_no) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(table.columns.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c)
            row.push_back(parse_double(fields[c], line_no, c));
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline Table read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open \"" + path + "\"");
    return read(is);
}

inline Table read_string(const std::string& text) {
    std::istringstream is(text);
    return read(is);
}

}  // namespace singletrack::csv
