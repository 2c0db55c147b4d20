#pragma once

// Numeric CSV: one vector per row, comma separated. '#' lines and blank lines
// are skipped; a first non-comment line that does not parse as numbers is a
// header.

#include "coordproj/core.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace coordproj::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<RealVector> rows;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) return out;
        start = comma + 1;
    }
}

inline bool parse_number(std::string_view field, double& out) {
    if (field.empty()) return false;
    if (field.front() == '+') field.remove_prefix(1);
    const auto res = std::from_chars(field.data(), field.data() + field.size(), out);
    return res.ec == std::errc() && res.ptr == field.data() + field.size();
}

} // namespace detail

inline Table parse(std::string_view text) {
    Table t;
    std::size_t line_no = 0, pos = 0;
    bool seen_data = false;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = detail::split(line);
        RealVector row;
        row.reserve(fields.size());
        bool numeric = true;
        for (auto f : fields) {
            double v;
            if (!detail::parse_number(f, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            require(!seen_data && t.header.empty(), ErrorCode::BadInput,
                    "line " + std::to_string(line_no) + ": non-numeric field");
            for (auto f : fields) t.header.emplace_back(f);
            seen_data = true;
            continue;
        }
        seen_data = true;
        require(all_finite(row), ErrorCode::BadInput, "line " + std::to_string(line_no) + ": non-finite value");
        require(t.rows.empty() || row.size() == t.rows.front().size(), ErrorCode::Dimension,
                "line " + std::to_string(line_no) + ": ragged row");
        require(t.header.empty() || row.size() == t.header.size(), ErrorCode::Dimension,
                "line " + std::to_string(line_no) + ": row length differs from header");
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

inline std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string format(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
    if (!t.header.empty()) out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_number(row[i]);
        }
        out += '\n';
    }
    return out;
}

} // namespace coordproj::csv
