#pragma once

// JSON report serialization with every floating-point number printed to 17
// significant digits. Non-finite numbers become the strings "inf", "-inf" and
// "nan".

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <string>

namespace coordproj::report {

using Json = nlohmann::ordered_json;

namespace detail {

inline void indent(std::string& out, int depth) { out.append(static_cast<std::size_t>(depth) * 2, ' '); }

inline void write(std::string& out, const Json& j, int depth) {
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            indent(out, depth + 1);
            out += Json(it.key()).dump();
            out += ": ";
            write(out, it.value(), depth + 1);
        }
        out += '\n';
        indent(out, depth);
        out += '}';
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out += "[]";
            return;
        }
        // Arrays of scalars stay on one line.
        bool flat = true;
        for (const auto& v : j)
            if (v.is_structured()) flat = false;
        if (flat) {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ", ";
                write(out, j[i], depth + 1);
            }
            out += ']';
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out += ",\n";
            indent(out, depth + 1);
            write(out, j[i], depth + 1);
        }
        out += '\n';
        indent(out, depth);
        out += ']';
        return;
    }
    case Json::value_t::number_float: {
        const double x = j.get<double>();
        if (std::isnan(x)) {
            out += "\"nan\"";
        } else if (std::isinf(x)) {
            out += x > 0 ? "\"inf\"" : "\"-inf\"";
        } else {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", x);
            out += buf;
        }
        return;
    }
    default:
        out += j.dump();
    }
}

} // namespace detail

inline std::string dump(const Json& j) {
    std::string out;
    detail::write(out, j, 0);
    out += '\n';
    return out;
}

} // namespace coordproj::report
