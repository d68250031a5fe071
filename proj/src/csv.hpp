#pragma once

#include <charconv>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hotspot::csv {

// Reads one RFC 4180 record. Quoted fields may contain the delimiter,
// doubled quotes and line breaks. Returns false at end of input.
inline bool read_record(std::istream& in, char delim, std::vector<std::string>& fields) {
    fields.clear();
    std::string line;
    if (!std::getline(in, line)) {
        return false;
    }
    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    for (;;) {
        if (i == line.size()) {
            if (quoted) {
                std::string next;
                if (!std::getline(in, next)) {
                    break;
                }
                field.push_back('\n');
                line = std::move(next);
                i = 0;
                continue;
            }
            break;
        }
        const char c = line[i++];
        if (quoted) {
            if (c == '"') {
                if (i < line.size() && line[i] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r' || i != line.size()) {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return true;
}

inline std::string quote(std::string_view s, char delim = ',') {
    if (s.find_first_of(std::string{delim, '"', '\n', '\r'}) == std::string_view::npos) {
        return std::string(s);
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::optional<double> to_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        return std::nullopt;
    }
    return v;
}

} // namespace hotspot::csv
