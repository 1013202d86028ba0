// SPDX-License-Identifier: Apache-2.0
#include "pnmkit/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <istream>
#include <ostream>

namespace pnmkit::csv {

namespace {

// Reads one logical line, keeping newlines that fall inside quoted fields.
bool read_logical_line(std::istream& in, std::string& line) {
    line.clear();
    bool in_quotes = false;
    bool saw_any = false;
    int c;
    while ((c = in.get()) != std::char_traits<char>::eof()) {
        char ch = static_cast<char>(c);
        saw_any = true;
        if (ch == '"')
            in_quotes = !in_quotes;
        if (ch == '\n' && !in_quotes)
            return true;
        line.push_back(ch);
    }
    return saw_any;
}

void split_fields(const std::string& line, std::vector<std::string>& out) {
    std::string field;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (ch != '\r') {
            field.push_back(ch);
        }
    }
    out.push_back(std::move(field));
}

} // namespace

bool Reader::next_row(std::vector<std::string>& out) {
    std::string line;
    while (read_logical_line(in_, line)) {
        // strip a trailing CR of CRLF before the emptiness check
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line[0] == '#')
            continue;
        out.clear();
        split_fields(line, out);
        ++rows_read_;
        return true;
    }
    return false;
}

std::string escape_field(const std::string& field) {
    bool needs_quote = false;
    for (char ch : field) {
        if (ch == ',' || ch == '"' || ch == '\n' || ch == '\r') {
            needs_quote = true;
            break;
        }
    }
    if (!field.empty() && field[0] == '#')
        needs_quote = true;
    if (!needs_quote)
        return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"')
            out += "\"\"";
        else
            out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

void Writer::write_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            out_.put(',');
        out_ << escape_field(fields[i]);
    }
    out_.put('\n');
}

void Writer::write_comment(const std::string& line) {
    out_ << "# " << line << '\n';
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::optional<double> parse_double(const std::string& s) {
    if (s.empty())
        return std::nullopt;
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (end != begin + s.size() || errno == ERANGE)
        return std::nullopt;
    return v;
}

std::optional<std::int64_t> parse_int(const std::string& s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

std::optional<std::uint64_t> parse_uint(const std::string& s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

} // namespace pnmkit::csv
