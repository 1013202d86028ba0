// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pnmkit::csv {

/// RFC-4180-style reader: quoted fields may contain commas, quotes ("")
/// and newlines. Lines starting with '#' outside a quoted field are
/// skipped (report headers).
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Reads one logical row. Returns false at end of input.
    bool next_row(std::vector<std::string>& out);

    std::size_t rows_read() const { return rows_read_; }

private:
    std::istream& in_;
    std::size_t rows_read_ = 0;
};

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void write_row(const std::vector<std::string>& fields);
    void write_comment(const std::string& line);

private:
    std::ostream& out_;
};

/// Quotes a field only when needed (comma, quote, newline, leading '#').
std::string escape_field(const std::string& field);

/// Shortest decimal string that parses back to the identical double.
std::string format_double(double v);

// Strict full-string parsers; nullopt on any trailing garbage.
std::optional<double> parse_double(const std::string& s);
std::optional<std::int64_t> parse_int(const std::string& s);
std::optional<std::uint64_t> parse_uint(const std::string& s);

} // namespace pnmkit::csv
