#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sve::csv {

using Row = std::vector<std::string>;

/// Parses RFC 4180-style CSV (quoted fields, doubled quotes, CRLF tolerated).
/// Throws Error{kMalformed} on an unterminated quote.
std::vector<Row> parse(std::string_view text);

/// Reads and parses a file. Throws Error{kNotFound} when it does not exist.
std::vector<Row> read_file(const std::filesystem::path& path);

void write_row(std::ostream& out, const Row& fields);

/// %.17g formatting: enough digits for a lossless round trip of any double.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

std::string read_text(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename so readers never see a partial file.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace sve::csv
