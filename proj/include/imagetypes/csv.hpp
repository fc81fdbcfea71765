#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace imagetypes::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws Parse if absent.
    std::size_t column(std::string_view name) const;
};

/// RFC 4180-style reader: quoted fields may contain commas, quotes ("") and
/// newlines. Every row must have as many fields as the header.
Table parse(std::string_view text);
Table read(const std::filesystem::path& source);

/// Quotes a field only when it needs it.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

/// Shortest representation that round-trips; "NA" for NaN.
std::string format_number(double value);

double parse_number(std::string_view text);
long long parse_integer(std::string_view text);

}  // namespace imagetypes::csv

namespace imagetypes {

std::string read_text_file(const std::filesystem::path& source);
/// Creates parent directories as needed.
void write_text_file(const std::filesystem::path& destination, std::string_view text);

}  // namespace imagetypes
