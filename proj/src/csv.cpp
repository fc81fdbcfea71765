#include "imagetypes/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "imagetypes/error.hpp"

namespace imagetypes {

std::string read_text_file(const std::filesystem::path& source) {
    std::ifstream in(source, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + source.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& destination, std::string_view text) {
    if (destination.has_parent_path()) std::filesystem::create_directories(destination.parent_path());
    std::ofstream out(destination, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + destination.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::Io, "short write to " + destination.string());
}

}  // namespace imagetypes

namespace imagetypes::csv {

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw Error(ErrorCode::Parse, fmt::format("missing CSV column '{}'", name));
}

Table parse(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string field;
    bool in_quotes = false;
    bool row_has_content = false;

    auto end_field = [&] {
        fields.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        if (row_has_content || fields.size() > 1 || !fields.front().empty()) records.push_back(std::move(fields));
        fields.clear();
        row_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                row_has_content = true;
                break;
            case ',': end_field(); break;
            case '\r': break;
            case '\n': end_row(); break;
            default: field.push_back(c);
        }
    }
    if (in_quotes) throw Error(ErrorCode::Parse, "unterminated quoted CSV field");
    if (!field.empty() || !fields.empty() || row_has_content) end_row();

    if (records.empty()) throw Error(ErrorCode::Parse, "CSV has no header");
    Table table;
    table.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != table.header.size())
            throw Error(ErrorCode::Parse, fmt::format("CSV row {} has {} fields, header has {}", r,
                                                      records[r].size(), table.header.size()));
        table.rows.push_back(std::move(records[r]));
    }
    return table;
}

Table read(const std::filesystem::path& source) {
    try {
        return parse(read_text_file(source));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Parse) throw;
        throw Error(ErrorCode::Parse, source.string() + ": " + e.what());
    }
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += escape(fields[i]);
    }
    return out;
}

std::string format_number(double value) {
    if (std::isnan(value)) return "NA";
    return fmt::format("{}", value);
}

double parse_number(std::string_view text) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw Error(ErrorCode::Parse, fmt::format("not a number: '{}'", text));
    return value;
}

long long parse_integer(std::string_view text) {
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw Error(ErrorCode::Parse, fmt::format("not an integer: '{}'", text));
    return value;
}

}  // namespace imagetypes::csv
