#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hof {

struct DelimitedRow {
  size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

struct DelimitedTable {
  std::vector<std::string> header;
  std::vector<DelimitedRow> rows;
};

// RFC 4180-style reader: a field that opens with '"' may contain the
// delimiter, doubled quotes and line breaks. A leading UTF-8 BOM is dropped.
DelimitedTable parse_delimited(std::string_view content, char delimiter,
                               bool quoting = true, bool has_header = true);

DelimitedTable read_delimited(const std::filesystem::path& path,
                              char delimiter, bool quoting = true,
                              bool has_header = true);

void write_delimited_row(std::ostream& out,
                         const std::vector<std::string>& fields,
                         char delimiter);

std::string read_file(const std::filesystem::path& path);

}  // namespace hof
