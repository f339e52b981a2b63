#include "hof/delimited.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "hof/error.hpp"

namespace hof {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorCode::IoFailure, "read failed for " + path.string());
  }
  return buffer.str();
}

DelimitedTable parse_delimited(std::string_view content, char delimiter,
                               bool quoting, bool has_header) {
  if (content.substr(0, 3) == "\xEF\xBB\xBF") content.remove_prefix(3);

  DelimitedTable table;
  std::vector<DelimitedRow> records;
  DelimitedRow current{1, {}};
  std::string field;
  size_t line = 1;
  size_t i = 0;
  bool field_started = false;
  const size_t n = content.size();

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A completely blank line carries no record.
    if (!(current.fields.size() == 1 && current.fields[0].empty())) {
      records.push_back(std::move(current));
    }
    current = DelimitedRow{line, {}};
  };

  while (i < n) {
    const char c = content[i];
    if (quoting && c == '"' && !field_started && field.empty()) {
      field_started = true;
      ++i;
      bool closed = false;
      while (i < n) {
        const char q = content[i];
        if (q == '"') {
          if (i + 1 < n && content[i + 1] == '"') {
            field.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        if (q == '\n') ++line;
        field.push_back(q);
        ++i;
      }
      if (!closed) {
        throw Error(ErrorCode::MalformedRow,
                    "unterminated quoted field starting at line " +
                        std::to_string(current.line));
      }
      continue;
    }
    if (c == delimiter) {
      end_field();
      ++i;
      continue;
    }
    if (c == '\r' && i + 1 < n && content[i + 1] == '\n') {
      ++i;
      continue;
    }
    if (c == '\n') {
      ++line;
      ++i;
      end_record();
      continue;
    }
    field.push_back(c);
    field_started = true;
    ++i;
  }
  if (field_started || !field.empty() || !current.fields.empty()) {
    end_record();
  }

  size_t first = 0;
  if (has_header) {
    if (records.empty()) {
      throw Error(ErrorCode::MissingColumn, "file has no header row");
    }
    table.header = std::move(records[0].fields);
    first = 1;
  }
  for (size_t r = first; r < records.size(); ++r) {
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

DelimitedTable read_delimited(const std::filesystem::path& path,
                              char delimiter, bool quoting, bool has_header) {
  return parse_delimited(read_file(path), delimiter, quoting, has_header);
}

void write_delimited_row(std::ostream& out,
                         const std::vector<std::string>& fields,
                         char delimiter) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << delimiter;
    const std::string& f = fields[i];
    const bool needs_quotes =
        f.find(delimiter) != std::string::npos ||
        f.find('"') != std::string::npos ||
        f.find('\n') != std::string::npos || f.find('\r') != std::string::npos;
    if (!needs_quotes) {
      out << f;
      continue;
    }
    out << '"';
    for (char c : f) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  }
  out << '\n';
}

}  // namespace hof
