#include "kgsm/csv.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace kgsm::csv {

std::string format_double(double value) {
  char buffer[64];
  const auto result =
      std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 17);
  return std::string(buffer, result.ptr);
}

namespace {

bool needs_quotes(const std::string& field) {
  return field.find_first_of(",\"\r\n") != std::string::npos;
}

} // namespace

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) {
      out << ',';
    }
    if (needs_quotes(fields[i])) {
      out << '"';
      for (char c : fields[i]) {
        if (c == '"') {
          out << '"';
        }
        out << c;
      }
      out << '"';
    } else {
      out << fields[i];
    }
  }
  out << '\n';
}

std::size_t Table::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      return i;
    }
  }
  throw std::out_of_range("csv: no column named '" + std::string(name) + "'");
}

std::vector<double> Table::numeric_column(std::string_view name) const {
  const std::size_t index = column_index(name);
  std::vector<double> values;
  values.reserve(rows.size());
  for (const auto& row : rows) {
    const std::string& field = row[index];
    double parsed = 0.0;
    const auto result = std::from_chars(field.data(), field.data() + field.size(), parsed);
    if (result.ec != std::errc{} || result.ptr != field.data() + field.size()) {
      throw std::runtime_error("csv: non-numeric field '" + field + "'");
    }
    values.push_back(parsed);
  }
  return values;
}

Table read(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool record_open = false;
  char c = 0;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    record_open = false;
  };

  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    record_open = true;
    if (c == '"') {
      if (!field.empty() || field_was_quoted) {
        throw std::runtime_error("csv: quote inside an unquoted field");
      }
      in_quotes = true;
      field_was_quoted = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      if (in.peek() != '\n') {
        throw std::runtime_error("csv: bare carriage return");
      }
    } else if (c == '\n') {
      end_record();
    } else {
      if (field_was_quoted) {
        throw std::runtime_error("csv: text after closing quote");
      }
      field.push_back(c);
    }
  }
  if (in_quotes) {
    throw std::runtime_error("csv: unterminated quoted field");
  }
  if (record_open) {
    end_record();
  }
  if (records.empty()) {
    throw std::runtime_error("csv: empty document");
  }
  Table table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw std::runtime_error("csv: record " + std::to_string(r) + " has " +
                               std::to_string(records[r].size()) + " fields, expected " +
                               std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

} // namespace kgsm::csv
