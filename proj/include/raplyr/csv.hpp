#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace raplyr::csv {

/// Reads one RFC 4180 record: comma separated, fields optionally quoted,
/// doubled quotes inside quoted fields, newlines allowed inside quotes.
/// `lines_consumed` counts physical lines read. Returns nullopt at EOF.
inline std::optional<std::vector<std::string>> read_record(std::istream& in, std::size_t& lines_consumed) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int ch;
  while ((ch = in.get()) != EOF) {
    any = true;
    char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++lines_consumed;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      ++lines_consumed;
      fields.push_back(std::move(field));
      return fields;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (!any) return std::nullopt;
  ++lines_consumed;
  fields.push_back(std::move(field));
  return fields;
}

inline std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace raplyr::csv
