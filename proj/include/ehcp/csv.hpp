#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ehcp::csv {

/// One parsed record; `line` is the 1-based physical line where it starts.
struct Record {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// RFC 4180 style reader: quoted fields may contain separators, quotes ("")
/// and newlines.
class Reader {
 public:
  explicit Reader(std::istream& in, char sep = ',') : in_(in), sep_(sep) {}
  std::optional<Record> next();

 private:
  std::istream& in_;
  char sep_;
  std::size_t line_ = 0;
};

std::string escape(std::string_view field, char sep = ',');
void write_row(std::ostream& out, const std::vector<std::string>& fields, char sep = ',');

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

}  // namespace ehcp::csv
