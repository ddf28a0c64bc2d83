#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace chaselab::csv {

// Shortest decimal that round-trips to the same double; "inf"/"-inf"/"nan"
// for non-finite values.
std::string format_number(double value);

// Parses a decimal produced by format_number (or any strtod-compatible text).
double parse_number(std::string_view text);

std::vector<std::string> split_line(std::string_view line);

// Writes RFC-4180-style rows with LF line endings.
class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& out_;
};

}  // namespace chaselab::csv
