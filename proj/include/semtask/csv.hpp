#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace semtask::csv {

/// Quotes a field only when it contains a comma, quote or newline.
std::string escape(std::string_view field);

/// RFC 4180-style reader: quoted fields, doubled quotes, CRLF tolerated.
/// Blank lines are skipped.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& fields);
  /// 1-based line number where the last returned record started.
  std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

double parse_double(std::string_view text, std::size_t line);
std::uint64_t parse_uint(std::string_view text, std::size_t line);

}  // namespace semtask::csv
