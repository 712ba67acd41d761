#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace morphwing::csv {

/// Shortest decimal that round-trips to the same double; locale independent.
std::string format(double v);

/// Parse a number written by `format` (or any plain decimal). Throws on junk.
double parse(std::string_view text);

std::vector<std::string> split_line(std::string_view line);

/// Row writer with a fixed header. Rows must match the header width.
class Writer {
 public:
  Writer(std::ostream& out, std::vector<std::string> header,
         std::vector<std::string> comments = {});

  void row(const std::vector<double>& values);
  std::size_t rows_written() const { return rows_; }

 private:
  std::ostream& out_;
  std::size_t width_;
  std::size_t rows_ = 0;
};

}  // namespace morphwing::csv
