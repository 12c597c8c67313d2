#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nlnl::io {

// Writes to "<path>.tmp" and renames over `path`, so readers never observe a
// truncated file.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

// Shortest round-trip decimal text ('.' separator regardless of locale).
std::string format_double(double v);
double parse_double(std::string_view s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by header name; throws ParseError if missing.
  std::size_t column(std::string_view name) const;
};

// Plain comma-separated text, no quoting (every field we emit is numeric or a
// bare identifier).
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& field(std::string_view s);
  CsvWriter& field(double v);
  CsvWriter& field(long long v);
  CsvWriter& field(std::size_t v) { return field(static_cast<long long>(v)); }
  CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
  void end_row();

  const std::string& str() const { return out_; }
  std::size_t rows() const { return rows_; }

 private:
  std::string out_;
  std::size_t width_;
  std::size_t in_row_ = 0;
  std::size_t rows_ = 0;
};

}  // namespace nlnl::io
