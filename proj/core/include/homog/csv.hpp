#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace homog {

/// RFC-4180-style CSV with a provenance comment, a timestamp comment, and a
/// header row. Numbers print with 17 significant digits. The timestamp line
/// starts with "# generated:" so byte-comparison can exclude it.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns,
            const std::string& provenance);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<double>& values);
  /// Mixed row: strings pass through (quoted when needed).
  void row_text(const std::vector<std::string>& cells);

 private:
  std::FILE* fp_ = nullptr;
  std::size_t ncols_ = 0;
  std::string path_;
};

std::string csv_quote(const std::string& cell);
std::string format_g17(double v);

} // namespace homog
