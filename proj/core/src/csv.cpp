#include "homog/csv.hpp"

#include <ctime>

#include "homog/errors.hpp"

namespace homog {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns,
                     const std::string& provenance)
    : ncols_(columns.size()), path_(path) {
  fp_ = std::fopen(path.c_str(), "wb");
  if (!fp_) throw Error("CsvWriter: cannot open " + path);
  std::fprintf(fp_, "# %s\r\n", provenance.c_str());
  char stamp[64];
  const std::time_t now = std::time(nullptr);
  std::tm tmv{};
  gmtime_r(&now, &tmv);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tmv);
  std::fprintf(fp_, "# generated: %s\r\n", stamp);
  for (std::size_t i = 0; i < columns.size(); ++i)
    std::fprintf(fp_, "%s%s", csv_quote(columns[i]).c_str(),
                 i + 1 == columns.size() ? "\r\n" : ",");
}

CsvWriter::~CsvWriter() {
  if (fp_) std::fclose(fp_);
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != ncols_) throw Error("CsvWriter: row width mismatch in " + path_);
  for (std::size_t i = 0; i < values.size(); ++i)
    std::fprintf(fp_, "%s%s", format_g17(values[i]).c_str(),
                 i + 1 == values.size() ? "\r\n" : ",");
}

void CsvWriter::row_text(const std::vector<std::string>& cells) {
  if (cells.size() != ncols_) throw Error("CsvWriter: row width mismatch in " + path_);
  for (std::size_t i = 0; i < cells.size(); ++i)
    std::fprintf(fp_, "%s%s", csv_quote(cells[i]).c_str(), i + 1 == cells.size() ? "\r\n" : ",");
}

} // namespace homog
