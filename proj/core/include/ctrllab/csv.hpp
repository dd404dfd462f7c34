#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ctrllab {

// RFC-4180-style rows, 12 significant digits, LF endings.
class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  void row_values(const std::vector<double>& values);
  static std::string format(double v);
  const std::string& text() const { return text_; }
  std::size_t columns() const { return columns_; }

private:
  std::string text_;
  std::size_t columns_ = 0;
};

// write-then-rename so partially written outputs never appear
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace ctrllab
