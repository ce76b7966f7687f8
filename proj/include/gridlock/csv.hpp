#pragma once

#include <string>
#include <vector>

namespace gridlock::csv {

/// Floating point values are printed with 9 significant digits; enough for
/// plotting and stable byte-for-byte across runs.
std::string format_double(double value);

std::string format_int(long long value);

/// Accumulates rows and renders the finished file in one piece, so a failed
/// run never leaves a partial CSV behind.
class Table {
 public:
  explicit Table(std::vector<std::string> header);

  Table& begin_row();
  Table& add(double value);
  Table& add(long long value);
  Table& add(int value) { return add(static_cast<long long>(value)); }
  Table& add(unsigned long long value);
  Table& add(const std::string& value);
  Table& add(bool value) { return add(static_cast<long long>(value ? 1 : 0)); }

  std::size_t rows() const { return row_count_; }
  std::string str() const;

 private:
  void end_cell(const std::string& text);

  std::size_t columns_;
  std::size_t row_count_ = 0;
  std::size_t cells_in_row_;
  std::string body_;
};

/// Splits one CSV line on commas. No quoting rules: none of the toolkit's
/// formats embed commas in fields.
std::vector<std::string> split_line(const std::string& line);

struct ParsedCsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // excludes the header
};

/// Reads a whole CSV file; throws LoadError when the file cannot be opened
/// or rows disagree with the header width. Blank lines are skipped.
ParsedCsv read_file(const std::string& path);

/// Writes file contents, creating parent directories as needed; removes any
/// partially written file on failure.
void write_file(const std::string& path, const std::string& contents);

}  // namespace gridlock::csv
