#include "gridlock/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gridlock/errors.hpp"

namespace gridlock::csv {

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

std::string format_int(long long value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld", value);
  return buf;
}

Table::Table(std::vector<std::string> header) : columns_(header.size()), cells_in_row_(columns_) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) body_ += ',';
    body_ += header[i];
  }
  body_ += '\n';
}

Table& Table::begin_row() {
  if (cells_in_row_ != columns_) throw Error("csv row has wrong number of cells");
  cells_in_row_ = 0;
  ++row_count_;
  return *this;
}

void Table::end_cell(const std::string& text) {
  if (cells_in_row_ >= columns_) throw Error("csv row has too many cells");
  if (cells_in_row_ > 0) body_ += ',';
  body_ += text;
  ++cells_in_row_;
  if (cells_in_row_ == columns_) body_ += '\n';
}

Table& Table::add(double value) {
  end_cell(format_double(value));
  return *this;
}

Table& Table::add(long long value) {
  end_cell(format_int(value));
  return *this;
}

Table& Table::add(unsigned long long value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%llu", value);
  end_cell(buf);
  return *this;
}

Table& Table::add(const std::string& value) {
  end_cell(value);
  return *this;
}

std::string Table::str() const {
  if (cells_in_row_ != columns_) throw Error("csv table ends mid-row");
  return body_;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

ParsedCsv read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open file: " + path);
  ParsedCsv out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_line(line);
    if (out.header.empty()) {
      out.header = std::move(cells);
      continue;
    }
    if (cells.size() != out.header.size()) {
      throw LoadError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(out.header.size()) + " columns, got " +
                      std::to_string(cells.size()));
    }
    out.rows.push_back(std::move(cells));
  }
  if (out.header.empty()) throw LoadError(path + ": empty file, header row required");
  return out;
}

void write_file(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open output file: " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) {
    out.close();
    std::error_code ec;
    fs::remove(target, ec);
    throw Error("failed writing output file: " + path);
  }
}

}  // namespace gridlock::csv
