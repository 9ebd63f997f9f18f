#include "bornlab/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "bornlab/errors.hpp"

namespace bornlab::csv {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::vector<Row> read(const std::filesystem::path& path, std::string_view header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<Row> rows;
  const auto expected = split(std::string(header));
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (!have_header) {
      if (fields != expected) {
        throw ParseError("expected header '" + std::string(header) + "'", line_no);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != expected.size()) {
      throw ParseError("expected " + std::to_string(expected.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    rows.push_back({line_no, std::move(fields)});
  }
  if (!have_header) throw EmptyFile("'" + path.string() + "' has no header");
  if (rows.empty()) throw EmptyFile("'" + path.string() + "' has no data rows");
  return rows;
}

double parse_double(const std::string& field, std::size_t line) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ParseError("not a finite number: '" + field + "'", line);
  }
  return value;
}

long long parse_integer(const std::string& field, std::size_t line) {
  long long value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw ParseError("not an integer: '" + field + "'", line);
  return value;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

void write_atomically(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out.flush()) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into '" + path.string() + "'");
  }
}

}  // namespace bornlab::csv
