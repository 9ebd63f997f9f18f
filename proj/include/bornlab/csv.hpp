#ifndef BORNLAB_CSV_HPP
#define BORNLAB_CSV_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace bornlab::csv {

struct Row {
  std::size_t line;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

/// Reads `path`, checks the header equals `header` and returns the data rows.
/// Blank lines are skipped. Throws IoError, ParseError or EmptyFile (no rows).
std::vector<Row> read(const std::filesystem::path& path, std::string_view header);

/// Parses a full field as a finite double; throws ParseError tagged with `line`.
double parse_double(const std::string& field, std::size_t line);
long long parse_integer(const std::string& field, std::size_t line);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
void write_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace bornlab::csv

#endif  // BORNLAB_CSV_HPP
