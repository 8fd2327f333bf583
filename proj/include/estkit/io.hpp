#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace estkit::io {

// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

double parse_double(std::string_view field, const std::string& file, std::size_t line);
double parse_finite_double(std::string_view field, const std::string& file, std::size_t line);
long long parse_int(std::string_view field, const std::string& file, std::size_t line);

// Line-oriented CSV reader. Splits on ',', tolerates trailing '\r', skips
// blank lines and lines starting with '#' (provenance comments).
class CsvReader {
 public:
  explicit CsvReader(const std::filesystem::path& path);

  // Returns false at end of file. `fields` is overwritten on success.
  bool next(std::vector<std::string>& fields);

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::ifstream in_;
  std::string path_;
  std::size_t line_ = 0;
};

// Writes content to a temp file in the target directory, then renames it
// over the target. A failed run never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& target, const std::string& content);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

struct Fnv1a {
  std::uint64_t state = 0xCBF29CE484222325ull;
  void update(std::string_view bytes);
  void update_u64(std::uint64_t v);
  std::uint64_t digest() const { return state; }
};

}  // namespace estkit::io
