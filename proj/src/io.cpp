#include "estkit/io.hpp"

#include <unistd.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <system_error>

#include "estkit/errors.hpp"

namespace estkit::io {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, const std::string& file, std::size_t line) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError(file, line, "invalid number: '" + std::string(field) + "'");
  }
  return value;
}

double parse_finite_double(std::string_view field, const std::string& file, std::size_t line) {
  const double value = parse_double(field, file, line);
  if (!std::isfinite(value)) {
    throw ParseError(file, line, "non-finite value: '" + std::string(field) + "'");
  }
  return value;
}

long long parse_int(std::string_view field, const std::string& file, std::size_t line) {
  long long value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError(file, line, "invalid integer: '" + std::string(field) + "'");
  }
  return value;
}

CsvReader::CsvReader(const std::filesystem::path& path) : in_(path), path_(path.string()) {
  if (!in_) {
    throw ParseError(path_, 0, "cannot open file");
  }
}

bool CsvReader::next(std::vector<std::string>& fields) {
  std::string row;
  while (std::getline(in_, row)) {
    ++line_;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty() || row.front() == '#') continue;
    fields.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = row.find(',', start);
      if (comma == std::string::npos) {
        fields.emplace_back(row.substr(start));
        break;
      }
      fields.emplace_back(row.substr(start, comma - start));
      start = comma + 1;
    }
    return true;
  }
  return false;
}

void write_file_atomic(const std::filesystem::path& target, const std::string& content) {
  std::filesystem::path temp = target;
  temp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open for writing: " + temp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(temp, ec);
      throw std::runtime_error("write failed: " + temp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp, target, ec);
  if (ec) {
    std::filesystem::remove(temp);
    throw std::runtime_error("rename failed: " + target.string() + " (" + ec.message() + ")");
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  Fnv1a h;
  h.update(bytes);
  return h.digest();
}

void Fnv1a::update(std::string_view bytes) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001B3ull;
  }
}

void Fnv1a::update_u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    state ^= (v >> (8 * i)) & 0xFFu;
    state *= 0x100000001B3ull;
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf, 16);
}

}  // namespace estkit::io
