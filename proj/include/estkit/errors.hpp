#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace estkit {

struct UnknownEmotionLabel : std::runtime_error {
  explicit UnknownEmotionLabel(const std::string& label)
      : std::runtime_error("unknown emotion label: '" + label + "'"), label(label) {}
  std::string label;
};

struct ParseError : std::runtime_error {
  ParseError(std::string file, std::size_t line, const std::string& message)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + message),
        file(std::move(file)),
        line(line) {}
  std::string file;
  std::size_t line;
};

struct LengthMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingClip : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateLabels : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingleClassTraining : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingleClassTest : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooFewSamples : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidChain : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace estkit
