#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace distillkit {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shape disagreement between datasets, models or parameter blocks.
struct DimensionError : Error {
  using Error::Error;
};

/// Invalid argument or configuration value.
struct ConfigError : Error {
  using Error::Error;
};

struct ParseError : Error {
  ParseError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}

  /// 1-based line number in the source file.
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

inline void require_dims(bool cond, const std::string& msg) {
  if (!cond) throw DimensionError(msg);
}

}  // namespace distillkit
