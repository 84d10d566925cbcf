#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace genmean {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain input (NaN entries, bad shapes, bad labels).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation was not met.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A computation became degenerate (non-SPD precision, zero normalizer).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Enumeration would exceed a configured size budget.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, double requested, double cap)
      : Error(what), requested_(requested), cap_(cap) {}

  double requested() const noexcept { return requested_; }
  double cap() const noexcept { return cap_; }

 private:
  double requested_;
  double cap_;
};

/// A numerical estimate missed its accuracy target. Carries the best
/// estimate obtained and its error estimate.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double best_estimate, double error_estimate)
      : Error(what), best_(best_estimate), err_(error_estimate) {}

  double best_estimate() const noexcept { return best_; }
  double error_estimate() const noexcept { return err_; }

 private:
  double best_;
  double err_;
};

/// Problems found while reading an experiment dataset from disk.
class DatasetError : public InvalidInput {
 public:
  enum class Kind { missing_file, parse, schema, row_normalization, label_range };

  DatasetError(Kind kind, std::string file, std::size_t row, const std::string& detail)
      : InvalidInput(format(kind, file, row, detail)), kind_(kind), file_(std::move(file)), row_(row) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& file() const noexcept { return file_; }
  /// 1-based row in `file`, 0 when the error is not tied to a row.
  std::size_t row() const noexcept { return row_; }

 private:
  static std::string format(Kind kind, const std::string& file, std::size_t row,
                            const std::string& detail) {
    static constexpr const char* names[] = {"missing file", "parse error", "schema violation",
                                            "row normalization", "label out of range"};
    std::string msg = names[static_cast<int>(kind)];
    msg += ": " + file;
    if (row > 0) msg += ":" + std::to_string(row);
    if (!detail.empty()) msg += ": " + detail;
    return msg;
  }

  Kind kind_;
  std::string file_;
  std::size_t row_;
};

}  // namespace genmean
