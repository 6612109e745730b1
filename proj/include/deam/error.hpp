#pragma once

#include <stdexcept>
#include <string>

namespace deam {

// Base for every error this library throws; the CLI maps subclasses to exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// domain validation
struct InvalidState : Error { using Error::Error; };
struct InvalidParams : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };
struct InvalidSchedule : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct InvalidDesign : Error { using Error::Error; };
struct InvalidSpace : Error { using Error::Error; };

// statistics preconditions
struct DegenerateX : Error { using Error::Error; };
struct ZeroVariance : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };

// configuration / file-format errors (CLI exit code 2)
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

struct SchemaError : Error {
  long row;  // 1-based data-row number when known, -1 otherwise
  explicit SchemaError(const std::string& msg, long row_number = -1)
      : Error(row_number >= 0 ? msg + " (row " + std::to_string(row_number) + ")" : msg),
        row(row_number) {}
};

}  // namespace deam
