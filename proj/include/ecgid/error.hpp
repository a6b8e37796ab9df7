#ifndef ECGID_ERROR_HPP
#define ECGID_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ecgid {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The operation has no data to work on (e.g. fitting an empty gallery).
class EmptyData : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed CSV or manifest content. `row` is 1-based, counting the header
/// as row 1; zero when the error is not tied to a row.
class ParseError : public Error {
 public:
  enum class Kind {
    bad_header,
    duplicate_header,
    column_count,
    bad_number,
    missing_value,
    bad_field,
  };

  ParseError(Kind kind, std::size_t row, const std::string &what)
      : Error(row ? "row " + std::to_string(row) + ": " + what : what),
        kind_(kind),
        row_(row) {}

  Kind kind() const { return kind_; }
  std::size_t row() const { return row_; }

 private:
  Kind kind_;
  std::size_t row_;
};

/// On-disk partitions disagree with their manifest.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

}  // namespace ecgid

#endif  // ECGID_ERROR_HPP
