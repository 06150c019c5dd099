#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gpp {

/// Base for runtime failures that are not caller mistakes (numeric,
/// capacity, file format). Argument validation uses std::invalid_argument.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trajectory produced more events than the configured cap.
class CapacityError : public Error {
 public:
  CapacityError(std::uint64_t cap, std::size_t path_index, bool has_index);

  std::uint64_t cap() const noexcept { return cap_; }
  bool has_path_index() const noexcept { return has_index_; }
  std::size_t path_index() const noexcept { return path_index_; }

  CapacityError with_path_index(std::size_t index) const;

 private:
  std::uint64_t cap_;
  std::size_t path_index_;
  bool has_index_;
};

/// A log-log fit could not be computed for the named observable.
class FitError : public Error {
 public:
  FitError(std::string observable, const std::string& reason);
  const std::string& observable() const noexcept { return observable_; }

 private:
  std::string observable_;
};

/// A persisted file violated its documented layout.
class FormatError : public Error {
 public:
  FormatError(std::string field, const std::string& reason);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace gpp
