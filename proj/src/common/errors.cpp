#include "gpp/errors.hpp"

#include <utility>

namespace gpp {

namespace {

std::string capacity_message(std::uint64_t cap, std::size_t index, bool has_index) {
  std::string msg = "event cap of " + std::to_string(cap) + " exceeded";
  if (has_index) msg += " on path " + std::to_string(index);
  msg += " (runaway growth for this horizon; lower the horizon or raise the cap)";
  return msg;
}

}  // namespace

CapacityError::CapacityError(std::uint64_t cap, std::size_t path_index, bool has_index)
    : Error(capacity_message(cap, path_index, has_index)),
      cap_(cap),
      path_index_(path_index),
      has_index_(has_index) {}

CapacityError CapacityError::with_path_index(std::size_t index) const {
  return CapacityError(cap_, index, true);
}

FitError::FitError(std::string observable, const std::string& reason)
    : Error("fit failed for " + observable + ": " + reason), observable_(std::move(observable)) {}

FormatError::FormatError(std::string field, const std::string& reason)
    : Error("invalid field '" + field + "': " + reason), field_(std::move(field)) {}

}  // namespace gpp
