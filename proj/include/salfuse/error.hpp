#pragma once

#include <stdexcept>
#include <string>

namespace salfuse {

/// Failure categories surfaced by the library. The CLI maps these onto
/// process exit codes (usage vs. data errors).
enum class Errc {
  invalid_argument,
  file_not_found,
  unsupported_format,
  corrupt_data,
  io_write_failure,
  wrong_colorspace,
  shape_mismatch,
  disconnected_graph,
  empty_dataset,
  non_finite_loss,
  all_skipped,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace salfuse
