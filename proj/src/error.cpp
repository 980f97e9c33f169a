#include "salfuse/error.hpp"

namespace salfuse {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::file_not_found: return "file-not-found";
    case Errc::unsupported_format: return "unsupported-format";
    case Errc::corrupt_data: return "corrupt-data";
    case Errc::io_write_failure: return "io-write-failure";
    case Errc::wrong_colorspace: return "wrong-colorspace";
    case Errc::shape_mismatch: return "shape-mismatch";
    case Errc::disconnected_graph: return "disconnected-graph";
    case Errc::empty_dataset: return "empty-dataset";
    case Errc::non_finite_loss: return "non-finite-loss";
    case Errc::all_skipped: return "all-skipped";
  }
  return "unknown";
}

}  // namespace salfuse
