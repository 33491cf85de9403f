#include "segdiff/errors.hpp"

namespace segdiff {

const char* errc_name(errc code) noexcept {
  switch (code) {
    case errc::io_failure: return "IoFailure";
    case errc::bad_format: return "BadFormat";
    case errc::bad_magic: return "BadMagic";
    case errc::dimension_overflow: return "DimensionOverflow";
    case errc::truncated_payload: return "TruncatedPayload";
    case errc::value_out_of_range: return "ValueOutOfRange";
    case errc::non_indexed_image: return "NonIndexedImage";
    case errc::index_out_of_table: return "IndexOutOfTable";
    case errc::double_normalize: return "DoubleNormalize";
    case errc::not_normalized: return "NotNormalized";
    case errc::k_too_large: return "KTooLarge";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::non_positive_sigma: return "NonPositiveSigma";
    case errc::no_positive_seeds: return "NoPositiveSeeds";
    case errc::no_seeds_for_class: return "NoSeedsForClass";
    case errc::length_mismatch: return "LengthMismatch";
    case errc::label_out_of_range: return "LabelOutOfRange";
    case errc::too_large: return "TooLarge";
    case errc::no_present_classes: return "NoPresentClasses";
    case errc::bad_config: return "BadConfig";
  }
  return "UnknownError";
}

Error::Error(errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

void raise(errc code, const std::string& message) { throw Error(code, message); }

}  // namespace segdiff
