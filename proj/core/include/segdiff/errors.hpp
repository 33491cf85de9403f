#pragma once

#include <stdexcept>
#include <string>

namespace segdiff {

// Every failure the library reports, as a stable code. The CLI maps these
// onto its exit-code contract; library users can switch on them directly.
enum class errc {
  io_failure,
  bad_format,
  bad_magic,
  dimension_overflow,
  truncated_payload,
  value_out_of_range,
  non_indexed_image,
  index_out_of_table,
  double_normalize,
  not_normalized,
  k_too_large,
  dimension_mismatch,
  non_positive_sigma,
  no_positive_seeds,
  no_seeds_for_class,
  length_mismatch,
  label_out_of_range,
  too_large,
  no_present_classes,
  bad_config,
};

const char* errc_name(errc code) noexcept;

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& message);
  errc code() const noexcept { return code_; }

private:
  errc code_;
};

[[noreturn]] void raise(errc code, const std::string& message);

}  // namespace segdiff
