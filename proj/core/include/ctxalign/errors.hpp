#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctxalign {

/// Error codes covering every failure mode the pipeline can report.
enum class Errc {
  // core
  missing_image,
  bad_pixel_buffer,
  bad_config,
  // radiomics
  empty_image,
  degenerate_image,
  not_normalized,
  image_too_small,
  // xai
  empty_tensor,
  shape_mismatch,
  // context
  empty_vocabulary,
  io_error,
  empty_card,
  // reason
  timeout,
  http_error,
  retries_exhausted,
  no_json_found,
  missing_field,
  non_numeric_uncertainty,
  // evalharness
  single_class,
  dimension_mismatch,
  length_mismatch,
  empty_batch,
  unknown_block,
  // ingest
  manifest_missing,
  broken_reference,
  decode_error,
  csv_parse_error,
  ragged_rows,
  non_finite,
  bad_header,
  count_mismatch,
  // mock endpoint
  port_busy,
  bad_script,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ctxalign
