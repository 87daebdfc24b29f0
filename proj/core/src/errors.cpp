#include "ctxalign/errors.hpp"

namespace ctxalign {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::missing_image: return "MissingImage";
    case Errc::bad_pixel_buffer: return "BadPixelBuffer";
    case Errc::bad_config: return "BadConfig";
    case Errc::empty_image: return "EmptyImage";
    case Errc::degenerate_image: return "DegenerateImage";
    case Errc::not_normalized: return "NotNormalized";
    case Errc::image_too_small: return "ImageTooSmall";
    case Errc::empty_tensor: return "EmptyTensor";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::empty_vocabulary: return "EmptyVocabulary";
    case Errc::io_error: return "IoError";
    case Errc::empty_card: return "EmptyCard";
    case Errc::timeout: return "Timeout";
    case Errc::http_error: return "HttpError";
    case Errc::retries_exhausted: return "RetriesExhausted";
    case Errc::no_json_found: return "NoJsonFound";
    case Errc::missing_field: return "MissingField";
    case Errc::non_numeric_uncertainty: return "NonNumericUncertainty";
    case Errc::single_class: return "SingleClass";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::empty_batch: return "EmptyBatch";
    case Errc::unknown_block: return "UnknownBlock";
    case Errc::manifest_missing: return "ManifestMissing";
    case Errc::broken_reference: return "BrokenReference";
    case Errc::decode_error: return "DecodeError";
    case Errc::csv_parse_error: return "CsvParseError";
    case Errc::ragged_rows: return "RaggedRows";
    case Errc::non_finite: return "NonFinite";
    case Errc::bad_header: return "BadHeader";
    case Errc::count_mismatch: return "CountMismatch";
    case Errc::port_busy: return "PortBusy";
    case Errc::bad_script: return "BadScript";
  }
  return "UnknownError";
}

}  // namespace ctxalign
