#include "ctxalign/types.hpp"

#include <nlohmann/json.hpp>

#include "ctxalign/errors.hpp"

namespace ctxalign {

const Study& validate_study(const Study& study) {
  if (!study.frontal_image && !study.lateral_image) {
    throw Error(Errc::missing_image, "study '" + study.id + "' has no images");
  }
  if (study.id.empty()) {
    throw Error(Errc::bad_pixel_buffer, "study id is empty");
  }
  for (const auto* img : {&study.frontal_image, &study.lateral_image}) {
    if (!img->has_value()) continue;
    const GrayImage& g = **img;
    const auto expected = static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height);
    if (g.width <= 0 || g.height <= 0 || g.pixels.size() != expected) {
      throw Error(Errc::bad_pixel_buffer,
                  "study '" + study.id + "': " + std::to_string(g.pixels.size()) +
                      " pixels for " + std::to_string(g.width) + "x" + std::to_string(g.height));
    }
  }
  return study;
}

std::string to_json_string(const StructuredResponse& response) {
  nlohmann::json j;
  j["impression"] = response.impression;
  j["evidence"] = response.evidence;
  j["uncertainty"] = response.uncertainty;
  j["limitations"] = response.limitations;
  j["safety_note"] = response.safety_note;
  return j.dump();
}

}  // namespace ctxalign
