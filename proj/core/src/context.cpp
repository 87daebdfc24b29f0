#include "ctxalign/context.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ctxalign/errors.hpp"
#include "ctxalign/text.hpp"

namespace ctxalign::context {

namespace {

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// Percentile labels drop trailing zeros: p10, p2.5.
std::string percentile_label(double p) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", p);
  return std::string("p") + buf;
}

}  // namespace

Vocabulary parse_vocabulary(const std::string& text) {
  Vocabulary vocab;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string term = ctxalign::text::normalize_spaces(line);
    if (term.empty() || term[0] == '#') continue;
    vocab.terms.insert(ctxalign::text::to_lower(term));
  }
  if (vocab.terms.empty()) {
    throw Error(Errc::empty_vocabulary, "no terms after skipping blanks and comments");
  }
  return vocab;
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read vocabulary file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_vocabulary(buf.str());
}

SemanticAnchors extract_anchors(const std::string& report, const Vocabulary& vocab) {
  // first-occurrence position -> term
  std::map<std::size_t, std::string> by_position;
  for (const std::string& term : vocab.terms) {
    const auto hits = ctxalign::text::find_whole_word(report, term);
    if (!hits.empty()) by_position.emplace(hits.front(), term);
  }
  SemanticAnchors anchors;
  for (auto& [pos, term] : by_position) anchors.matched.push_back(std::move(term));
  return anchors;
}

std::string render_radiomics_section(const radiomics::RadiomicFeatures& rad) {
  // The raw 256-bin LBP histogram stays out of the card; it feeds the
  // ablation classifier only.
  std::string out = "[RADIOMICS]\n";
  out += "mean=" + fixed4(rad.intensity.mean) + "\n";
  out += "variance=" + fixed4(rad.intensity.variance) + "\n";
  out += "std=" + fixed4(rad.intensity.std) + "\n";
  out += "min=" + fixed4(rad.intensity.min) + "\n";
  out += "max=" + fixed4(rad.intensity.max) + "\n";
  out += "range=" + fixed4(rad.intensity.range) + "\n";
  for (const auto& [p, value] : rad.intensity.percentiles) {
    out += percentile_label(p) + "=" + fixed4(value) + "\n";
  }
  out += "glcm_contrast=" + fixed4(rad.glcm_contrast) + "\n";
  out += "glcm_homogeneity=" + fixed4(rad.glcm_homogeneity) + "\n";
  return out;
}

std::string render_xai_section(const xai::ActivationSummary& summary) {
  std::string out = "[XAI]\n";
  out += "mean=" + fixed4(summary.mean) + "\n";
  out += "max=" + fixed4(summary.max) + "\n";
  out += "entropy=" + fixed4(summary.entropy) + "\n";
  out += "top_mass=" + fixed4(summary.top_mass) + "\n";
  return out;
}

std::string render_vocab_section(const SemanticAnchors& anchors) {
  std::string out = "[VOCAB]\nanchors=";
  if (anchors.matched.empty()) {
    out += "(none)";
  } else {
    for (std::size_t i = 0; i < anchors.matched.size(); ++i) {
      if (i > 0) out += ", ";
      out += anchors.matched[i];
    }
  }
  out += "\n";
  return out;
}

FeatureCard serialize_card(const std::optional<radiomics::RadiomicFeatures>& rad,
                           const std::optional<xai::ActivationSummary>& xai_summary,
                           const std::optional<SemanticAnchors>& anchors) {
  if (!rad && !xai_summary && !anchors) {
    throw Error(Errc::empty_card, "all card sections absent");
  }
  FeatureCard card;
  card.radiomics = rad;
  card.xai = xai_summary;
  card.anchors = anchors;
  if (rad) card.rendered += render_radiomics_section(*rad);
  if (xai_summary) card.rendered += render_xai_section(*xai_summary);
  if (anchors) card.rendered += render_vocab_section(*anchors);
  return card;
}

}  // namespace ctxalign::context
