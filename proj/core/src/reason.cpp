#include "ctxalign/reason.hpp"

#include <cctype>
#include <cstdlib>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ctxalign/errors.hpp"
#include "ctxalign/image_io.hpp"
#include "ctxalign/text.hpp"

namespace ctxalign::reason {

namespace {

using nlohmann::json;

constexpr const char* kSystemText =
    "You are a radiology reasoning assistant. Respond with a single JSON object "
    "containing exactly these keys: \"impression\", \"evidence\", \"uncertainty\", "
    "\"limitations\", \"safety_note\". \"uncertainty\" must be a number between 0 and 1. "
    "Avoid definitive diagnosis claims. Explicitly state the limitations of the "
    "assessment. Include a safety disclaimer noting the output is not a substitute "
    "for expert interpretation.";

constexpr const char* kTaskText =
    "Assess whether there is evidence of active cardiopulmonary abnormality and "
    "answer in the required JSON format.";

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const unsigned v = bytes[i] << 16;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out += "==";
  } else if (rest == 2) {
    const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

// Splits "http://host:port/v1" into the client root and the path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
  std::string url = base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme_end = url.find("://");
  const std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  if (path_start == std::string::npos) return {url, ""};
  return {url.substr(0, path_start), url.substr(path_start)};
}

json wire_request(const EndpointConfig& cfg, const ChatRequest& req) {
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", req.user_text}});
  for (const ImageAttachment& img : req.images) {
    content.push_back(
        {{"type", "image_url"},
         {"image_url", {{"url", "data:" + img.mime + ";base64," + base64_encode(img.bytes)}}}});
  }
  json body;
  body["model"] = cfg.model_name;
  body["temperature"] = cfg.temperature;
  body["max_tokens"] = cfg.max_output_tokens;
  body["messages"] = json::array({
      json{{"role", "system"}, {"content", req.system_text}},
      json{{"role", "user"}, {"content", content}},
  });
  return body;
}

std::string extract_assistant_text(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::http_error, "completion response is not JSON");
  try {
    const json& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    if (content.is_array()) {
      std::string out;
      for (const json& part : content) {
        if (part.contains("text")) out += part.at("text").get<std::string>();
      }
      return out;
    }
  } catch (const json::exception&) {
    // fall through
  }
  throw Error(Errc::http_error, "completion response missing choices[0].message.content");
}

// Finds the next balanced {...} candidate starting at or after `from`,
// honoring string literals and escapes. Returns npos when none remains.
std::size_t balanced_object(const std::string& raw, std::size_t from, std::size_t& end_out) {
  const std::size_t start = raw.find('{', from);
  if (start == std::string::npos) return std::string::npos;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      --depth;
      if (depth == 0) {
        end_out = i + 1;
        return start;
      }
    }
  }
  return std::string::npos;
}

std::string field_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

ChatRequest build_prompt(const Study& study, const std::optional<context::FeatureCard>& card,
                         int step) {
  ChatRequest req;
  req.system_text = kSystemText;

  std::string user = "Radiology report:\n";
  user += study.report.empty() ? "(not provided)" : study.report;
  user += "\n";

  std::string sections;
  if (card && step >= 1) {
    if (card->radiomics) sections += context::render_radiomics_section(*card->radiomics);
    if (step >= 2) {
      if (card->xai) sections += context::render_xai_section(*card->xai);
      if (card->anchors) sections += context::render_vocab_section(*card->anchors);
    }
  }
  if (!sections.empty()) {
    user += "\nTool context:\n" + sections;
  }
  user += "\n";
  user += kTaskText;
  req.user_text = user;

  for (const auto* img : {&study.frontal_image, &study.lateral_image}) {
    if (!img->has_value()) continue;
    req.images.push_back({"image/png", image_io::encode_png(**img)});
  }
  return req;
}

std::string complete(const EndpointConfig& cfg, const ChatRequest& req) {
  if (req.user_text.empty()) throw Error(Errc::http_error, "user_text must be non-empty");
  const auto [root, prefix] = split_base_url(cfg.base_url);
  httplib::Client client(root);
  const auto timeout_s = static_cast<time_t>(cfg.timeout_s);
  const auto timeout_us = static_cast<time_t>((cfg.timeout_s - timeout_s) * 1e6);
  client.set_connection_timeout(timeout_s, timeout_us);
  client.set_read_timeout(timeout_s, timeout_us);
  client.set_write_timeout(timeout_s, timeout_us);

  httplib::Headers headers;
  if (const char* token = std::getenv("CTXALIGN_API_TOKEN"); token && *token) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  const std::string body = wire_request(cfg, req).dump();
  const std::string path = prefix + "/chat/completions";

  enum class Failure { none, timed_out, server_error, transport };
  Failure last = Failure::none;
  int last_status = 0;

  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      const httplib::Error err = res.error();
      last = (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
              err == httplib::Error::Write)
                 ? Failure::timed_out
                 : Failure::transport;
      continue;
    }
    if (res->status >= 500) {
      last = Failure::server_error;
      last_status = res->status;
      continue;
    }
    if (res->status >= 400) {
      throw Error(Errc::http_error, "HTTP " + std::to_string(res->status));
    }
    return extract_assistant_text(res->body);
  }

  if (last == Failure::timed_out) {
    throw Error(Errc::timeout, "no response within " + std::to_string(cfg.timeout_s) + "s");
  }
  if (last == Failure::server_error) {
    throw Error(Errc::retries_exhausted, "gave up after " + std::to_string(cfg.max_retries + 1) +
                                             " attempts, last HTTP " + std::to_string(last_status));
  }
  throw Error(Errc::retries_exhausted, "endpoint unreachable after " +
                                           std::to_string(cfg.max_retries + 1) + " attempts");
}

StructuredResponse parse_structured(const std::string& raw) {
  json obj;
  std::size_t from = 0;
  bool found = false;
  while (from < raw.size()) {
    std::size_t end = 0;
    const std::size_t start = balanced_object(raw, from, end);
    if (start == std::string::npos) break;
    json candidate = json::parse(raw.substr(start, end - start), nullptr, false);
    if (!candidate.is_discarded() && candidate.is_object()) {
      obj = std::move(candidate);
      found = true;
      break;
    }
    from = start + 1;
  }
  if (!found) throw Error(Errc::no_json_found, "no balanced JSON object in response");

  json by_key = json::object();
  for (const auto& [key, value] : obj.items()) {
    by_key[ctxalign::text::to_lower(key)] = value;
  }
  auto require = [&](const char* name) -> const json& {
    if (!by_key.contains(name) || by_key.at(name).is_null()) {
      throw Error(Errc::missing_field, name);
    }
    return by_key.at(name);
  };

  StructuredResponse out;
  out.impression = field_to_string(require("impression"));
  out.evidence = field_to_string(require("evidence"));
  out.limitations = field_to_string(require("limitations"));
  out.safety_note = field_to_string(require("safety_note"));

  const json& unc = require("uncertainty");
  if (unc.is_number()) {
    out.uncertainty = unc.get<double>();
  } else if (unc.is_string()) {
    const std::string s = unc.get<std::string>();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
      throw Error(Errc::non_numeric_uncertainty, "uncertainty '" + s + "' is not numeric");
    }
    out.uncertainty = v;
  } else {
    throw Error(Errc::non_numeric_uncertainty, "uncertainty has type " + std::string(unc.type_name()));
  }
  return out;
}

StepRecord parse_step(int step, const std::string& raw) {
  StepRecord record;
  record.step = step;
  record.raw_text = raw;
  try {
    record.response = parse_structured(raw);
  } catch (const Error& e) {
    record.parse_error = e.what();
  }
  return record;
}

void recompute_deltas(ReasoningTrace& trace) {
  trace.uncertainty_delta.reset();
  trace.evidence_length_delta.reset();
  if (trace.steps.empty()) return;
  const StepRecord& first = trace.steps.front();
  const StepRecord& last = trace.steps.back();
  if (!first.response || !last.response) return;
  trace.uncertainty_delta = last.response->uncertainty - first.response->uncertainty;
  trace.evidence_length_delta =
      static_cast<long>(ctxalign::text::word_count(last.response->evidence)) -
      static_cast<long>(ctxalign::text::word_count(first.response->evidence));
}

namespace {

ReasoningTrace run_steps(const Study& study, const context::FeatureCard& card,
                         const EndpointConfig& cfg, ReasoningMode mode,
                         const std::vector<int>& prompt_steps) {
  ReasoningTrace trace;
  trace.study_id = study.id;
  trace.mode = mode;
  for (std::size_t i = 0; i < prompt_steps.size(); ++i) {
    const ChatRequest req = build_prompt(study, card, prompt_steps[i]);
    std::string raw;
    try {
      raw = complete(cfg, req);
    } catch (const Error& e) {
      throw Error(e.code(), "study '" + study.id + "' step " + std::to_string(i) + ": " + e.what());
    }
    trace.steps.push_back(parse_step(static_cast<int>(i), raw));
  }
  recompute_deltas(trace);
  return trace;
}

}  // namespace

ReasoningTrace run_single_shot(const Study& study, const context::FeatureCard& card,
                               const EndpointConfig& cfg) {
  // One call with the full card; recorded as step 0.
  return run_steps(study, card, cfg, ReasoningMode::single_shot, {2});
}

ReasoningTrace run_stepwise(const Study& study, const context::FeatureCard& card,
                            const EndpointConfig& cfg) {
  return run_steps(study, card, cfg, ReasoningMode::stepwise, {0, 1, 2});
}

std::string trace_to_json(const ReasoningTrace& trace) {
  json steps = json::array();
  for (const StepRecord& s : trace.steps) {
    json step;
    step["step"] = s.step;
    step["raw"] = s.raw_text;
    if (s.response) {
      step["response"] = {{"impression", s.response->impression},
                          {"evidence", s.response->evidence},
                          {"uncertainty", s.response->uncertainty},
                          {"limitations", s.response->limitations},
                          {"safety_note", s.response->safety_note}};
    } else {
      step["parse_error"] = s.parse_error;
    }
    steps.push_back(step);
  }
  json j;
  j["study_id"] = trace.study_id;
  j["mode"] = to_string(trace.mode);
  j["steps"] = steps;
  j["uncertainty_delta"] =
      trace.uncertainty_delta ? json(*trace.uncertainty_delta) : json(nullptr);
  j["evidence_length_delta"] =
      trace.evidence_length_delta ? json(*trace.evidence_length_delta) : json(nullptr);
  return j.dump();
}

ReasoningTrace trace_from_json(const std::string& line) {
  json j = json::parse(line);
  ReasoningTrace trace;
  trace.study_id = j.at("study_id").get<std::string>();
  trace.mode = reasoning_mode_from_string(j.at("mode").get<std::string>());
  for (const json& s : j.at("steps")) {
    StepRecord record;
    record.step = s.at("step").get<int>();
    record.raw_text = s.at("raw").get<std::string>();
    if (s.contains("response")) {
      const json& r = s.at("response");
      StructuredResponse resp;
      resp.impression = r.at("impression").get<std::string>();
      resp.evidence = r.at("evidence").get<std::string>();
      resp.uncertainty = r.at("uncertainty").get<double>();
      resp.limitations = r.at("limitations").get<std::string>();
      resp.safety_note = r.at("safety_note").get<std::string>();
      record.response = std::move(resp);
    } else if (s.contains("parse_error")) {
      record.parse_error = s.at("parse_error").get<std::string>();
    }
    trace.steps.push_back(std::move(record));
  }
  // deltas are derived state; never trust stored values
  recompute_deltas(trace);
  return trace;
}

}  // namespace ctxalign::reason
