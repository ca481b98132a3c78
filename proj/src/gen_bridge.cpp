#include "placeorigin/gen_bridge.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "placeorigin/error.hpp"
#include "placeorigin/hashing.hpp"
#include "placeorigin/kg_search.hpp"
#include "placeorigin/text.hpp"

namespace placeorigin::gen {

using nlohmann::json;

std::string_view to_string(Ordering o) noexcept {
  return o == Ordering::tail_best ? "tail_best" : "head_best";
}

std::optional<Ordering> parse_ordering(std::string_view s) {
  const auto v = text::replace_all(text::to_lower(text::trim(s)), "-", "_");
  if (v == "tail_best") return Ordering::tail_best;
  if (v == "head_best") return Ordering::head_best;
  return std::nullopt;
}

std::size_t WhitespaceTokenCounter::count(std::string_view t) const {
  return text::split_ws(t).size();
}

std::size_t HeuristicTokenCounter::count(std::string_view t) const {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(t.size()) / ratio_));
}

HttpTokenCounter::HttpTokenCounter(std::string url, http::RetryPolicy policy,
                                   std::shared_ptr<http::RateLimiter> limiter)
    : client_(url, policy, std::move(limiter)) {}

std::size_t HttpTokenCounter::count(std::string_view t) const {
  const json req = {{"content", std::string(t)}};
  const auto res = client_.post(req.dump(), "application/json");
  try {
    return json::parse(res.body).at("tokens").size();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedResponse, std::string("tokenize response: ") + e.what());
  }
}

std::string display_name(std::string_view subject_iri, const rdf::PrefixMap& pm) {
  return pm.compact(subject_iri);
}

std::string render_prompt(const AnchorQuestion& anchor,
                          const std::vector<const PromptCandidate*>& body,
                          std::string_view in_context_example, const rdf::PrefixMap& pm) {
  std::string names;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (i) names += ", ";
    names += display_name(body[i]->subject, pm);
  }
  std::string out;
  out += "For " + std::to_string(body.size()) +
         " knowledge graphs, an extract from the RDF/XML file is provided; the names of the "
         "knowledge graphs are: " +
         names + ". We want to find an answer to: \"" + anchor.text +
         "\". These are the extracts:\n";
  for (const auto* c : body) {
    out += c->text;
    if (!out.ends_with('\n')) out += '\n';
    out += '\n';
  }
  out += "Give me a simple answer to \"" + anchor.text + "\". ";
  out += "Only use the provided information. First, choose the extract that best allows you to "
         "answer among: " +
         names +
         ". Delimit your chosen answer with the tags <CHOICE> </CHOICE>. Second, give your "
         "answer by delimiting it with the tags <ANSWER> </ANSWER>. Your answer should be "
         "concise. If it is a person, I need the first name and the last name. ";
  out += in_context_example;
  out += '\n';
  return out;
}

AssembledPrompt assemble_prompt(const PromptSpec& spec, const TokenCounter& counter,
                                const rdf::PrefixMap& pm) {
  if (spec.candidates.empty()) throw Error(ErrorCode::InvalidArgument, "prompt needs a candidate");
  std::vector<const PromptCandidate*> by_rank;
  std::set<std::size_t> ranks;
  for (const auto& c : spec.candidates) {
    if (!ranks.insert(c.rank).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate rank " + std::to_string(c.rank));
    }
    by_rank.push_back(&c);
  }
  std::sort(by_rank.begin(), by_rank.end(),
            [](const PromptCandidate* a, const PromptCandidate* b) { return a->rank < b->rank; });

  AssembledPrompt out;
  while (true) {
    auto body = by_rank;
    if (spec.ordering == Ordering::tail_best) std::reverse(body.begin(), body.end());
    auto rendered = render_prompt(spec.anchor, body, spec.in_context_example, pm);
    const auto tokens = counter.count(rendered);
    if (tokens <= spec.token_budget) {
      out.text = std::move(rendered);
      out.token_count = tokens;
      for (const auto* c : body) out.body_ranks.push_back(c->rank);
      return out;
    }
    if (by_rank.size() == 1) {
      throw Error(ErrorCode::BudgetUnsatisfiable,
                  "prompt with only the rank-" + std::to_string(by_rank.front()->rank) +
                      " document needs " + std::to_string(tokens) + " tokens, budget is " +
                      std::to_string(spec.token_budget));
    }
    out.dropped_ranks.push_back(by_rank.back()->rank);
    by_rank.pop_back();
  }
}

GenerationRecord call_generator(const http::Client& backend, std::string_view prompt,
                                const GenParams& params) {
  const json req = {{"prompt", std::string(prompt)},
                    {"max_new_tokens", params.max_new_tokens},
                    {"temperature", params.temperature},
                    {"seed", params.seed}};
  const auto body = req.dump();
  http::Response res;
  try {
    res = backend.post(body, "application/json");
  } catch (const http::StatusError& e) {
    if (e.status() == 413 || (e.status() == 400 && text::icontains(e.body(), "context"))) {
      throw Error(ErrorCode::ContextOverflow, e.what());
    }
    throw;
  }
  GenerationRecord rec;
  rec.request_sha256 = sha256_hex(body);
  rec.response_sha256 = sha256_hex(res.body);
  rec.retries = res.retries;
  try {
    const auto doc = json::parse(res.body);
    if (doc.contains("error") && text::icontains(doc["error"].dump(), "context")) {
      throw Error(ErrorCode::ContextOverflow, doc["error"].dump());
    }
    rec.text = doc.at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedResponse, std::string("generator response: ") + e.what());
  }
  return rec;
}

namespace {

std::optional<std::string> tagged(std::string_view raw, std::string_view tag) {
  const auto lower = text::to_lower(raw);
  const auto open = "<" + text::to_lower(tag) + ">";
  const auto close = "</" + text::to_lower(tag) + ">";
  std::size_t from = 0;
  while (true) {
    const auto b = lower.find(open, from);
    if (b == std::string::npos) return std::nullopt;
    const auto start = b + open.size();
    const auto e = lower.find(close, start);
    if (e == std::string::npos) return std::nullopt;
    // A second opening tag before the close means the first one was stray.
    const auto reopen = lower.find(open, start);
    if (reopen != std::string::npos && reopen < e) {
      from = reopen;
      continue;
    }
    const auto content = text::trim(raw.substr(start, e - start));
    if (content.empty()) return std::nullopt;
    return std::string(content);
  }
}

std::string norm(std::string_view s) {
  auto t = text::trim(s);
  while (!t.empty() && (t.front() == '[' || t.front() == '<' || t.front() == '"')) t.remove_prefix(1);
  while (!t.empty() && (t.back() == ']' || t.back() == '>' || t.back() == '"')) t.remove_suffix(1);
  return text::to_lower(text::collapse_ws(t));
}

}  // namespace

GenOutcome parse_generation(std::string_view raw, const std::vector<std::string>& candidate_subjects,
                            const rdf::PrefixMap& pm) {
  GenOutcome out;
  out.raw = std::string(raw);
  out.choice_subject = tagged(raw, "CHOICE");
  out.answer_text = tagged(raw, "ANSWER");
  out.refusal = text::icontains(text::collapse_ws(raw), "no relevant information");
  if (out.choice_subject) {
    const auto want = norm(*out.choice_subject);
    for (const auto& s : candidate_subjects) {
      if (want == norm(s) || want == norm(display_name(s, pm)) ||
          want == norm(kg::readable_local_name(s))) {
        out.matched_subject = s;
        break;
      }
    }
    out.off_list = !out.matched_subject;
  }
  return out;
}

}  // namespace placeorigin::gen
