#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "placeorigin/http.hpp"
#include "placeorigin/rdf.hpp"
#include "placeorigin/toponym.hpp"

namespace placeorigin::gen {

/// tail_best lists the extracts from rank k down to rank 1, so the most
/// relevant one sits right before the question is repeated. head_best is the
/// reverse.
enum class Ordering { tail_best, head_best };

std::string_view to_string(Ordering o) noexcept;
/// Accepts "tail_best"/"tail-best" and "head_best"/"head-best".
std::optional<Ordering> parse_ordering(std::string_view s);

inline constexpr std::string_view kDefaultInContextExample =
    "For example, to \"Who is Rue Madame Curie in Beirut, Lebanon named after?\", write: "
    "\"<CHOICE> [write_here_your_chosen_source] </CHOICE> <ANSWER> Marie Curie </ANSWER> "
    "Based on the provided information, ...\"";

/// One ranked document handed to the prompt.
struct PromptCandidate {
  std::string subject;  ///< full IRI
  std::size_t rank = 0;
  std::string text;     ///< RDF/XML extract
};

struct PromptSpec {
  AnchorQuestion anchor;
  std::vector<PromptCandidate> candidates;  ///< any order; rank decides placement
  Ordering ordering = Ordering::tail_best;
  std::size_t token_budget = 4096;
  std::string in_context_example = std::string(kDefaultInContextExample);
};

/// Counts tokens in the generation backend's units.
class TokenCounter {
 public:
  virtual ~TokenCounter() = default;
  virtual std::size_t count(std::string_view text) const = 0;
};

/// Whitespace-separated words. Deterministic; meant for tests.
class WhitespaceTokenCounter final : public TokenCounter {
 public:
  std::size_t count(std::string_view text) const override;
};

/// ceil(bytes / bytes_per_token). With the default of 3 this over-counts
/// typical BPE vocabularies on RDF/XML, so it is a safe offline bound.
class HeuristicTokenCounter final : public TokenCounter {
 public:
  explicit HeuristicTokenCounter(double bytes_per_token = 3.0) : ratio_(bytes_per_token) {}
  std::size_t count(std::string_view text) const override;

 private:
  double ratio_;
};

/// llama.cpp-style tokenizer endpoint: POST {"content": text} -> {"tokens": [...]}.
class HttpTokenCounter final : public TokenCounter {
 public:
  HttpTokenCounter(std::string url, http::RetryPolicy policy = {},
                   std::shared_ptr<http::RateLimiter> limiter = nullptr);
  std::size_t count(std::string_view text) const override;

 private:
  http::Client client_;
};

struct AssembledPrompt {
  std::string text;
  std::size_t token_count = 0;
  std::vector<std::size_t> body_ranks;    ///< ranks in the order they appear
  std::vector<std::size_t> dropped_ranks; ///< in the order they were dropped
};

/// Short form shown to the model for a subject IRI ("dbr:John_Batman").
std::string display_name(std::string_view subject_iri,
                         const rdf::PrefixMap& pm = rdf::PrefixMap::defaults());

/// Renders the prompt for exactly the given candidates, in the given order.
std::string render_prompt(const AnchorQuestion& anchor,
                          const std::vector<const PromptCandidate*>& body,
                          std::string_view in_context_example,
                          const rdf::PrefixMap& pm = rdf::PrefixMap::defaults());

/// Renders the prompt and, while it exceeds the budget, drops the
/// least-relevant remaining document. Throws Error(InvalidArgument) when there
/// are no candidates or ranks repeat, and Error(BudgetUnsatisfiable) when even
/// the best document alone does not fit.
AssembledPrompt assemble_prompt(const PromptSpec& spec, const TokenCounter& counter,
                                const rdf::PrefixMap& pm = rdf::PrefixMap::defaults());

struct GenParams {
  int max_new_tokens = 256;
  double temperature = 0.0;
  std::uint64_t seed = 0;
};

/// What was sent and received, with content hashes for the run log.
struct GenerationRecord {
  std::string text;
  std::string request_sha256;
  std::string response_sha256;
  int retries = 0;
};

/// POST {prompt, max_new_tokens, temperature, seed} -> {text}. Throws
/// Error(ContextOverflow) when the backend rejects the prompt as too long,
/// Error(HttpError) for other transport failures and
/// Error(MalformedResponse) for unexpected bodies.
GenerationRecord call_generator(const http::Client& backend, std::string_view prompt,
                                const GenParams& params);

struct GenOutcome {
  std::optional<std::string> choice_subject;
  std::optional<std::string> answer_text;
  std::string raw;
  bool refusal = false;
  bool off_list = false;
  /// The candidate IRI the choice refers to, when it matches one.
  std::optional<std::string> matched_subject;

  bool operator==(const GenOutcome&) const = default;
};

/// Total parser: takes the first complete <CHOICE>...</CHOICE> and
/// <ANSWER>...</ANSWER> spans (tags case-insensitive), trims them, and flags
/// "no relevant information" as a refusal. A choice is matched against each
/// candidate's IRI, prefixed name and readable local name, ignoring case and
/// whitespace runs; otherwise it is marked off_list.
GenOutcome parse_generation(std::string_view raw, const std::vector<std::string>& candidate_subjects,
                            const rdf::PrefixMap& pm = rdf::PrefixMap::defaults());

}  // namespace placeorigin::gen
