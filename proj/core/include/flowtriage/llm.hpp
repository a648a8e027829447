#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowtriage::llm {

/// Heuristic token count: ceil(bytes / 4). The exact tokenizer is unknown at
/// this layer, so the heuristic is recorded alongside results for audits.
std::size_t estimate_tokens(std::string_view text);

struct SnippetRequest {
    std::filesystem::path package_root;
    std::string sink_file;          // path relative to package_root
    std::size_t sink_line = 1;      // 1-based
    std::size_t sink_col = 0;
    std::size_t token_budget = 1024;
};

/// The sink file when it fits the budget whole; otherwise a window grown
/// around the sink line, alternating one line above / one line below, stopping
/// when the next line would push the estimate past the budget. The emitted
/// snippet always contains the sink line and never exceeds the budget.
std::string extract_snippet(const SnippetRequest& req);

/// The zero-shot triage prompt with the code snippet substituted in.
/// Throws Error("empty-snippet") on an empty snippet.
std::string build_prompt(const std::string& snippet);

struct ThinkDelimiters {
    std::string open;
    std::string close;
};

const std::vector<ThinkDelimiters>& default_think_delimiters();

/// Remove every segment enclosed in the given delimiters (an unclosed opener
/// strips to the end of the text).
std::string strip_reasoning(std::string_view response,
                            const std::vector<ThinkDelimiters>& delimiters =
                                default_think_delimiters());

/// Verdict rule: after reasoning-stripping, a case-sensitive standalone word
/// "Yes" anywhere in the response means vulnerable; everything else does not.
bool parse_response(std::string_view response,
                    const std::vector<ThinkDelimiters>& delimiters = default_think_delimiters());

struct LlmVerdict {
    std::string raw_response;
    bool verdict = false;
    bool reasoning_stripped = false;
};

struct ChatEndpoint {
    std::string base_url;                      // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env = "FLOWTRIAGE_API_KEY";
    std::size_t max_retries = 3;               // retries after the first attempt
    std::chrono::milliseconds backoff_base{500};
    std::vector<ThinkDelimiters> think_delimiters = default_think_delimiters();
};

struct HttpResponse {
    int status = 0;  // 0 = transport-level failure
    std::string body;
};

using Header = std::pair<std::string, std::string>;
using Transport = std::function<HttpResponse(const std::string& url,
                                             const std::vector<Header>& headers,
                                             const std::string& body)>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// httplib-backed transport (http and https).
Transport http_transport();

/// One chat-completion round trip: sampling disabled (temperature 0),
/// transient failures (network, 429, 5xx) retried with exponential backoff up
/// to max_retries, reasoning stripped, verdict per parse_response. Throws
/// Error("network"/"rate-limit"/"malformed-response") when the contract cannot
/// be met.
LlmVerdict classify_zero_shot(const ChatEndpoint& endpoint, const std::string& prompt,
                              const Transport& transport = http_transport(),
                              const Sleeper& sleep = {});

/// Append-only JSONL transcript of request/verdict pairs for reproducibility
/// audits.
class TranscriptWriter {
public:
    explicit TranscriptWriter(const std::filesystem::path& path);

    void record(const std::string& package, const std::string& prompt, const LlmVerdict& verdict,
                std::chrono::system_clock::time_point requested_at,
                std::chrono::system_clock::time_point completed_at);

private:
    std::filesystem::path path_;
};

}  // namespace flowtriage::llm
