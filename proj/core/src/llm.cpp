#include "flowtriage/llm.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "flowtriage/common.hpp"

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

namespace flowtriage::llm {

using nlohmann::json;

std::size_t estimate_tokens(std::string_view text) {
    return (text.size() + 3) / 4;
}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string::size_type start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        if (nl == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    if (!lines.empty() && lines.back().empty()) lines.pop_back();  // trailing newline
    return lines;
}

}  // namespace

std::string extract_snippet(const SnippetRequest& req) {
    const std::filesystem::path full = req.package_root / req.sink_file;
    std::ifstream in(full, std::ios::binary);
    if (!in) throw Error("missing-file", "cannot read sink file " + full.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    if (req.token_budget == 0) throw Error("bad-value", "token budget must be positive");
    if (estimate_tokens(text) <= req.token_budget) {
        // still reject an out-of-range sink line: the report is inconsistent
        const auto lines = split_lines(text);
        if (req.sink_line == 0 || req.sink_line > lines.size())
            throw Error("sink-out-of-range",
                        "sink line " + std::to_string(req.sink_line) + " outside file of " +
                            std::to_string(lines.size()) + " lines");
        return text;
    }

    const std::vector<std::string> lines = split_lines(text);
    if (req.sink_line == 0 || req.sink_line > lines.size())
        throw Error("sink-out-of-range", "sink line " + std::to_string(req.sink_line) +
                                             " outside file of " + std::to_string(lines.size()) +
                                             " lines");

    const std::size_t sink = req.sink_line - 1;
    const std::size_t byte_budget = req.token_budget * 4;

    std::string sink_text = lines[sink];
    if (sink_text.size() > byte_budget) sink_text.resize(byte_budget);  // degenerate long line

    std::size_t first = sink, last = sink;
    std::size_t bytes = sink_text.size();
    bool above_open = sink > 0;
    bool below_open = sink + 1 < lines.size();
    bool try_above = true;
    while (above_open || below_open) {
        const bool go_above = (try_above && above_open) || !below_open;
        const std::size_t candidate = go_above ? first - 1 : last + 1;
        const std::size_t cost = lines[candidate].size() + 1;  // joining newline
        if ((bytes + cost + 3) / 4 > req.token_budget) break;  // next line would exceed
        bytes += cost;
        if (go_above) {
            first = candidate;
            above_open = first > 0;
        } else {
            last = candidate;
            below_open = last + 1 < lines.size();
        }
        try_above = !go_above;
    }

    std::string out;
    out.reserve(bytes);
    for (std::size_t i = first; i <= last; ++i) {
        if (i != first) out.push_back('\n');
        out += i == sink ? sink_text : lines[i];
    }
    return out;
}

namespace {

constexpr std::string_view kPromptTemplate =
    "Our dynamic analysis tool identified a taint flow in a Node.js package, suggesting a "
    "potential vulnerability related to either arbitrary code execution (CWE-094) or arbitrary "
    "command injection (CWE-078). While the tool attempts to confirm vulnerabilities by "
    "generating exploits, this approach may miss some cases. I hope you can assist with triaging "
    "and classification by predicting whether the vulnerability is exploitable.\n\n"
    "I have extracted relevant parts of the code from the file containing the sink, along with "
    "surrounding lines for context. After reasoning about the snippet, please output \"Yes\" if "
    "you believe it contains an exploitable vulnerability, or \"No\" if you believe it is not "
    "exploitable.\n\n"
    "{code snippet here}";

}  // namespace

std::string build_prompt(const std::string& snippet) {
    if (snippet.empty()) throw Error("empty-snippet", "cannot build a prompt for an empty snippet");
    std::string prompt(kPromptTemplate);
    const auto placeholder = prompt.find("{code snippet here}");
    prompt.replace(placeholder, std::string_view("{code snippet here}").size(), snippet);
    return prompt;
}

const std::vector<ThinkDelimiters>& default_think_delimiters() {
    static const std::vector<ThinkDelimiters> delims{{"<think>", "</think>"}};
    return delims;
}

std::string strip_reasoning(std::string_view response,
                            const std::vector<ThinkDelimiters>& delimiters) {
    std::string text(response);
    for (const auto& d : delimiters) {
        std::string out;
        std::string::size_type pos = 0;
        while (pos < text.size()) {
            const auto open = text.find(d.open, pos);
            if (open == std::string::npos) {
                out += text.substr(pos);
                break;
            }
            out += text.substr(pos, open - pos);
            const auto close = text.find(d.close, open + d.open.size());
            if (close == std::string::npos) break;  // unclosed: drop to end of text
            pos = close + d.close.size();
        }
        text = std::move(out);
    }
    return text;
}

namespace {

bool contains_standalone_yes(std::string_view text) {
    std::string::size_type pos = 0;
    while ((pos = text.find("Yes", pos)) != std::string_view::npos) {
        const bool left_ok =
            pos == 0 || !std::isalnum(static_cast<unsigned char>(text[pos - 1]));
        const std::size_t after = pos + 3;
        const bool right_ok =
            after >= text.size() || !std::isalnum(static_cast<unsigned char>(text[after]));
        if (left_ok && right_ok) return true;
        pos += 1;
    }
    return false;
}

}  // namespace

bool parse_response(std::string_view response, const std::vector<ThinkDelimiters>& delimiters) {
    return contains_standalone_yes(strip_reasoning(response, delimiters));
}

Transport http_transport() {
    return [](const std::string& url, const std::vector<Header>& headers,
              const std::string& body) -> HttpResponse {
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) return {0, "invalid url"};
        const auto path_start = url.find('/', scheme_end + 3);
        const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
        const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

        httplib::Client client(origin);
        client.set_connection_timeout(30);
        client.set_read_timeout(120);
        httplib::Headers hl;
        for (const auto& [k, v] : headers) hl.emplace(k, v);
        auto res = client.Post(path, hl, body, "application/json");
        if (!res) return {0, httplib::to_string(res.error())};
        return {res->status, res->body};
    };
}

LlmVerdict classify_zero_shot(const ChatEndpoint& endpoint, const std::string& prompt,
                              const Transport& transport, const Sleeper& sleep) {
    json request;
    request["model"] = endpoint.model;
    request["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
    request["temperature"] = 0;
    const std::string body = request.dump();

    std::vector<Header> headers;
    if (const char* key = std::getenv(endpoint.api_key_env.c_str()); key != nullptr && *key) {
        headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }

    const std::string url = endpoint.base_url + endpoint.path;
    const Sleeper wait = sleep ? sleep : [](std::chrono::milliseconds d) {
        std::this_thread::sleep_for(d);
    };

    HttpResponse response;
    std::string failure = "network";
    for (std::size_t attempt = 0; attempt <= endpoint.max_retries; ++attempt) {
        if (attempt > 0) {
            wait(endpoint.backoff_base * (1LL << (attempt - 1)));
        }
        response = transport(url, headers, body);
        if (response.status == 200) break;
        failure = response.status == 429 ? "rate-limit" : "network";
        const bool retryable =
            response.status == 0 || response.status == 429 || response.status >= 500;
        if (!retryable)
            throw Error("network", "endpoint returned status " + std::to_string(response.status));
        if (attempt == endpoint.max_retries)
            throw Error(failure, "request failed after " +
                                     std::to_string(endpoint.max_retries + 1) + " attempts (last status " +
                                     std::to_string(response.status) + ")");
    }

    std::string content;
    try {
        const json parsed = json::parse(response.body);
        content = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw Error("malformed-response", std::string("cannot extract completion: ") + e.what());
    }

    LlmVerdict verdict;
    verdict.raw_response = content;
    const std::string stripped = strip_reasoning(content, endpoint.think_delimiters);
    verdict.reasoning_stripped = stripped != content;
    verdict.verdict = contains_standalone_yes(stripped);
    return verdict;
}

TranscriptWriter::TranscriptWriter(const std::filesystem::path& path) : path_(path) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream touch(path_, std::ios::app);
    if (!touch) throw Error("io", "cannot open transcript " + path_.string());
}

namespace {

std::string iso8601_utc(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

void TranscriptWriter::record(const std::string& package, const std::string& prompt,
                              const LlmVerdict& verdict,
                              std::chrono::system_clock::time_point requested_at,
                              std::chrono::system_clock::time_point completed_at) {
    json line;
    line["package"] = package;
    line["prompt_hash"] = to_hex(fnv1a64(prompt));
    line["token_heuristic"] = "ceil(bytes/4)";
    line["raw_response"] = verdict.raw_response;
    line["verdict"] = verdict.verdict;
    line["reasoning_stripped"] = verdict.reasoning_stripped;
    line["requested_at"] = iso8601_utc(requested_at);
    line["completed_at"] = iso8601_utc(completed_at);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error("io", "cannot append to transcript " + path_.string());
    out << line.dump() << '\n';
}

}  // namespace flowtriage::llm
