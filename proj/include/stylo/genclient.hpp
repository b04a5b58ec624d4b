#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "stylo/corpus.hpp"

namespace stylo {

/// Prompt template with {title}, {length}, {headline}, {sectionLabel}
/// placeholders.
struct PromptTemplate {
  std::string text;

  /// The WikiHow-style generation prompt used for paired corpora.
  static PromptTemplate wikihow_default();
};

/// Exact placeholder substitution; {length} is the word count of the source
/// text. Fails when a referenced field is empty or a placeholder is unknown.
std::string render_prompt(const PromptTemplate& tmpl, const ParagraphRecord& r);

/// Injectable clock so retry backoff and rate limiting are testable without
/// real sleeps.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::chrono::milliseconds now() = 0;
  virtual void sleep_for(std::chrono::milliseconds d) = 0;
};

class SystemClock final : public Clock {
 public:
  std::chrono::milliseconds now() override;
  void sleep_for(std::chrono::milliseconds d) override;
};

/// Sliding-window limiter: at most `per_minute` acquisitions in any
/// 60-second window. Safe under concurrent acquisition.
class RateLimiter {
 public:
  RateLimiter(int per_minute, Clock& clock);
  void acquire();

 private:
  int per_minute_;
  Clock& clock_;
  std::mutex mutex_;
  std::deque<std::chrono::milliseconds> stamps_;
};

struct GenerationJob {
  std::string endpoint;  // e.g. http://127.0.0.1:8080/v1/chat/completions
  std::string model_name = "gpt-3.5-turbo";
  int max_retries = 3;
  int rate_limit = 60;  // requests per minute, > 0
  std::filesystem::path cache_dir;
  int max_tokens = 0;                    // 0 = omit from request
  std::string api_key_env = "API_KEY";   // Authorization: Bearer $API_KEY
  std::chrono::milliseconds backoff_base{500};
};

struct GenerationStats {
  int network_calls = 0;
  int cache_hits = 0;
  int retries = 0;
};

/// Renders the prompt, consults the content-hash cache, and otherwise POSTs
/// a chat-completion request (retrying 429/5xx with exponential backoff).
/// The returned record carries the chatbot label and the source's pair_id.
ParagraphRecord generate(const GenerationJob& job, const PromptTemplate& tmpl,
                         const ParagraphRecord& source, Clock& clock,
                         RateLimiter* limiter = nullptr,
                         GenerationStats* stats = nullptr);

/// Splits a multi-paragraph completion into sibling records sharing the
/// pair_id; single-paragraph records pass through unchanged.
std::vector<ParagraphRecord> split_generated(const ParagraphRecord& record);

/// Cache key: hex content hash of (rendered prompt, model name); nothing
/// else invalidates it.
std::string cache_key(const std::string& prompt, const std::string& model_name);

namespace detail {
/// FNV-1a 64-bit, hex-encoded.
std::string content_hash(const std::string& payload);
/// Extracts choices[0].message.content from a chat-completion response body.
std::string extract_completion(const std::string& body);
}  // namespace detail

}  // namespace stylo
