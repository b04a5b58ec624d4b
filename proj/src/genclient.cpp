#include "stylo/genclient.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "stylo/error.hpp"
#include "stylo/lingua.hpp"

namespace stylo {

using nlohmann::json;

PromptTemplate PromptTemplate::wikihow_default() {
  return {"I am writing an article titled {title} for a WikiHow page. "
          "Write a paragraph of length {length} whose title is {headline} "
          "for the {sectionLabel} section of this article."};
}

std::string render_prompt(const PromptTemplate& tmpl, const ParagraphRecord& r) {
  auto field = [&](const std::string& name) -> std::string {
    if (name == "title") return r.title;
    if (name == "headline") return r.headline;
    if (name == "sectionLabel") return r.section_label;
    if (name == "length") return std::to_string(count_words(r.text));
    throw DataError("unknown placeholder: {" + name + "}");
  };

  std::string out;
  std::size_t i = 0;
  while (i < tmpl.text.size()) {
    if (tmpl.text[i] == '{') {
      std::size_t close = tmpl.text.find('}', i);
      if (close == std::string::npos)
        throw DataError("unterminated placeholder in prompt template");
      std::string name = tmpl.text.substr(i + 1, close - i - 1);
      std::string value = field(name);
      if (value.empty()) throw DataError("missing field: " + name);
      out += value;
      i = close + 1;
    } else {
      out.push_back(tmpl.text[i]);
      ++i;
    }
  }
  return out;
}

std::chrono::milliseconds SystemClock::now() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now().time_since_epoch());
}

void SystemClock::sleep_for(std::chrono::milliseconds d) {
  std::this_thread::sleep_for(d);
}

RateLimiter::RateLimiter(int per_minute, Clock& clock)
    : per_minute_(per_minute), clock_(clock) {
  if (per_minute < 1) throw DataError("rate limit must be positive");
}

void RateLimiter::acquire() {
  using std::chrono::milliseconds;
  const milliseconds window{60'000};
  std::unique_lock<std::mutex> lock(mutex_);
  while (true) {
    milliseconds now = clock_.now();
    while (!stamps_.empty() && now - stamps_.front() >= window)
      stamps_.pop_front();
    if (static_cast<int>(stamps_.size()) < per_minute_) {
      stamps_.push_back(now);
      return;
    }
    milliseconds wait = stamps_.front() + window - now;
    lock.unlock();
    clock_.sleep_for(wait);
    lock.lock();
  }
}

namespace detail {

std::string content_hash(const std::string& payload) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : payload) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

std::string extract_completion(const std::string& body) {
  try {
    json j = json::parse(body);
    const json& choices = j.at("choices");
    if (!choices.is_array() || choices.empty())
      throw DataError("completion response has no choices");
    return choices[0].at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed completion response: ") + e.what());
  }
}

}  // namespace detail

std::string cache_key(const std::string& prompt, const std::string& model_name) {
  return detail::content_hash(prompt + '\x1f' + model_name);
}

namespace {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
  std::size_t scheme = url.find("://");
  if (scheme == std::string::npos)
    throw DataError("endpoint must include a scheme: " + url);
  std::size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

ParagraphRecord completion_record(const ParagraphRecord& source,
                                  const std::string& text) {
  ParagraphRecord r;
  r.id = source.id + "-gen";
  r.title = source.title;
  r.headline = source.headline;
  r.section_label = source.section_label;
  r.text = text;
  r.label = Label::chatbot;
  r.pair_id = source.pair_id;
  return r;
}

}  // namespace

ParagraphRecord generate(const GenerationJob& job, const PromptTemplate& tmpl,
                         const ParagraphRecord& source, Clock& clock,
                         RateLimiter* limiter, GenerationStats* stats) {
  if (job.max_retries < 0) throw DataError("max_retries must be >= 0");
  const std::string prompt = render_prompt(tmpl, source);
  const std::string key = cache_key(prompt, job.model_name);

  std::filesystem::path cache_file;
  if (!job.cache_dir.empty()) {
    cache_file = job.cache_dir / (key + ".json");
    if (std::filesystem::exists(cache_file)) {
      std::ifstream in(cache_file);
      json cached;
      try {
        in >> cached;
        std::string text = cached.at("text").get<std::string>();
        if (stats) stats->cache_hits += 1;
        return completion_record(source, text);
      } catch (const json::exception& e) {
        throw DataError("corrupt cache entry " + cache_file.string() + ": " +
                        e.what());
      }
    }
  }

  json request{{"model", job.model_name},
               {"messages", json::array({json{{"role", "user"},
                                              {"content", prompt}}})}};
  if (job.max_tokens > 0) request["max_tokens"] = job.max_tokens;
  const std::string body = request.dump();

  Endpoint endpoint = parse_endpoint(job.endpoint);
  httplib::Client client(endpoint.base);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  httplib::Headers headers;
  if (const char* api_key = std::getenv(job.api_key_env.c_str());
      api_key && *api_key) {
    headers.emplace("Authorization", std::string("Bearer ") + api_key);
  }

  std::string completion;
  std::string response_body;
  for (int attempt = 0;; ++attempt) {
    if (limiter) limiter->acquire();
    httplib::Result res =
        client.Post(endpoint.path, headers, body, "application/json");
    if (stats) stats->network_calls += 1;
    if (!res) {
      throw DataError("endpoint unreachable: " + job.endpoint + " (" +
                      httplib::to_string(res.error()) + ")");
    }
    if (res->status == 429 || res->status >= 500) {
      if (attempt >= job.max_retries)
        throw DataError("request failed with HTTP " +
                        std::to_string(res->status) + " after " +
                        std::to_string(attempt) + " retries");
      if (stats) stats->retries += 1;
      clock.sleep_for(job.backoff_base * (1LL << attempt));
      continue;
    }
    if (res->status != 200)
      throw DataError("request failed with HTTP " + std::to_string(res->status));
    response_body = res->body;
    completion = detail::extract_completion(response_body);
    break;
  }
  if (completion.empty()) throw DataError("empty completion");

  if (!cache_file.empty()) {
    std::filesystem::create_directories(job.cache_dir);
    json entry{{"key", key},
               {"prompt", prompt},
               {"model", job.model_name},
               {"request", request},
               {"response", json::parse(response_body)},
               {"text", completion}};
    // Atomic write: temp file in the same directory, then rename.
    std::filesystem::path tmp = cache_file;
    tmp += ".tmp";
    {
      std::ofstream out(tmp);
      if (!out) throw DataError("cannot write cache entry: " + tmp.string());
      out << entry.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, cache_file);
  }
  return completion_record(source, completion);
}

std::vector<ParagraphRecord> split_generated(const ParagraphRecord& record) {
  std::vector<std::string> parts;
  std::string current;
  std::istringstream stream(record.text);
  std::string line;
  while (std::getline(stream, line)) {
    std::string trimmed = line;
    while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' '))
      trimmed.pop_back();
    if (trimmed.empty()) {
      if (!current.empty()) {
        parts.push_back(current);
        current.clear();
      }
    } else {
      if (!current.empty()) current += ' ';
      current += trimmed;
    }
  }
  if (!current.empty()) parts.push_back(current);

  if (parts.size() <= 1) return {record};
  std::vector<ParagraphRecord> out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    ParagraphRecord r = record;
    r.id = record.id + "-" + std::to_string(i + 1);
    r.text = parts[i];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace stylo
