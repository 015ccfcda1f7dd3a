#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "wfr/error.hpp"
#include "wfr/time.hpp"

namespace wfr {

struct BackendConfig {
  std::string base_url;     // http(s)://host[:port]
  std::string api_key_env;  // env var holding the bearer token, e.g. WFR_API_KEY_OPENAI
  std::string model;
  double temperature = 0.3;
  int top_k = 50;
  double top_p = 0.9;
  int max_tokens = 400;
  int parallelism = 4;
  int retry_budget = 2;  // retries after the first attempt
  int image_cap = 0;     // per-request image limit; 0 = unlimited
  long long seed = -1;   // >= 0: sent as "seed" (+ index for sampling)
  std::string journal_path;
  int backoff_base_ms = 250;

  void validate() const {
    require(temperature >= 0, Errc::config_error, "temperature must be >= 0");
    require(top_p > 0 && top_p <= 1, Errc::config_error, "top_p must be in (0, 1]");
    require(parallelism >= 1, Errc::config_error, "parallelism must be >= 1");
    require(retry_budget >= 0, Errc::config_error, "retry budget must be >= 0");
  }
};

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string text;
  std::vector<std::string> image_paths;
};

struct HttpReply {
  int status = 0;
  std::string body;
  std::string error;  // non-empty means the transport itself failed
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpReply post_json(const std::string& path, const std::string& body,
                              const std::vector<std::pair<std::string, std::string>>& headers) = 0;
};

class HttpTransport : public Transport {
 public:
  explicit HttpTransport(std::string base_url) : base_url_(std::move(base_url)) {}

  HttpReply post_json(const std::string& path, const std::string& body,
                      const std::vector<std::pair<std::string, std::string>>& headers) override {
    httplib::Client client(base_url_);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(path, h, body, "application/json");
    if (!res) return {0, "", httplib::to_string(res.error())};
    return {res->status, res->body, ""};
  }

 private:
  std::string base_url_;
};

/// In-process mock transport so the whole pipeline runs offline.
class LoopbackTransport : public Transport {
 public:
  using Handler = std::function<HttpReply(const std::string& path, const std::string& body)>;
  explicit LoopbackTransport(Handler handler) : handler_(std::move(handler)) {}

  HttpReply post_json(const std::string& path, const std::string& body,
                      const std::vector<std::pair<std::string, std::string>>&) override {
    return handler_(path, body);
  }

 private:
  Handler handler_;
};

namespace detail {

inline std::string base64_encode(const std::string& bytes) {
  static const char* alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 2 < bytes.size()) {
    unsigned v = unsigned(static_cast<unsigned char>(bytes[i])) << 16 |
                 unsigned(static_cast<unsigned char>(bytes[i + 1])) << 8 |
                 unsigned(static_cast<unsigned char>(bytes[i + 2]));
    out.push_back(alphabet[v >> 18]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
    i += 3;
  }
  if (i + 1 == bytes.size()) {
    unsigned v = unsigned(static_cast<unsigned char>(bytes[i])) << 16;
    out.push_back(alphabet[v >> 18]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == bytes.size()) {
    unsigned v = unsigned(static_cast<unsigned char>(bytes[i])) << 16 |
                 unsigned(static_cast<unsigned char>(bytes[i + 1])) << 8;
    out.push_back(alphabet[v >> 18]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class Limiter {
 public:
  explicit Limiter(int slots) : available_(slots) {}

  struct Guard {
    Limiter* limiter;
    ~Guard() {
      std::lock_guard<std::mutex> lock(limiter->mu_);
      ++limiter->available_;
      limiter->cv_.notify_one();
    }
  };

  Guard acquire() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return available_ > 0; });
    --available_;
    return Guard{this};
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int available_;
};

}  // namespace detail

struct SampleMeta {
  int index = 0;
  double duration_ms = 0;
};

struct SampleFailure {
  int index = 0;
  std::string error;
};

struct SampleBatch {
  std::vector<std::string> texts;       // successful completions, index order
  std::vector<SampleMeta> meta;         // one per success
  std::vector<SampleFailure> failures;  // calls that exhausted their retries
};

/// Uniform client for chat-completion and embedding endpoints. Keeps at most
/// cfg.parallelism requests in flight and journals every exchange.
class Gateway {
 public:
  explicit Gateway(BackendConfig cfg, std::shared_ptr<Transport> transport = nullptr)
      : cfg_(std::move(cfg)),
        transport_(transport ? std::move(transport)
                             : std::make_shared<HttpTransport>(cfg_.base_url)),
        limiter_(cfg_.parallelism) {
    cfg_.validate();
  }

  const BackendConfig& config() const { return cfg_; }

  std::string chat(const std::vector<ChatMessage>& messages) {
    return chat_with_seed(messages, cfg_.seed);
  }

  /// n independent completions; partial results come back with a failure
  /// manifest, zero successes raise AllFailed.
  SampleBatch sample_n(const std::vector<ChatMessage>& messages, int n) {
    require(n >= 1, Errc::precondition, "sample_n needs n >= 1");
    std::vector<std::optional<std::string>> results(static_cast<size_t>(n));
    std::vector<SampleFailure> failures;
    std::vector<SampleMeta> metas;
    std::mutex mu;
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        auto started = std::chrono::steady_clock::now();
        try {
          long long seed = cfg_.seed >= 0 ? cfg_.seed + i : -1;
          std::string text = chat_with_seed(messages, seed);
          double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - started)
                          .count();
          std::lock_guard<std::mutex> lock(mu);
          results[size_t(i)] = std::move(text);
          metas.push_back({i, ms});
        } catch (const Error& e) {
          std::lock_guard<std::mutex> lock(mu);
          failures.push_back({i, e.what()});
        }
      }
    };
    int threads = std::min(cfg_.parallelism, n);
    std::vector<std::thread> pool;
    pool.reserve(size_t(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    SampleBatch batch;
    for (auto& r : results)
      if (r) batch.texts.push_back(std::move(*r));
    std::sort(metas.begin(), metas.end(),
              [](const SampleMeta& a, const SampleMeta& b) { return a.index < b.index; });
    std::sort(failures.begin(), failures.end(),
              [](const SampleFailure& a, const SampleFailure& b) { return a.index < b.index; });
    batch.meta = std::move(metas);
    batch.failures = std::move(failures);
    if (batch.texts.empty()) fail(Errc::all_failed, "all " + std::to_string(n) + " calls failed");
    return batch;
  }

  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) {
    require(!texts.empty(), Errc::precondition, "embed needs a non-empty list");
    nlohmann::json payload{{"input", texts}};
    if (!cfg_.model.empty()) payload["model"] = cfg_.model;
    auto reply = post_with_retries("/v1/embeddings", payload.dump());
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(reply.body);
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::transport_error, std::string("embeddings reply is not JSON: ") + e.what());
    }
    std::vector<std::vector<double>> out(texts.size());
    try {
      for (const auto& item : doc.at("data")) {
        size_t idx = item.value("index", 0u);
        require(idx < out.size(), Errc::transport_error, "embedding index out of range");
        out[idx] = item.at("embedding").get<std::vector<double>>();
      }
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::transport_error, std::string("embeddings reply malformed: ") + e.what());
    }
    return out;
  }

  /// Adapter for modules that take a (system, user) -> reply callable.
  std::function<std::string(const std::string&, const std::string&)> chat_fn() {
    return [this](const std::string& system, const std::string& user) {
      return chat({{"system", system, {}}, {"user", user, {}}});
    };
  }

 private:
  std::string chat_with_seed(const std::vector<ChatMessage>& messages, long long seed) {
    nlohmann::json payload{{"model", cfg_.model},
                           {"temperature", cfg_.temperature},
                           {"top_p", cfg_.top_p},
                           {"top_k", cfg_.top_k},
                           {"max_tokens", cfg_.max_tokens}};
    if (seed >= 0) payload["seed"] = seed;
    payload["messages"] = nlohmann::json::array();
    int images = 0;
    for (const auto& m : messages) images += int(m.image_paths.size());
    if (cfg_.image_cap > 0 && images > cfg_.image_cap)
      fail(Errc::oversize_request, std::to_string(images) + " images exceed the cap of " +
                                       std::to_string(cfg_.image_cap));
    for (const auto& m : messages) {
      nlohmann::json msg{{"role", m.role}};
      if (m.image_paths.empty()) {
        msg["content"] = m.text;
      } else {
        auto content = nlohmann::json::array();
        content.push_back({{"type", "text"}, {"text", m.text}});
        for (const auto& path : m.image_paths) {
          std::ifstream in(path, std::ios::binary);
          require(in.good(), Errc::precondition, "image not found: " + path);
          std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
          content.push_back(
              {{"type", "image_url"},
               {"image_url",
                {{"url", "data:image/png;base64," + detail::base64_encode(bytes)}}}});
        }
        msg["content"] = std::move(content);
      }
      payload["messages"].push_back(std::move(msg));
    }
    auto reply = post_with_retries("/v1/chat/completions", payload.dump());
    try {
      auto doc = nlohmann::json::parse(reply.body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::transport_error, std::string("chat reply malformed: ") + e.what());
    }
  }

  HttpReply post_with_retries(const std::string& path, const std::string& body) {
    std::vector<std::pair<std::string, std::string>> headers;
    if (!cfg_.api_key_env.empty()) {
      if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
        headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }
    auto started = std::chrono::steady_clock::now();
    int attempts = 0;
    HttpReply reply;
    while (true) {
      ++attempts;
      {
        auto slot = limiter_.acquire();
        reply = transport_->post_json(path, body, headers);
      }
      bool transient = !reply.error.empty() || reply.status == 429 || reply.status == 408 ||
                       reply.status >= 500;
      if (!transient || attempts > cfg_.retry_budget) break;
      std::this_thread::sleep_for(
          std::chrono::milliseconds(cfg_.backoff_base_ms * (1 << (attempts - 1))));
    }
    double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    journal(path, body, reply, attempts, ms);

    if (!reply.error.empty())
      fail(Errc::transport_error, "after " + std::to_string(attempts) + " attempts: " + reply.error);
    if (reply.status == 401 || reply.status == 403) fail(Errc::auth_error, reply.body);
    if (reply.status == 413) fail(Errc::oversize_request, reply.body);
    if (reply.status == 429)
      fail(Errc::rate_limited, "still throttled after " + std::to_string(attempts) + " attempts");
    if (reply.status >= 400)
      fail(Errc::transport_error, "HTTP " + std::to_string(reply.status) + ": " + reply.body);
    return reply;
  }

  void journal(const std::string& path, const std::string& request, const HttpReply& reply,
               int attempts, double duration_ms) {
    if (cfg_.journal_path.empty()) return;
    nlohmann::json entry{
        {"ts", format_utc(std::chrono::time_point_cast<std::chrono::seconds>(
                   std::chrono::system_clock::now()))},
        {"endpoint", path},
        {"request_hash", detail::hex64(detail::fnv1a64(request))},
        {"status", reply.status},
        {"attempts", attempts},
        {"duration_ms", duration_ms},
        {"request_bytes", request.size()},
        {"response_bytes", reply.body.size()},
    };
    try {
      auto doc = nlohmann::json::parse(reply.body);
      if (doc.contains("usage")) entry["usage"] = doc["usage"];
    } catch (const nlohmann::json::exception&) {
    }
    std::lock_guard<std::mutex> lock(journal_mu_);
    std::ofstream out(cfg_.journal_path, std::ios::app);
    out << entry.dump() << "\n";
  }

  BackendConfig cfg_;
  std::shared_ptr<Transport> transport_;
  detail::Limiter limiter_;
  std::mutex journal_mu_;
};

}  // namespace wfr
