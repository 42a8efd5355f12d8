#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace drl {

enum class Tag { extract, judge, insight, agent };
const char* tag_name(Tag t);

struct ChatRequest {
  std::optional<std::string> system;
  std::string user;
  double temperature = 0.0;
  int max_output = 4096;
  Tag tag = Tag::agent;
};

struct ChatResponse {
  std::string text;
  std::string provider_name;
  long latency_ms = 0;
};

// Digest over (system, user, tag) with CRLF and trailing newlines normalized away,
// so byte-trivial prompt variations hit the same mock script entry.
std::string fingerprint(const ChatRequest& req);

class Provider {
 public:
  virtual ~Provider() = default;
  virtual ChatResponse complete(const ChatRequest& req) = 0;
  virtual std::string name() const = 0;
};

struct MockScript {
  enum class Fallback { fail, canned_graph };
  std::map<std::string, std::string> entries;  // fingerprint -> response text
  Fallback fallback = Fallback::fail;
};

// Script file: {"fallback_mode": "fail"|"canned-graph", "entries": {fingerprint: text}}
MockScript load_mock_script(const std::string& path);
void save_mock_script(const MockScript& script, const std::string& path);

class MockProvider : public Provider {
 public:
  explicit MockProvider(MockScript script) : script_(std::move(script)) {}
  ChatResponse complete(const ChatRequest& req) override;
  std::string name() const override { return "mock"; }

 private:
  MockScript script_;
};

struct HttpProviderConfig {
  std::string base_url;  // scheme://host[:port]
  std::string api_key;
  std::string model;
  std::string path = "/v1/chat/completions";
  int max_retries = 3;      // retry cap for transient transport errors
  int backoff_base_ms = 100;  // doubled per attempt
  int max_inflight = 4;
  int timeout_s = 120;
  std::optional<long> seed;
};

// Chat-completions style backend. Retries connection errors, 429 and 5xx with
// exponential backoff; anything else fails immediately.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig cfg);
  ~HttpProvider() override;
  ChatResponse complete(const ChatRequest& req) override;
  std::string name() const override { return "http:" + cfg_.model; }

 private:
  HttpProviderConfig cfg_;
  struct Inflight;
  std::unique_ptr<Inflight> inflight_;
};

// Dispatches per request tag; tags without an entry use the fallback provider.
class RoutingProvider : public Provider {
 public:
  RoutingProvider(std::map<Tag, std::shared_ptr<Provider>> routes,
                  std::shared_ptr<Provider> fallback)
      : routes_(std::move(routes)), fallback_(std::move(fallback)) {}
  ChatResponse complete(const ChatRequest& req) override;
  std::string name() const override { return "routing"; }

 private:
  std::map<Tag, std::shared_ptr<Provider>> routes_;
  std::shared_ptr<Provider> fallback_;
};

}  // namespace drl
