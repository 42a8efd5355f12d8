#include "drl/provider.hpp"

#include "drl/digest.hpp"
#include "drl/errors.hpp"
#include "drl/graph.hpp"
#include "drl/text.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <thread>

using nlohmann::json;

namespace drl {

const char* tag_name(Tag t) {
  switch (t) {
    case Tag::extract: return "extract";
    case Tag::judge: return "judge";
    case Tag::insight: return "insight";
    case Tag::agent: return "agent";
  }
  return "?";
}

std::string fingerprint(const ChatRequest& req) {
  std::string sys = req.system ? normalize_newlines(*req.system) : "";
  std::string user = normalize_newlines(req.user);
  return sha256_hex(sys + '\x1e' + user + '\x1e' + tag_name(req.tag));
}

MockScript load_mock_script(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open mock script: " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw ConfigError("mock script is not a JSON object: " + path);
  MockScript s;
  if (auto it = doc.find("fallback_mode"); it != doc.end() && it->is_string()) {
    std::string mode = it->get<std::string>();
    if (mode == "fail") s.fallback = MockScript::Fallback::fail;
    else if (mode == "canned-graph") s.fallback = MockScript::Fallback::canned_graph;
    else throw ConfigError("unknown mock fallback_mode '" + mode + "'");
  }
  if (auto it = doc.find("entries"); it != doc.end()) {
    if (!it->is_object()) throw ConfigError("mock script 'entries' must be an object");
    for (auto e = it->begin(); e != it->end(); ++e) {
      if (!e.value().is_string()) throw ConfigError("mock script entry values must be strings");
      s.entries[e.key()] = e.value().get<std::string>();
    }
  }
  return s;
}

void save_mock_script(const MockScript& script, const std::string& path) {
  json doc;
  doc["fallback_mode"] =
      script.fallback == MockScript::Fallback::fail ? "fail" : "canned-graph";
  doc["entries"] = json::object();
  for (const auto& [k, v] : script.entries) doc["entries"][k] = v;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StoreWriteFailure("cannot write mock script: " + path);
  out << doc.dump(1) << '\n';
}

ChatResponse MockProvider::complete(const ChatRequest& req) {
  if (req.user.empty()) throw ProviderFailure("request user prompt is empty");
  std::string fp = fingerprint(req);
  auto it = script_.entries.find(fp);
  if (it != script_.entries.end()) return {it->second, name(), 0};
  if (script_.fallback == MockScript::Fallback::canned_graph && req.tag == Tag::extract) {
    return {canned_graph_document(), name(), 0};
  }
  std::string head = req.user.substr(0, 80);
  throw ScriptMiss("no scripted response for fingerprint " + fp + " (tag " + tag_name(req.tag) +
                   ", prompt head: " + head + ")");
}

// bounded in-flight gate; plain counter + condvar so the bound is runtime-configurable
struct HttpProvider::Inflight {
  std::mutex mu;
  std::condition_variable cv;
  int active = 0;
  int limit;
  explicit Inflight(int n) : limit(n > 0 ? n : 1) {}
  void acquire() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return active < limit; });
    ++active;
  }
  void release() {
    {
      std::lock_guard lock(mu);
      --active;
    }
    cv.notify_one();
  }
};

HttpProvider::HttpProvider(HttpProviderConfig cfg)
    : cfg_(std::move(cfg)), inflight_(std::make_unique<Inflight>(cfg_.max_inflight)) {
  if (cfg_.base_url.empty()) throw ConfigError("http provider requires a base url");
}

HttpProvider::~HttpProvider() = default;

ChatResponse HttpProvider::complete(const ChatRequest& req) {
  if (req.user.empty()) throw ProviderFailure("request user prompt is empty");
  inflight_->acquire();
  struct Release {
    Inflight* g;
    ~Release() { g->release(); }
  } release{inflight_.get()};

  json body;
  body["model"] = cfg_.model;
  body["messages"] = json::array();
  if (req.system) body["messages"].push_back({{"role", "system"}, {"content", *req.system}});
  body["messages"].push_back({{"role", "user"}, {"content", req.user}});
  body["temperature"] = req.temperature;
  body["max_tokens"] = req.max_output;
  if (cfg_.seed) body["seed"] = *cfg_.seed;
  std::string payload = body.dump();

  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

  auto started = std::chrono::steady_clock::now();
  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) {
      int delay = cfg_.backoff_base_ms << (attempt - 1);
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(cfg_.timeout_s, 0);
    client.set_read_timeout(cfg_.timeout_s, 0);
    auto res = client.Post(cfg_.path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "transient status " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw ProviderFailure("http provider returned status " + std::to_string(res->status) +
                            ": " + res->body.substr(0, 200));
    }
    json doc = json::parse(res->body, nullptr, false);
    if (doc.is_discarded())
      throw ProviderFailure("http provider returned non-JSON body");
    try {
      std::string text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
      auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - started)
                    .count();
      return {text, name(), static_cast<long>(ms)};
    } catch (const json::exception& e) {
      throw ProviderFailure(std::string("unexpected completion shape: ") + e.what());
    }
  }
  throw ProviderFailure("http provider exhausted retries: " + last_error);
}

ChatResponse RoutingProvider::complete(const ChatRequest& req) {
  auto it = routes_.find(req.tag);
  Provider* p = it != routes_.end() ? it->second.get() : fallback_.get();
  if (!p) throw ProviderFailure(std::string("no provider routed for tag ") + tag_name(req.tag));
  return p->complete(req);
}

}  // namespace drl
