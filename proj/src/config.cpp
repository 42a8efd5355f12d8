#include "drl/config.hpp"

#include "drl/errors.hpp"
#include "drl/text.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace drl {

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, std::string> entries;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << "config line " << line_no << ": expected key=value, got '" << t << "'";
      throw ConfigError(msg.str());
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      std::ostringstream msg;
      msg << "config line " << line_no << ": empty key";
      throw ConfigError(msg.str());
    }
    entries[key] = value;
  }
  return entries;
}

namespace {

double parse_real(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: '" + value + "'");
  }
}

long parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  std::string v = to_lower_ascii(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': not a boolean: '" + value + "'");
}

bool valid_tag(const std::string& t) {
  return t == "extract" || t == "judge" || t == "insight" || t == "agent";
}

}  // namespace

std::vector<size_t> parse_k_list(const std::string& csv) {
  std::vector<size_t> ks;
  std::string token;
  std::istringstream in(csv);
  while (std::getline(in, token, ',')) {
    std::string t = trim(token);
    if (t.empty()) continue;
    long v = parse_int("k list", t);
    if (v < 0) throw ConfigError("k values must be non-negative, got " + t);
    ks.push_back(static_cast<size_t>(v));
  }
  if (ks.empty()) throw ConfigError("empty k list");
  return ks;
}

void apply_config_entry(CliConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "provider") {
    if (value != "mock" && value != "http")
      throw ConfigError("provider must be 'mock' or 'http', got '" + value + "'");
    cfg.provider.kind = value;
  } else if (key == "mock_script") {
    cfg.provider.mock_script = value;
  } else if (key == "provider_url") {
    cfg.provider.http.base_url = value;
  } else if (key == "provider_key") {
    cfg.provider.http.api_key = value;
  } else if (key == "provider_model") {
    cfg.provider.http.model = value;
  } else if (key == "provider_path") {
    cfg.provider.http.path = value;
  } else if (key == "provider_max_retries") {
    cfg.provider.http.max_retries = static_cast<int>(parse_int(key, value));
  } else if (key == "provider_max_inflight") {
    cfg.provider.http.max_inflight = static_cast<int>(parse_int(key, value));
  } else if (key.rfind("provider.", 0) == 0) {
    std::string tag = key.substr(9);
    if (!valid_tag(tag)) throw ConfigError("unknown provider tag: '" + tag + "'");
    if (value != "mock" && value != "http")
      throw ConfigError("provider must be 'mock' or 'http', got '" + value + "'");
    cfg.provider.tag_kind[tag] = value;
  } else if (key.rfind("model.", 0) == 0) {
    std::string tag = key.substr(6);
    if (!valid_tag(tag)) throw ConfigError("unknown model tag: '" + tag + "'");
    cfg.provider.tag_model[tag] = value;
  } else if (key == "weights.fact") {
    cfg.weights.fact = parse_real(key, value);
  } else if (key == "weights.hypothesis") {
    cfg.weights.hypothesis = parse_real(key, value);
  } else if (key == "weights.action") {
    cfg.weights.action = parse_real(key, value);
  } else if (key == "weights.tau") {
    double tau = parse_real(key, value);
    if (tau < 0.0 || tau > 1.0) throw ConfigError("weights.tau must be in [0,1]");
    cfg.weights.tau = tau;
  } else if (key == "bm25.k1") {
    cfg.bm25.k1 = parse_real(key, value);
  } else if (key == "bm25.b") {
    double b = parse_real(key, value);
    if (b < 0.0 || b > 1.0) throw ConfigError("bm25.b must be in [0,1]");
    cfg.bm25.b = b;
  } else if (key == "prompt.k") {
    long k = parse_int(key, value);
    if (k < 0) throw ConfigError("prompt.k must be non-negative");
    cfg.prompt.k = static_cast<size_t>(k);
  } else if (key == "prompt.mode") {
    cfg.prompt.mode = prompt_mode_from(value);
  } else if (key == "prompt.char_budget") {
    long budget = parse_int(key, value);
    if (budget <= 0) throw ConfigError("prompt.char_budget must be positive");
    cfg.prompt.char_budget = static_cast<size_t>(budget);
  } else if (key == "prompt.guideline_header") {
    cfg.prompt.guideline_header = value;
  } else if (key == "prompt.render_full") {
    cfg.prompt.render_full = parse_bool(key, value);
  } else if (key == "prompt.include_options_in_query") {
    cfg.prompt.include_options_in_query = parse_bool(key, value);
  } else if (key == "index.include_consequence_fields") {
    cfg.index_consequence_fields = parse_bool(key, value);
  } else if (key == "runs") {
    long runs = parse_int(key, value);
    if (runs <= 0) throw ConfigError("runs must be positive");
    cfg.runs = static_cast<int>(runs);
  } else if (key == "jobs") {
    long jobs = parse_int(key, value);
    if (jobs <= 0) throw ConfigError("jobs must be positive");
    cfg.jobs = static_cast<int>(jobs);
  } else if (key == "seed") {
    cfg.seed = parse_int(key, value);
  } else if (key == "grid.ks") {
    cfg.grid_ks = parse_k_list(value);
  } else if (key == "out") {
    cfg.out_dir = value;
  } else {
    throw ConfigError("unknown config key: '" + key + "'");
  }
}

CliConfig load_config(const std::optional<std::string>& config_path) {
  CliConfig cfg;
  if (config_path) {
    for (const auto& [key, value] : parse_config_file(*config_path))
      apply_config_entry(cfg, key, value);
  }
  struct EnvMap {
    const char* env;
    const char* key;
  };
  static const EnvMap env_keys[] = {{"DRL_PROVIDER", "provider"},
                                    {"DRL_PROVIDER_URL", "provider_url"},
                                    {"DRL_PROVIDER_KEY", "provider_key"},
                                    {"DRL_PROVIDER_MODEL", "provider_model"},
                                    {"DRL_MOCK_SCRIPT", "mock_script"}};
  for (const auto& [env, key] : env_keys) {
    const char* v = std::getenv(env);
    if (v && *v) apply_config_entry(cfg, key, v);
  }
  return cfg;
}

std::shared_ptr<Provider> make_provider(const CliConfig& cfg) {
  auto build = [&](const std::string& kind, const std::string& model) -> std::shared_ptr<Provider> {
    if (kind == "mock") {
      if (cfg.provider.mock_script.empty())
        throw ConfigError("mock provider requires mock_script (or DRL_MOCK_SCRIPT)");
      return std::make_shared<MockProvider>(load_mock_script(cfg.provider.mock_script));
    }
    if (cfg.provider.http.base_url.empty())
      throw ConfigError("http provider requires provider_url");
    HttpProviderConfig http = cfg.provider.http;
    if (!model.empty()) http.model = model;
    http.seed = cfg.seed ? cfg.seed : http.seed;
    return std::make_shared<HttpProvider>(http);
  };

  std::shared_ptr<Provider> fallback = build(cfg.provider.kind, "");
  if (cfg.provider.tag_kind.empty() && cfg.provider.tag_model.empty()) return fallback;

  auto tag_of = [](const std::string& name) {
    if (name == "extract") return Tag::extract;
    if (name == "judge") return Tag::judge;
    if (name == "insight") return Tag::insight;
    return Tag::agent;
  };
  std::map<Tag, std::shared_ptr<Provider>> routes;
  for (const auto& [tag, kind] : cfg.provider.tag_kind) {
    auto model_it = cfg.provider.tag_model.find(tag);
    routes[tag_of(tag)] = build(kind, model_it == cfg.provider.tag_model.end() ? "" : model_it->second);
  }
  for (const auto& [tag, model] : cfg.provider.tag_model) {
    if (routes.count(tag_of(tag))) continue;
    routes[tag_of(tag)] = build(cfg.provider.kind, model);
  }
  return std::make_shared<RoutingProvider>(std::move(routes), std::move(fallback));
}

}  // namespace drl
