#pragma once

#include "drl/bm25.hpp"
#include "drl/discrepancy.hpp"
#include "drl/inference.hpp"
#include "drl/provider.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace drl {

struct ProviderSettings {
  std::string kind = "mock";  // "mock" | "http"
  std::string mock_script;    // path; required for a mock backend
  HttpProviderConfig http;
  std::map<std::string, std::string> tag_kind;   // per-tag backend override
  std::map<std::string, std::string> tag_model;  // per-tag model override (http)
};

struct CliConfig {
  ProviderSettings provider;
  WeightConfig weights;
  Bm25Params bm25;
  PromptConfig prompt;
  bool index_consequence_fields = false;  // fold risk/contraindication text into doc_text
  int runs = 5;
  int jobs = 1;
  std::optional<long> seed;
  std::vector<size_t> grid_ks = {0, 1, 3, 5, 10};
  std::string out_dir = ".";
};

// key=value lines; '#' comments and blank lines ignored. Unknown keys are rejected.
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Layering: defaults, then file, then DRL_* environment variables. Flag overrides
// are applied by the caller after this returns.
CliConfig load_config(const std::optional<std::string>& config_path);

// Applies one key=value pair onto cfg; throws ConfigError on unknown keys/bad values.
void apply_config_entry(CliConfig& cfg, const std::string& key, const std::string& value);

std::vector<size_t> parse_k_list(const std::string& csv);

// Builds the configured backend; per-tag overrides produce a routing provider.
std::shared_ptr<Provider> make_provider(const CliConfig& cfg);

}  // namespace drl
