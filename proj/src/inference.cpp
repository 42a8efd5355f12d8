#include "drl/inference.hpp"

#include "drl/errors.hpp"
#include "drl/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace drl {

PromptMode prompt_mode_from(const std::string& name) {
  if (name == "drl") return PromptMode::drl;
  if (name == "icl") return PromptMode::icl;
  if (name == "none") return PromptMode::none;
  throw ConfigError("unknown prompt mode: " + name);
}

const char* prompt_mode_name(PromptMode m) {
  switch (m) {
    case PromptMode::drl: return "drl";
    case PromptMode::icl: return "icl";
    case PromptMode::none: return "none";
  }
  return "?";
}

std::string build_prompt(const std::string& question, const std::vector<std::string>& items,
                         const PromptConfig& cfg) {
  std::string out = "Question: " + question;
  if (cfg.mode != PromptMode::none && !items.empty()) {
    out += "\n" + cfg.guideline_header;
    for (size_t i = 0; i < items.size(); ++i)
      out += "\n" + std::to_string(i + 1) + ". " + items[i];
  }
  if (out.size() > cfg.char_budget) {
    std::ostringstream msg;
    msg << "prompt length " << out.size() << " exceeds budget " << cfg.char_budget;
    throw PromptBudgetExceeded(msg.str());
  }
  return out;
}

std::string render_instruction(const Instruction& inst, bool full) {
  if (!full) {
    std::string out = inst.title;
    if (!inst.situation_context.empty()) out += "\n" + inst.situation_context;
    std::vector<std::string> steps;
    for (const auto& s : inst.prevention_steps)
      if (!s.empty()) steps.push_back(s);
    if (!steps.empty()) out += "\nPrevention: " + join(steps, "; ");
    return out;
  }
  std::vector<std::string> lines;
  auto text_line = [&](const char* name, const std::string& v) {
    if (!v.empty()) lines.push_back(std::string(name) + ": " + v);
  };
  auto list_line = [&](const char* name, const std::vector<std::string>& v) {
    if (!v.empty()) lines.push_back(std::string(name) + ": " + join(v, "; "));
  };
  text_line("Title", inst.title);
  text_line("Error type", inst.error_type);
  text_line("Clinical domain", inst.clinical_domain);
  text_line("Situation", inst.situation_context);
  text_line("Example", inst.example_situation);
  list_line("Similar case patterns", inst.similar_case_patterns);
  text_line("What went wrong", inst.what_went_wrong);
  text_line("Why it matters", inst.why_it_matters);
  list_line("Potential risks", inst.potential_risks);
  list_line("Prevention", inst.prevention_steps);
  list_line("Contraindications", inst.contraindications);
  list_line("Trigger keywords", inst.trigger_keywords);
  text_line("Principle", inst.medical_principle);
  text_line("Applies to", inst.similar_case_examples);
  return join(lines, "\n");
}

namespace {

// strips wrapping punctuation an answer token tends to pick up: quotes, brackets,
// sentence punctuation, markdown asterisks
std::string strip_decoration(std::string s) {
  auto is_junk = [](char c) {
    return c == '"' || c == '\'' || c == '*' || c == '`' || c == '(' || c == ')' ||
           c == '[' || c == ']' || c == '.' || c == ',' || c == '!' || c == '?' ||
           c == ';' || c == ':';
  };
  size_t b = 0, e = s.size();
  while (b < e && (is_junk(s[b]) || std::isspace(static_cast<unsigned char>(s[b])))) ++b;
  while (e > b && (is_junk(s[e - 1]) || std::isspace(static_cast<unsigned char>(s[e - 1])))) --e;
  return s.substr(b, e - b);
}

std::optional<std::string> last_answer_tag(const std::string& cot) {
  const std::string open = "<answer>", close = "</answer>";
  std::string hay = to_lower_ascii(cot);
  size_t best = std::string::npos;
  for (size_t pos = hay.find(open); pos != std::string::npos; pos = hay.find(open, pos + 1))
    best = pos;
  if (best == std::string::npos) return std::nullopt;
  size_t end = hay.find(close, best + open.size());
  if (end == std::string::npos) return std::nullopt;
  std::string inner = strip_decoration(cot.substr(best + open.size(), end - best - open.size()));
  if (inner.empty()) return std::nullopt;
  return inner;
}

std::optional<std::string> last_answer_phrase(const std::string& cot) {
  const std::string marker = "the answer is";
  std::string hay = to_lower_ascii(cot);
  size_t best = std::string::npos;
  for (size_t pos = hay.find(marker); pos != std::string::npos; pos = hay.find(marker, pos + 1))
    best = pos;
  if (best == std::string::npos) return std::nullopt;
  size_t i = best + marker.size();
  while (i < cot.size() &&
         (std::isspace(static_cast<unsigned char>(cot[i])) || cot[i] == ':' || cot[i] == '*'))
    ++i;
  size_t j = i;
  while (j < cot.size() && cot[j] != '.' && cot[j] != ',' && cot[j] != '!' && cot[j] != '?' &&
         cot[j] != ';' && cot[j] != '\n')
    ++j;
  std::string token = strip_decoration(cot.substr(i, j - i));
  if (token.empty()) return std::nullopt;
  return token;
}

std::optional<std::string> last_standalone(const std::string& cot, Task task) {
  std::vector<std::string> tokens = tokenize(cot);
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
    const std::string& t = *it;
    if (task == Task::binary) {
      if (t == "yes" || t == "no" || t == "0" || t == "1") return t;
    } else {
      if (t.size() == 1 && std::isalpha(static_cast<unsigned char>(t[0]))) return t;
    }
  }
  return std::nullopt;
}

}  // namespace

std::string parse_answer(const std::string& cot, Task task) {
  if (auto tag = last_answer_tag(cot)) return normalize_answer(*tag, task);
  if (auto phrase = last_answer_phrase(cot)) return normalize_answer(*phrase, task);
  if (auto token = last_standalone(cot, task)) return normalize_answer(*token, task);
  throw AnswerParseFailure("no answer marker found in completion");
}

ExemplarStore::ExemplarStore(Bm25Params params) : params_(params), index_(params) {}

void ExemplarStore::add(const QaCase& c) {
  cases_.push_back(c);
  index_.add_document(tokenize(c.question));
}

std::vector<RetrievalResult> ExemplarStore::retrieve(const std::string& query, size_t k) const {
  std::vector<RetrievalResult> out;
  if (k == 0 || cases_.empty()) return out;
  std::vector<std::string> terms = tokenize(query);
  auto scored = index_.match_scores(terms);  // (doc position, score), nonzero overlap only
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (size_t i = 0; i < scored.size() && i < k; ++i) {
    RetrievalResult r;
    r.instruction_id = cases_[scored[i].first].qid;
    r.created_seq = scored[i].first + 1;
    r.score = scored[i].second;
    r.rank = i + 1;
    out.push_back(std::move(r));
  }
  return out;
}

std::string ExemplarStore::render(std::uint64_t seq) const {
  if (seq == 0 || seq > cases_.size()) throw UnknownDocument("no exemplar with seq " + std::to_string(seq));
  const QaCase& c = cases_[seq - 1];
  return "Q: " + c.question + "\nA: " + c.answer;
}

ExemplarStore load_exemplars(const std::string& path, Bm25Params params) {
  ExemplarStore store(params);
  for (const QaCase& c : load_dataset(path)) store.add(c);
  return store;
}

std::string assemble_prompt(const KnowledgeBase& kb, const QaCase& c, const PromptConfig& cfg,
                            const ExemplarStore* exemplars,
                            std::vector<RetrievalResult>* retrieved_out) {
  std::string query = c.question;
  if (cfg.include_options_in_query)
    for (const auto& [label, text] : c.options) query += " " + text;

  std::vector<RetrievalResult> retrieved;
  std::vector<std::string> items;
  if (cfg.mode == PromptMode::drl) {
    retrieved = kb.retrieve_top_k(query, cfg.k);
    for (const auto& r : retrieved) {
      auto inst = kb.find_by_seq(r.created_seq);
      if (!inst) throw UnknownDocument("retrieval returned unknown seq");
      items.push_back(render_instruction(*inst, cfg.render_full));
    }
  } else if (cfg.mode == PromptMode::icl) {
    if (!exemplars) throw ConfigError("icl mode requires an exemplar store");
    retrieved = exemplars->retrieve(query, cfg.k);
    for (const auto& r : retrieved) items.push_back(exemplars->render(r.created_seq));
  }
  std::string prompt = build_prompt(render_question(c), items, cfg);
  if (retrieved_out) *retrieved_out = std::move(retrieved);
  return prompt;
}

Prediction infer(Provider& prov, const KnowledgeBase& kb, const QaCase& c,
                 const PromptConfig& cfg, const ExemplarStore* exemplars,
                 std::string* prompt_out) {
  std::vector<RetrievalResult> retrieved;
  std::string prompt = assemble_prompt(kb, c, cfg, exemplars, &retrieved);
  if (prompt_out) *prompt_out = prompt;

  ChatRequest req;
  req.user = prompt;
  req.tag = Tag::agent;
  ChatResponse resp = prov.complete(req);

  Prediction pred;
  pred.qid = c.qid;
  pred.cot = resp.text;
  pred.retrieved = std::move(retrieved);
  pred.prompt_chars = prompt.size();
  pred.k_used = pred.retrieved.size();
  pred.answer = parse_answer(resp.text, c.task());
  return pred;
}

void write_predictions(const std::vector<Prediction>& preds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StoreWriteFailure("cannot open prediction file for writing: " + path.string());
  for (const auto& p : preds) {
    nlohmann::json ids = nlohmann::json::array();
    for (const auto& r : p.retrieved) ids.push_back(r.instruction_id);
    nlohmann::json rec = {{"qid", p.qid},
                          {"answer", p.answer},
                          {"k_used", p.k_used},
                          {"retrieved", ids},
                          {"prompt_chars", p.prompt_chars}};
    out << rec.dump() << "\n";
  }
  if (!out.good()) throw StoreWriteFailure("write failed: " + path.string());
}

}  // namespace drl
