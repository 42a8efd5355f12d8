#include "drl/dataset.hpp"

#include "drl/errors.hpp"
#include "drl/text.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace drl {

std::string normalize_answer(const std::string& raw, Task task) {
  std::string t = trim(raw);
  if (task == Task::binary) {
    std::string lower = to_lower_ascii(t);
    if (lower == "yes" || lower == "1") return "1";
    if (lower == "no" || lower == "0") return "0";
    return lower;
  }
  std::string bare;
  for (char c : t)
    if (std::isalnum(static_cast<unsigned char>(c))) bare.push_back(c);
  if (bare.size() == 1 && std::isalpha(static_cast<unsigned char>(bare[0])))
    return std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(bare[0]))));
  return to_lower_ascii(t);
}

namespace {

std::string require_string(const nlohmann::json& o, const char* key, size_t line_no) {
  if (!o.contains(key) || !o[key].is_string()) {
    std::ostringstream msg;
    msg << "line " << line_no << ": missing or non-string field '" << key << "'";
    throw DatasetFormatFailure(msg.str());
  }
  return o[key].get<std::string>();
}

}  // namespace

std::vector<QaCase> load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetFormatFailure("cannot open dataset file: " + path);

  std::vector<QaCase> cases;
  std::set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json o = nlohmann::json::parse(line, nullptr, false);
    if (o.is_discarded() || !o.is_object()) {
      std::ostringstream msg;
      msg << "line " << line_no << ": not a JSON object";
      throw DatasetFormatFailure(msg.str());
    }
    QaCase c;
    c.qid = require_string(o, "qid", line_no);
    c.question = require_string(o, "question", line_no);
    c.answer = require_string(o, "answer", line_no);
    if (c.qid.empty() || c.answer.empty()) {
      std::ostringstream msg;
      msg << "line " << line_no << ": qid and answer must be non-empty";
      throw DatasetFormatFailure(msg.str());
    }
    if (!seen.insert(c.qid).second) {
      std::ostringstream msg;
      msg << "line " << line_no << ": duplicate qid '" << c.qid << "'";
      throw DatasetFormatFailure(msg.str());
    }
    if (o.contains("options") && !o["options"].is_null()) {
      if (!o["options"].is_array()) {
        std::ostringstream msg;
        msg << "line " << line_no << ": options must be an array";
        throw DatasetFormatFailure(msg.str());
      }
      for (const auto& opt : o["options"]) {
        if (opt.is_array() && opt.size() == 2 && opt[0].is_string() && opt[1].is_string()) {
          c.options.emplace_back(opt[0].get<std::string>(), opt[1].get<std::string>());
        } else if (opt.is_object() && opt.contains("label") && opt.contains("text")) {
          c.options.emplace_back(opt["label"].get<std::string>(), opt["text"].get<std::string>());
        } else {
          std::ostringstream msg;
          msg << "line " << line_no << ": option entries must be [label, text] or {label, text}";
          throw DatasetFormatFailure(msg.str());
        }
      }
    }
    if (o.contains("rationale") && o["rationale"].is_string()) {
      std::string r = o["rationale"].get<std::string>();
      if (!r.empty()) c.rationale = std::move(r);
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

std::string render_question(const QaCase& c) {
  if (c.options.empty()) return c.question;
  std::string out = c.question + "\nOptions:";
  for (const auto& [label, text] : c.options) out += "\n" + label + ") " + text;
  return out;
}

}  // namespace drl
