#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace drl {

enum class Task { binary, multiple_choice };

struct QaCase {
  std::string qid;
  std::string question;
  std::vector<std::pair<std::string, std::string>> options;  // (label, text)
  std::string answer;
  std::optional<std::string> rationale;

  Task task() const { return options.empty() ? Task::binary : Task::multiple_choice; }
};

// binary: trim+lowercase, yes/1 -> "1", no/0 -> "0"; multiple choice: a bare option
// letter (punctuation tolerated) -> uppercase letter; anything else passes through
// trimmed and lowercased so exact-match scoring stays well-defined.
std::string normalize_answer(const std::string& raw, Task task);

// Newline-delimited records: qid, question, answer required; options as [label, text]
// pairs or {label, text} objects; rationale optional. Duplicate qids, missing fields
// and unreadable files throw DatasetFormatFailure.
std::vector<QaCase> load_dataset(const std::string& path);

// Question text plus an "Options:" block when options are present.
std::string render_question(const QaCase& c);

}  // namespace drl
