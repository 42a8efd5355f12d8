#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace drl {

// Locale-independent ASCII lowercasing; bytes >= 0x80 pass through untouched.
std::string to_lower_ascii(std::string_view s);

std::string trim(std::string_view s);

// Lowercase, split on every non-alphanumeric byte, drop empties.
// Non-ASCII bytes count as separators, so tokenization never depends on locale.
std::vector<std::string> tokenize(std::string_view text);

std::set<std::string> token_set(std::string_view text);

// |A n B| / |A u B|; both empty -> 1.0, one empty -> 0.0.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

// Token-set Jaccard of two texts after tokenize().
double token_set_similarity(std::string_view a, std::string_view b);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// "\r\n" and lone "\r" become "\n"; trailing newlines stripped.
std::string normalize_newlines(std::string_view s);

std::string replace_all(std::string s, std::string_view from, std::string_view to);

}  // namespace drl
