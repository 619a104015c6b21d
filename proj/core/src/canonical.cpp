#include "floweval/canonical.hpp"

#include <cctype>

namespace floweval {

namespace {

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

// U+2018/U+2019/U+201C/U+201D plus ` and ~ all become ASCII '.
std::string unify_quotes(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(raw[i]);
    if (c == '`' || c == '~') {
      out.push_back('\'');
      continue;
    }
    if (c == 0xE2 && i + 2 < raw.size() &&
        static_cast<unsigned char>(raw[i + 1]) == 0x80) {
      unsigned char third = static_cast<unsigned char>(raw[i + 2]);
      if (third == 0x98 || third == 0x99 || third == 0x9C || third == 0x9D) {
        out.push_back('\'');
        i += 2;
        continue;
      }
    }
    out.push_back(raw[i]);
  }
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

bool strippable_pair(std::string_view s) {
  if (s.size() < 2) return false;
  char q = s.front();
  if (q != '"' && q != '\'') return false;
  if (s.back() != q) return false;
  return s.substr(1, s.size() - 2).find(q) == std::string_view::npos;
}

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string canonicalize_label(std::string_view raw) {
  std::string s = collapse_whitespace(unify_quotes(raw));
  std::string_view v = s;
  while (strippable_pair(v)) {
    v.remove_prefix(1);
    v.remove_suffix(1);
    v = trim_view(v);
  }
  std::string out(v);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string display_label(std::string_view raw) {
  std::string_view v = trim_view(raw);
  // Strip only pairs the canonical form would strip too; quote unification
  // can surface interior quotes that block the canonical strip.
  if (strippable_pair(v) && strippable_pair(unify_quotes(v))) {
    v.remove_prefix(1);
    v.remove_suffix(1);
    v = trim_view(v);
  }
  return collapse_whitespace(v);
}

}  // namespace floweval
