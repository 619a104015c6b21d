#pragma once

#include <string>
#include <string_view>

namespace floweval {

// Canonical form used by every fuzzy comparison in the toolkit:
//   1. tilde, backtick and typographic quotes are unified to ASCII '
//   2. whitespace is trimmed and internal runs collapse to one space
//   3. surrounding quote pairs are stripped (repeatedly, but only when the
//      quote character does not reappear inside, so "a' and 'b" stays intact)
//   4. ASCII case fold
// The function is idempotent: canonicalize_label(canonicalize_label(x)) ==
// canonicalize_label(x). Distances later operate on UTF-8 code units.
std::string canonicalize_label(std::string_view raw);

// Display form kept for reports and entailment hypotheses: trimmed, one
// matching surrounding quote pair removed, original case preserved.
std::string display_label(std::string_view raw);

}  // namespace floweval
