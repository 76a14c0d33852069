#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace xsteer {

// Answer-span normalization: casefold (ASCII, Latin-1, Greek, Cyrillic),
// treat punctuation as a separator, split on whitespace. No language-specific
// article stripping — the corpora span many languages and none is singled
// out.
std::vector<std::string> normalize_tokens(std::string_view text);

// Harmonic mean of multiset token precision/recall after normalization.
// Both sides empty -> 1.0; exactly one empty -> 0.0. Symmetric up to the
// precision/recall swap, so F1 itself is symmetric.
double token_f1(std::string_view pred, std::string_view gold);

}  // namespace xsteer
