#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace civitas {

// Tokens are trimmed, case-preserving text. Equality, ordering and hashing
// fold ASCII case; non-ASCII bytes compare exactly.

std::string trim_copy(std::string_view text);
std::string fold_case(std::string_view text);
bool token_eq(std::string_view a, std::string_view b);
bool token_less(std::string_view a, std::string_view b);

// Orders "P2" before "P10": maximal digit runs compare numerically.
int natural_compare(std::string_view a, std::string_view b);

std::size_t edit_distance(std::string_view a, std::string_view b);

/// Closest candidate by edit distance, or nullopt when nothing is near
/// enough to be a plausible typo. Used for diagnostics only.
std::optional<std::string> closest_match(std::string_view needle,
                                         const std::vector<std::string>& candidates);

// A bare token starts with a letter or '_' and continues with letters,
// digits, '_' or interior '-'. Anything else must be quoted.
bool is_bare_token(std::string_view text);
std::string quote_string(std::string_view text);
std::string render_token(std::string_view text);  // quotes unless bare

}  // namespace civitas
