#include "civitas/text.hpp"

#include <algorithm>
#include <cctype>

namespace civitas {

namespace {

bool is_space_byte(unsigned char c) { return std::isspace(c) != 0; }

char lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace

std::string trim_copy(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    auto nbsp_at = [&](std::size_t i) {
        // U+00A0 in UTF-8
        return i + 1 < text.size() && static_cast<unsigned char>(text[i]) == 0xC2 &&
               static_cast<unsigned char>(text[i + 1]) == 0xA0;
    };
    while (begin < end) {
        if (is_space_byte(static_cast<unsigned char>(text[begin]))) {
            ++begin;
        } else if (nbsp_at(begin)) {
            begin += 2;
        } else {
            break;
        }
    }
    while (end > begin) {
        if (is_space_byte(static_cast<unsigned char>(text[end - 1]))) {
            --end;
        } else if (end >= 2 && nbsp_at(end - 2)) {
            end -= 2;
        } else {
            break;
        }
    }
    return std::string(text.substr(begin, end - begin));
}

std::string fold_case(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), lower);
    return out;
}

bool token_eq(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (lower(a[i]) != lower(b[i])) return false;
    }
    return true;
}

bool token_less(std::string_view a, std::string_view b) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        const char x = lower(a[i]);
        const char y = lower(b[i]);
        if (x != y) return x < y;
    }
    return a.size() < b.size();
}

int natural_compare(std::string_view a, std::string_view b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const bool da = std::isdigit(static_cast<unsigned char>(a[i])) != 0;
        const bool db = std::isdigit(static_cast<unsigned char>(b[j])) != 0;
        if (da && db) {
            std::size_t ia = i, jb = j;
            while (ia < a.size() && std::isdigit(static_cast<unsigned char>(a[ia]))) ++ia;
            while (jb < b.size() && std::isdigit(static_cast<unsigned char>(b[jb]))) ++jb;
            std::string_view na = a.substr(i, ia - i);
            std::string_view nb = b.substr(j, jb - j);
            na.remove_prefix(std::min(na.find_first_not_of('0'), na.size()));
            nb.remove_prefix(std::min(nb.find_first_not_of('0'), nb.size()));
            if (na.size() != nb.size()) return na.size() < nb.size() ? -1 : 1;
            if (int c = na.compare(nb); c != 0) return c < 0 ? -1 : 1;
            i = ia;
            j = jb;
        } else {
            const char x = lower(a[i]);
            const char y = lower(b[j]);
            if (x != y) return x < y ? -1 : 1;
            ++i;
            ++j;
        }
    }
    if (i < a.size()) return 1;
    if (j < b.size()) return -1;
    return 0;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            const bool same = lower(a[i - 1]) == lower(b[j - 1]);
            row[j] = std::min({up + 1, row[j - 1] + 1, diag + (same ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

std::optional<std::string> closest_match(std::string_view needle,
                                         const std::vector<std::string>& candidates) {
    std::optional<std::string> best;
    std::size_t best_dist = 0;
    for (const auto& c : candidates) {
        const std::size_t d = edit_distance(needle, c);
        if (!best || d < best_dist) {
            best = c;
            best_dist = d;
        }
    }
    // A suggestion further than a third of the word away is noise.
    if (best && best_dist * 3 <= std::max<std::size_t>(needle.size(), 3)) return best;
    if (best && best_dist <= 2) return best;
    return std::nullopt;
}

bool is_bare_token(std::string_view text) {
    if (text.empty()) return false;
    const unsigned char first = static_cast<unsigned char>(text.front());
    if (!(std::isalpha(first) || first == '_')) return false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isalnum(c) || c == '_') continue;
        if (c == '-' && i + 1 < text.size() && text[i + 1] != '>') continue;
        return false;
    }
    return text.back() != '-';
}

std::string quote_string(std::string_view text) {
    std::string out = "\"";
    for (char c : text) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string render_token(std::string_view text) {
    return is_bare_token(text) ? std::string(text) : quote_string(text);
}

}  // namespace civitas
