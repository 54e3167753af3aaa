#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "civitas/diagnostics.hpp"

namespace civitas::detail {

// Shared lexer for the scenario, facts and rule grammars. Line oriented only
// in the sense that '#' comments run to end of line; tokens otherwise ignore
// newlines. Bare tokens may contain interior '-' (so "non-physical" and
// "residents-iot_service" lex as one token); "->" is always an arrow.

struct Token {
    enum class Type { ident, string, integer, punct, end };

    Type type = Type::end;
    std::string text;          // ident spelling, string contents, punct spelling
    long long int_value = 0;
    SourceSpan span;

    bool is_punct(std::string_view p) const { return type == Type::punct && text == p; }
    bool is_ident() const { return type == Type::ident; }
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { tokenize(); }

    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t i = pos_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }

    Token next() {
        const Token& t = peek();
        if (pos_ < tokens_.size() - 1) ++pos_;
        return t;
    }

    bool at_end() const { return peek().type == Token::Type::end; }

private:
    void tokenize() {
        std::size_t i = 0;
        std::size_t line = 1, col = 1;
        auto advance = [&](std::size_t n = 1) {
            for (std::size_t k = 0; k < n; ++k) {
                if (i < src_.size() && src_[i] == '\n') {
                    ++line;
                    col = 1;
                } else {
                    ++col;
                }
                ++i;
            }
        };
        auto is_ident_start = [](unsigned char c) {
            return std::isalpha(c) || c == '_' || c >= 0x80;
        };
        auto is_ident_char = [](unsigned char c) {
            return std::isalnum(c) || c == '_' || c >= 0x80;
        };

        while (i < src_.size()) {
            const unsigned char c = static_cast<unsigned char>(src_[i]);
            if (c == '#') {
                while (i < src_.size() && src_[i] != '\n') advance();
                continue;
            }
            if (std::isspace(c) || c == '\r') {
                advance();
                continue;
            }
            SourceSpan span{line, col, 1};
            if (c == '"') {
                std::string value;
                advance();
                bool closed = false;
                while (i < src_.size()) {
                    const char d = src_[i];
                    if (d == '"') {
                        advance();
                        closed = true;
                        break;
                    }
                    if (d == '\n') break;
                    if (d == '\\' && i + 1 < src_.size() &&
                        (src_[i + 1] == '"' || src_[i + 1] == '\\')) {
                        advance();
                    }
                    value.push_back(src_[i]);
                    advance();
                }
                if (!closed) throw ParseError(span, "unterminated string");
                span.length = value.size() + 2;
                tokens_.push_back({Token::Type::string, std::move(value), 0, span});
                continue;
            }
            if (std::isdigit(c)) {
                std::size_t start = i;
                while (i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i])))
                    advance();
                std::string text(src_.substr(start, i - start));
                span.length = text.size();
                long long value = 0;
                try {
                    value = std::stoll(text);
                } catch (const std::exception&) {
                    throw ParseError(span, "number out of range");
                }
                tokens_.push_back({Token::Type::integer, std::move(text), value, span});
                continue;
            }
            if (is_ident_start(c)) {
                std::size_t start = i;
                while (i < src_.size()) {
                    const unsigned char d = static_cast<unsigned char>(src_[i]);
                    if (is_ident_char(d)) {
                        advance();
                    } else if (d == '-' && i + 1 < src_.size() &&
                               is_ident_char(static_cast<unsigned char>(src_[i + 1]))) {
                        advance();
                    } else {
                        break;
                    }
                }
                std::string text(src_.substr(start, i - start));
                span.length = text.size();
                tokens_.push_back({Token::Type::ident, std::move(text), 0, span});
                continue;
            }
            // punctuation, longest match first
            static constexpr std::string_view kTwo[] = {"->", ">=", "<=", "!="};
            std::string_view rest = src_.substr(i);
            std::string punct;
            for (std::string_view two : kTwo) {
                if (rest.substr(0, 2) == two) {
                    punct = two;
                    break;
                }
            }
            if (punct.empty()) {
                static constexpr std::string_view kOne = "{}[]():,.=*<>-";
                if (kOne.find(src_[i]) == std::string_view::npos) {
                    throw ParseError(span, std::string("unexpected character '") + src_[i] + "'");
                }
                punct = src_.substr(i, 1);
            }
            span.length = punct.size();
            advance(punct.size());
            tokens_.push_back({Token::Type::punct, std::move(punct), 0, span});
        }
        tokens_.push_back({Token::Type::end, "", 0, SourceSpan{line, col, 1}});
    }

    std::string_view src_;
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

inline std::string token_desc(const Token& t) {
    switch (t.type) {
        case Token::Type::ident: return "'" + t.text + "'";
        case Token::Type::string: return "string \"" + t.text + "\"";
        case Token::Type::integer: return "number " + t.text;
        case Token::Type::punct: return "'" + t.text + "'";
        case Token::Type::end: return "end of input";
    }
    return "?";
}

}  // namespace civitas::detail
