#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace civitas {

/// 1-based location of a token in source text.
struct SourceSpan {
    std::size_t line = 1;
    std::size_t column = 1;
    std::size_t length = 1;

    friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

class ParseError : public std::runtime_error {
public:
    ParseError(SourceSpan span, const std::string& message)
        : std::runtime_error(std::to_string(span.line) + ":" + std::to_string(span.column) +
                             ": " + message),
          span_(span),
          message_(message) {}

    const SourceSpan& span() const { return span_; }
    const std::string& message() const { return message_; }

private:
    SourceSpan span_;
    std::string message_;
};

}  // namespace civitas
