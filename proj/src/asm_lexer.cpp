#include "asm_lexer.hpp"

#include "emu/settings.hpp"

namespace emu::detail {

namespace {

bool is_word_start(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool is_word_char(char c) {
    return is_word_start(c) || (c >= '0' && c <= '9');
}

bool is_digit(char c) {
    return c >= '0' && c <= '9';
}

bool is_blank(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

// Length of the UTF-8 sequence at `pos`, 1 for malformed input.
std::size_t code_point_length(std::string_view s, std::size_t pos) {
    const auto lead = static_cast<unsigned char>(s[pos]);
    std::size_t n = 1;
    if ((lead & 0xE0) == 0xC0) n = 2;
    else if ((lead & 0xF0) == 0xE0) n = 3;
    else if ((lead & 0xF8) == 0xF0) n = 4;
    if (pos + n > s.size()) return 1;
    for (std::size_t i = 1; i < n; ++i) {
        if ((static_cast<unsigned char>(s[pos + i]) & 0xC0) != 0x80) return 1;
    }
    return n;
}

}  // namespace

std::vector<Token> lex_assembly(std::string_view source, std::string_view separators,
                                const std::function<TokenCategory(std::string_view)>& classify_word) {
    std::vector<Token> tokens;
    std::size_t pos = 0;
    int line = 1;
    int column = 1;

    auto emit = [&](TokenCategory category, std::size_t length) {
        tokens.push_back(Token{category, std::string(source.substr(pos, length)), line, column, pos});
        pos += length;
        column += static_cast<int>(length);
    };

    while (pos < source.size()) {
        const char c = source[pos];
        if (c == '\n') {
            emit(TokenCategory::Whitespace, 1);
            ++line;
            column = 1;
        } else if (c == '\r' && pos + 1 < source.size() && source[pos + 1] == '\n') {
            emit(TokenCategory::Whitespace, 2);
            ++line;
            column = 1;
        } else if (is_blank(c)) {
            std::size_t end = pos;
            while (end < source.size() && is_blank(source[end]) &&
                   !(source[end] == '\r' && end + 1 < source.size() && source[end + 1] == '\n')) {
                ++end;
            }
            emit(TokenCategory::Whitespace, end - pos);
        } else if (c == ';') {
            std::size_t end = source.find('\n', pos);
            if (end == std::string_view::npos) end = source.size();
            if (end > pos + 1 && source[end - 1] == '\r' && end < source.size()) --end;
            emit(TokenCategory::Comment, end - pos);
        } else if (is_word_start(c)) {
            std::size_t end = pos;
            while (end < source.size() && is_word_char(source[end])) ++end;
            const std::string_view word = source.substr(pos, end - pos);
            const bool label_def = end < source.size() && source[end] == ':';
            emit(label_def ? TokenCategory::Label : classify_word(word), end - pos);
        } else if (is_digit(c)) {
            std::size_t end = pos;
            while (end < source.size() && is_word_char(source[end])) ++end;
            const bool number = parse_unsigned(source.substr(pos, end - pos)).has_value();
            emit(number ? TokenCategory::Number : TokenCategory::Error, end - pos);
        } else if (separators.find(c) != std::string_view::npos) {
            emit(TokenCategory::Separator, 1);
        } else {
            emit(TokenCategory::Error, code_point_length(source, pos));
        }
    }
    return tokens;
}

std::vector<std::vector<const Token*>> significant_lines(const std::vector<Token>& tokens) {
    std::vector<std::vector<const Token*>> lines;
    int current = 0;
    for (const Token& t : tokens) {
        if (t.category == TokenCategory::Whitespace) continue;
        if (lines.empty() || t.line != current) {
            lines.emplace_back();
            current = t.line;
        }
        lines.back().push_back(&t);
    }
    return lines;
}

}  // namespace emu::detail
