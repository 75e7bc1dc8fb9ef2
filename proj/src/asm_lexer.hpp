#pragma once

#include "emu/contracts.hpp"

#include <functional>
#include <string_view>
#include <vector>

namespace emu::detail {

/// Line-oriented assembly lexer shared by the reference compilers.
///
/// Words `[A-Za-z_][A-Za-z0-9_]*` are classified by `classify_word`, except
/// that a word directly followed by ':' is always a Label. Digit-led words are
/// Numbers when they parse as decimal or 0x-hex, Error otherwise. ';' starts a
/// Comment running to end of line. Characters in `separators` are Separators.
/// Anything else becomes a one-code-point Error token.
std::vector<Token> lex_assembly(std::string_view source, std::string_view separators,
                                const std::function<TokenCategory(std::string_view)>& classify_word);

/// Tokens grouped per source line with Whitespace dropped.
std::vector<std::vector<const Token*>> significant_lines(const std::vector<Token>& tokens);

}  // namespace emu::detail
