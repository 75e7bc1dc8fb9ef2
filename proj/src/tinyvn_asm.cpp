#include "emu/tinyvn.hpp"

#include "asm_lexer.hpp"
#include "emu/settings.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

namespace emu::tinyvn {

namespace {

constexpr std::array<OpcodeInfo, 10> kOpcodes{{
    {Opcode::Halt, "HALT", 1},
    {Opcode::Load, "LOAD", 2},
    {Opcode::Store, "STORE", 2},
    {Opcode::Add, "ADD", 2},
    {Opcode::Sub, "SUB", 2},
    {Opcode::Jmp, "JMP", 2},
    {Opcode::Jz, "JZ", 2},
    {Opcode::In, "IN", 2},
    {Opcode::Out, "OUT", 2},
    {Opcode::Ldi, "LDI", 2},
}};

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

Diagnostic error_at(const Token& t, std::string message) {
    return Diagnostic{Severity::Error, t.line, t.column, std::move(message)};
}

}  // namespace

const OpcodeInfo* find_mnemonic(std::string_view mnemonic) {
    const std::string key = upper(mnemonic);
    for (const auto& info : kOpcodes) {
        if (info.mnemonic == key) return &info;
    }
    return nullptr;
}

const OpcodeInfo* decode(std::uint8_t byte) {
    return byte < kOpcodes.size() ? &kOpcodes[byte] : nullptr;
}

bool is_directive(std::string_view word) {
    const std::string key = upper(word);
    return key == "ORG" || key == "DB";
}

std::vector<Token> lex(std::string_view source) {
    return detail::lex_assembly(source, ":,", [](std::string_view word) {
        if (find_mnemonic(word) != nullptr) return TokenCategory::Keyword;
        if (is_directive(word)) return TokenCategory::Directive;
        return TokenCategory::Label;
    });
}

// -----------------------------------------------------------------------------
// Parser
// -----------------------------------------------------------------------------

ParseResult parse(const std::vector<Token>& tokens) {
    ParseResult result;
    std::set<std::string> labels;

    for (const auto& toks : detail::significant_lines(tokens)) {
        AsmLine line;
        line.line = toks.front()->line;
        line.column = toks.front()->column;
        std::size_t i = 0;
        std::optional<Diagnostic> error;

        auto at = [&](std::size_t k) -> const Token* { return k < toks.size() ? toks[k] : nullptr; };
        auto is = [&](std::size_t k, TokenCategory cat) { return at(k) != nullptr && at(k)->category == cat; };

        // Lexical errors take precedence; report the first one on the line.
        for (const Token* t : toks) {
            if (t->category == TokenCategory::Error) {
                error = error_at(*t, "unexpected '" + t->lexeme + "'");
                break;
            }
        }

        if (!error && is(0, TokenCategory::Label) && is(1, TokenCategory::Separator) && at(1)->lexeme == ":") {
            line.label = at(0)->lexeme;
            if (!labels.insert(*line.label).second) {
                error = error_at(*at(0), "duplicate label " + *line.label);
            }
            i = 2;
        }

        if (!error && at(i) != nullptr && at(i)->category != TokenCategory::Comment) {
            const Token& head = *at(i);
            if (head.category == TokenCategory::Keyword || head.category == TokenCategory::Directive) {
                line.mnemonic = upper(head.lexeme);
                line.column = head.column;
                ++i;
                const bool wants_operand = line.mnemonic != "HALT";
                if (at(i) != nullptr && at(i)->category != TokenCategory::Comment) {
                    const Token& arg = *at(i);
                    if (!wants_operand) {
                        error = error_at(arg, "HALT takes no operand");
                    } else if (arg.category == TokenCategory::Number) {
                        const auto value = parse_unsigned(arg.lexeme).value_or(~std::uint64_t{0});
                        if (value > 255) {
                            error = error_at(arg, "operand " + arg.lexeme + " out of range 0..255");
                        } else {
                            line.operand = value;
                        }
                    } else if (arg.category == TokenCategory::Label && line.mnemonic != "ORG") {
                        line.operand = LabelRef{arg.lexeme};
                    } else if (line.mnemonic == "ORG") {
                        error = error_at(arg, "ORG expects a number");
                    } else {
                        error = error_at(arg, "malformed operand '" + arg.lexeme + "'");
                    }
                    line.operand_column = arg.column;
                    ++i;
                } else if (wants_operand) {
                    error = error_at(head, line.mnemonic + " expects one operand");
                }
            } else if (head.category == TokenCategory::Label) {
                error = error_at(head, "unknown mnemonic " + head.lexeme);
            } else {
                error = error_at(head, "expected a mnemonic, found '" + head.lexeme + "'");
            }
        }

        if (!error && at(i) != nullptr && at(i)->category != TokenCategory::Comment) {
            error = error_at(*at(i), "unexpected '" + at(i)->lexeme + "' after instruction");
        }

        if (error) {
            result.diagnostics.push_back(std::move(*error));
            continue;
        }
        if (line.label || !line.mnemonic.empty()) result.program.lines.push_back(std::move(line));
    }
    return result;
}

// -----------------------------------------------------------------------------
// Two-pass assembler
// -----------------------------------------------------------------------------

CompileOutput assemble(AsmProgram& program) {
    CompileOutput out;
    auto error = [&](int line, int column, std::string message) {
        out.diagnostics.push_back(Diagnostic{Severity::Error, line, column, std::move(message)});
    };

    auto length_of = [](const AsmLine& l) -> std::uint64_t {
        if (l.mnemonic.empty() || l.mnemonic == "ORG") return 0;
        if (l.mnemonic == "DB") return 1;
        return find_mnemonic(l.mnemonic)->length;
    };

    // Pass 1: addresses and symbols.
    program.symbols.clear();
    std::vector<std::uint64_t> addresses;
    addresses.reserve(program.lines.size());
    std::array<bool, kMemorySize> emitted{};
    bool any_emitted = false;
    bool seen_org = false;
    bool overflow_reported = false;
    std::uint64_t lc = 0;

    for (const AsmLine& l : program.lines) {
        if (l.label) program.symbols[*l.label] = lc;
        if (l.mnemonic == "ORG") {
            const auto target = std::get<std::uint64_t>(*l.operand);
            if (target < lc) {
                for (std::uint64_t a = target; a < std::min(lc, kMemorySize); ++a) {
                    if (emitted[a]) {
                        error(l.line, l.column, "ORG " + std::to_string(target) + " moves backwards over emitted code");
                        break;
                    }
                }
            }
            if (!seen_org && !any_emitted) out.start_address = target;
            seen_org = true;
            lc = target;
        }
        addresses.push_back(lc);
        const std::uint64_t len = length_of(l);
        if (len > 0) {
            if (lc + len > kMemorySize) {
                if (!overflow_reported) error(l.line, l.column, "image exceeds 256 bytes");
                overflow_reported = true;
            } else {
                for (std::uint64_t k = 0; k < len; ++k) emitted[lc + k] = true;
            }
            any_emitted = true;
        }
        lc += len;
    }

    // Pass 2: emission.
    for (std::size_t n = 0; n < program.lines.size(); ++n) {
        const AsmLine& l = program.lines[n];
        const std::uint64_t len = length_of(l);
        if (len == 0 || addresses[n] + len > kMemorySize) continue;

        std::uint64_t operand = 0;
        if (l.operand) {
            if (const auto* ref = std::get_if<LabelRef>(&*l.operand)) {
                auto it = program.symbols.find(ref->name);
                if (it == program.symbols.end()) {
                    error(l.line, l.operand_column, "unresolved label " + ref->name);
                    continue;
                }
                operand = it->second & 0xFF;
            } else {
                operand = std::get<std::uint64_t>(*l.operand);
            }
        }

        const std::uint64_t at = addresses[n];
        if (l.mnemonic == "DB") {
            out.image.push_back({at, operand});
        } else {
            const OpcodeInfo* info = find_mnemonic(l.mnemonic);
            out.image.push_back({at, static_cast<Cell>(info->opcode)});
            if (info->length == 2) out.image.push_back({at + 1, operand});
        }
    }

    out.success = out.diagnostics.empty();
    if (!out.success) out.image.clear();
    std::sort(out.image.begin(), out.image.end(),
              [](const ImageCell& a, const ImageCell& b) { return a.address < b.address; });
    return out;
}

CompileOutput compile_source(std::string_view source) {
    ParseResult parsed = parse(lex(source));
    if (!parsed.ok()) {
        CompileOutput out;
        out.diagnostics = std::move(parsed.diagnostics);
        return out;
    }
    return assemble(parsed.program);
}

Assembler::Assembler() : CompilerPlugin({"tinyvn-asm", PluginKind::Compiler, "TinyVN assembler", "1.0.0"}) {}

}  // namespace emu::tinyvn
