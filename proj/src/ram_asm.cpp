#include "emu/ram.hpp"

#include "asm_lexer.hpp"
#include "emu/settings.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

namespace emu::ram {

namespace {

constexpr std::array<std::string_view, 9> kMnemonics{"READ", "WRITE", "LOAD", "STORE", "ADD",
                                                     "SUB",  "JMP",   "JZ",   "HALT"};

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

struct PendingLine {
    Instruction instruction;
    std::string label_ref;  // for Mode::Label
    int line = 0;
    int operand_column = 0;
};

}  // namespace

std::string_view to_string(Op op) {
    return kMnemonics[static_cast<std::size_t>(op) - 1];
}

std::optional<Op> parse_op(std::string_view mnemonic) {
    const std::string key = upper(mnemonic);
    for (std::size_t i = 0; i < kMnemonics.size(); ++i) {
        if (kMnemonics[i] == key) return static_cast<Op>(i + 1);
    }
    return std::nullopt;
}

bool mode_allowed(Op op, Mode mode) {
    switch (op) {
        case Op::Read:
        case Op::Store: return mode == Mode::Direct || mode == Mode::Indirect;
        case Op::Write:
        case Op::Load:
        case Op::Add:
        case Op::Sub: return mode == Mode::Constant || mode == Mode::Direct || mode == Mode::Indirect;
        case Op::Jmp:
        case Op::Jz: return mode == Mode::Label;
        case Op::Halt: return mode == Mode::None;
    }
    return false;
}

Cell encode(const Instruction& instruction) {
    return static_cast<Cell>(instruction.op) | (static_cast<Cell>(instruction.mode) << 8) |
           (instruction.operand << 16);
}

std::optional<Instruction> decode(Cell cell) {
    const auto op = static_cast<std::uint8_t>(cell & 0xFF);
    const auto mode = static_cast<std::uint8_t>((cell >> 8) & 0xFF);
    if (op < 1 || op > static_cast<std::uint8_t>(Op::Halt)) return std::nullopt;
    if (mode > static_cast<std::uint8_t>(Mode::Label)) return std::nullopt;
    Instruction ins{static_cast<Op>(op), static_cast<Mode>(mode), cell >> 16};
    if (!mode_allowed(ins.op, ins.mode)) return std::nullopt;
    return ins;
}

std::string render(const Instruction& instruction) {
    std::string out(to_string(instruction.op));
    const std::string n = std::to_string(instruction.operand);
    switch (instruction.mode) {
        case Mode::None: break;
        case Mode::Constant: out += " =" + n; break;
        case Mode::Direct: out += " " + n; break;
        case Mode::Indirect: out += " *" + n; break;
        case Mode::Label: out += " L" + n; break;
    }
    return out;
}

std::vector<Token> lex(std::string_view source) {
    return detail::lex_assembly(source, ":=*", [](std::string_view word) {
        return parse_op(word) ? TokenCategory::Keyword : TokenCategory::Label;
    });
}

CompileOutput compile_source(std::string_view source) {
    CompileOutput out;
    auto error = [&](const Token& t, std::string message) {
        out.diagnostics.push_back(Diagnostic{Severity::Error, t.line, t.column, std::move(message)});
    };

    const std::vector<Token> tokens = lex(source);
    std::vector<PendingLine> program;
    std::map<std::string, std::uint64_t> symbols;

    for (const auto& toks : detail::significant_lines(tokens)) {
        std::size_t i = 0;
        auto at = [&](std::size_t k) -> const Token* {
            return k < toks.size() && toks[k]->category != TokenCategory::Comment ? toks[k] : nullptr;
        };

        auto bad = std::find_if(toks.begin(), toks.end(),
                                [](const Token* t) { return t->category == TokenCategory::Error; });
        if (bad != toks.end()) {
            error(**bad, "unexpected '" + (*bad)->lexeme + "'");
            continue;
        }

        if (at(0) && at(0)->category == TokenCategory::Label && at(1) && at(1)->lexeme == ":") {
            if (!symbols.emplace(at(0)->lexeme, program.size()).second) {
                error(*at(0), "duplicate label " + at(0)->lexeme);
                continue;
            }
            i = 2;
        }
        const Token* head = at(i);
        if (head == nullptr) continue;
        if (head->category != TokenCategory::Keyword) {
            error(*head, head->category == TokenCategory::Label ? "unknown operation " + head->lexeme
                                                                : "expected an operation, found '" + head->lexeme + "'");
            continue;
        }

        PendingLine pending;
        pending.line = head->line;
        pending.instruction.op = *parse_op(head->lexeme);
        ++i;

        // Operand: "=n", "*n", "n" or a label.
        const Token* arg = at(i);
        if (arg != nullptr) {
            pending.operand_column = arg->column;
            Mode mode = Mode::Direct;
            if (arg->category == TokenCategory::Separator && (arg->lexeme == "=" || arg->lexeme == "*")) {
                mode = arg->lexeme == "=" ? Mode::Constant : Mode::Indirect;
                arg = at(++i);
                if (arg == nullptr || arg->category != TokenCategory::Number) {
                    error(arg ? *arg : *toks[i - 1], "expected a number after '" + toks[i - 1]->lexeme + "'");
                    continue;
                }
            }
            if (arg->category == TokenCategory::Number) {
                const auto value = parse_unsigned(arg->lexeme).value_or(kMaxOperand + 1);
                if (value > kMaxOperand) {
                    error(*arg, "operand " + arg->lexeme + " too large");
                    continue;
                }
                pending.instruction.mode = mode;
                pending.instruction.operand = value;
            } else if (arg->category == TokenCategory::Label) {
                pending.instruction.mode = Mode::Label;
                pending.label_ref = arg->lexeme;
            } else {
                error(*arg, "malformed operand '" + arg->lexeme + "'");
                continue;
            }
            ++i;
        }

        if (at(i) != nullptr) {
            error(*at(i), "unexpected '" + at(i)->lexeme + "' after instruction");
            continue;
        }
        const Op op = pending.instruction.op;
        if (!mode_allowed(op, pending.instruction.mode)) {
            if (pending.instruction.mode == Mode::None) {
                error(*head, std::string(to_string(op)) + " expects an operand");
            } else if (op == Op::Halt) {
                error(*head, "HALT takes no operand");
            } else {
                error(*head, "bad operand mode for " + std::string(to_string(op)));
            }
            continue;
        }
        program.push_back(std::move(pending));
    }

    for (std::size_t index = 0; index < program.size(); ++index) {
        PendingLine& p = program[index];
        if (p.instruction.mode == Mode::Label) {
            auto it = symbols.find(p.label_ref);
            if (it == symbols.end()) {
                out.diagnostics.push_back(
                    Diagnostic{Severity::Error, p.line, p.operand_column, "unresolved label " + p.label_ref});
                continue;
            }
            p.instruction.operand = it->second;
        }
        out.image.push_back({index, encode(p.instruction)});
    }

    if (auto it = symbols.find("start"); it != symbols.end()) out.start_address = it->second;
    out.success = out.diagnostics.empty();
    if (!out.success) out.image.clear();
    return out;
}

std::string disassemble_program(const std::vector<Instruction>& program, std::uint64_t start_address) {
    std::set<std::uint64_t> targets;
    for (const Instruction& ins : program) {
        if (ins.mode == Mode::Label) targets.insert(ins.operand);
    }
    std::string out;
    for (std::uint64_t index = 0; index <= program.size(); ++index) {
        if (start_address != 0 && index == start_address) out += "start:\n";
        if (targets.count(index) != 0) out += "L" + std::to_string(index) + ":\n";
        if (index < program.size()) out += render(program[index]) + "\n";
    }
    return out;
}

Compiler::Compiler() : CompilerPlugin({"ram-compiler", PluginKind::Compiler, "RAM compiler", "1.0.0"}) {}

}  // namespace emu::ram
