#pragma once

/**
 * @file
 * @brief TinyVN: the von Neumann reference machine.
 *
 * An 8-bit accumulator CPU sharing one 256-byte memory between code and data,
 * with port-mapped I/O. Instruction set:
 *
 *   HALT   0x00           LOAD a 0x01 a     STORE a 0x02 a
 *   ADD a  0x03 a         SUB a  0x04 a     JMP a   0x05 a
 *   JZ a   0x06 a         IN p   0x07 p     OUT p   0x08 p
 *   LDI i  0x09 i
 *
 * Arithmetic wraps modulo 256. Z tracks A == 0 after LOAD, LDI, ADD, SUB, IN.
 *
 * Assembly: `[label:] [mnemonic [operand]] [; comment]` per line, mnemonics
 * case-insensitive, operands decimal / 0x-hex / label. Directives: ORG n, DB v.
 */

#include "emu/contracts.hpp"
#include "emu/cpu_ports.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace emu::tinyvn {

enum class Opcode : std::uint8_t {
    Halt = 0x00,
    Load = 0x01,
    Store = 0x02,
    Add = 0x03,
    Sub = 0x04,
    Jmp = 0x05,
    Jz = 0x06,
    In = 0x07,
    Out = 0x08,
    Ldi = 0x09,
};

struct OpcodeInfo {
    Opcode opcode;
    std::string_view mnemonic;
    std::uint8_t length;  // 1 or 2
};

/// Case-insensitive.
const OpcodeInfo* find_mnemonic(std::string_view mnemonic);
const OpcodeInfo* decode(std::uint8_t byte);
bool is_directive(std::string_view word);

constexpr std::uint64_t kMemorySize = 256;

// -----------------------------------------------------------------------------
// Assembler
// -----------------------------------------------------------------------------

std::vector<Token> lex(std::string_view source);

struct LabelRef {
    std::string name;
    bool operator==(const LabelRef&) const = default;
};

using Operand = std::variant<std::uint64_t, LabelRef>;

struct AsmLine {
    std::optional<std::string> label;
    std::string mnemonic;  // upper-case; empty for label-only lines
    std::optional<Operand> operand;
    int line = 0;
    int column = 0;
    int operand_column = 0;
};

struct AsmProgram {
    std::vector<AsmLine> lines;
    std::map<std::string, std::uint64_t> symbols;  // filled by assemble()
};

struct ParseResult {
    AsmProgram program;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return diagnostics.empty(); }
};

ParseResult parse(const std::vector<Token>& tokens);

/// Two passes: layout and symbols, then emission. Fills `program.symbols`.
CompileOutput assemble(AsmProgram& program);

/// lex + parse + assemble.
CompileOutput compile_source(std::string_view source);

// -----------------------------------------------------------------------------
// CPU
// -----------------------------------------------------------------------------

struct Registers {
    std::uint8_t a = 0;
    std::uint8_t pc = 0;
    bool z = true;

    bool operator==(const Registers&) const = default;
};

/// Fetch/decode/execute one instruction. On Fault the registers are unchanged.
StepOutcome execute_instruction(Registers& regs, MemoryContext& memory, const PortTable& ports);

/// Invalid opcodes render as `DB 0xNN` with length 1. Throws RangeError.
Disassembly disassemble(const MemoryContext& memory, Address address);

/// Normalised source for [begin, end): one instruction per line.
std::string disassemble_range(const MemoryContext& memory, Address begin, Address end);

// -----------------------------------------------------------------------------
// Plug-ins
// -----------------------------------------------------------------------------

class Assembler final : public CompilerPlugin {
public:
    Assembler();

    std::vector<Token> lex(std::string_view source) const override { return tinyvn::lex(source); }
    std::string_view cell_unit() const override { return "bytes"; }

protected:
    CompileOutput translate(std::string_view source) override { return compile_source(source); }
};

class Cpu final : public CpuPlugin {
public:
    Cpu();

    CpuContext& context() override { return ports_; }
    void connect_memory(MemoryContext& memory) override;
    void check_wiring() const override;

    void reset(Address start_address) override;
    StepOutcome step() override;
    Address program_counter() const override { return regs_.pc; }
    CpuStatusSnapshot status() const override;
    Disassembly disassemble(Address address) const override;

    const Registers& registers() const noexcept { return regs_; }

private:
    PortTable ports_;
    MemoryContext* memory_ = nullptr;
    Registers regs_;
};

}  // namespace emu::tinyvn
