#pragma once

/**
 * @file
 * @brief Random Access Machine: the Harvard reference machine.
 *
 * Instructions live in a program memory whose cells hold encoded
 * instructions; data lives in a separate sparse register memory of signed
 * 64-bit values (register 0 is the accumulator). The CPU only ever receives a
 * read-only view of program memory. Input and output are tapes attached to
 * CPU ports 0 and 1.
 *
 * Operand modes: `=n` constant, `n` direct (reg[n]), `*n` indirect
 * (reg[reg[n]]), and a label for jumps.
 */

#include "emu/contracts.hpp"
#include "emu/cpu_ports.hpp"
#include "emu/memory.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace emu::ram {

enum class Op : std::uint8_t { Read = 1, Write, Load, Store, Add, Sub, Jmp, Jz, Halt };
enum class Mode : std::uint8_t { None = 0, Constant, Direct, Indirect, Label };

std::string_view to_string(Op op);
std::optional<Op> parse_op(std::string_view mnemonic);  // case-insensitive
bool mode_allowed(Op op, Mode mode);

constexpr std::uint64_t kMaxOperand = (std::uint64_t{1} << 48) - 1;

struct Instruction {
    Op op = Op::Halt;
    Mode mode = Mode::None;
    std::uint64_t operand = 0;  // label operands hold the target index

    bool operator==(const Instruction&) const = default;
};

/// Cell layout: op | mode << 8 | operand << 16. Zero is never a valid encoding.
Cell encode(const Instruction& instruction);
std::optional<Instruction> decode(Cell cell);

/// "ADD *0", "LOAD =7", "JMP L3".
std::string render(const Instruction& instruction);

// -----------------------------------------------------------------------------
// Compiler
// -----------------------------------------------------------------------------

std::vector<Token> lex(std::string_view source);

/// Image addresses are instruction indices. Start is 0, or the index of `start:`.
CompileOutput compile_source(std::string_view source);

/// Source that compiles back to the same cells: jump targets get `L<n>:`
/// labels and a non-zero start gets `start:`.
std::string disassemble_program(const std::vector<Instruction>& program, std::uint64_t start_address);

class Compiler final : public CompilerPlugin {
public:
    Compiler();

    std::vector<Token> lex(std::string_view source) const override { return ram::lex(source); }
    std::string_view cell_unit() const override { return "instructions"; }

protected:
    CompileOutput translate(std::string_view source) override { return compile_source(source); }
};

// -----------------------------------------------------------------------------
// Memories
// -----------------------------------------------------------------------------

/// Instruction-valued cells ("instruction" kind). Setting: size (default 1024).
class ProgramMemory final : public MemoryPlugin {
public:
    ProgramMemory();

    MemoryContext& context() override { return memory_; }
    /// CPUs get a read-only view.
    MemoryContext& context_for(PluginKind requester) override;
    void apply_setting(std::string_view key, std::string_view value) override;

private:
    ArrayMemory memory_;
    ReadOnlyMemoryView cpu_view_;
};

/// Sparse map index -> signed 64-bit value; absent registers read as 0.
class RegisterContext final : public MemoryContext {
public:
    RegisterContext(const Plugin& owner, std::uint64_t size) : owner_(owner), size_(size) {}

    std::vector<Cell> read(Address address, std::uint64_t count) const override;
    void write(Address address, std::span<const Cell> values) override;
    std::uint64_t size() const override { return size_; }
    int cell_width() const override { return 64; }
    void add_listener(MemoryListener listener) override;

    /// Non-zero registers only.
    std::map<std::uint64_t, std::int64_t> entries() const;
    void set_size(std::uint64_t size) { size_ = size; }

private:
    const Plugin& owner_;
    std::uint64_t size_;
    std::map<std::uint64_t, Cell> cells_;
    std::vector<MemoryListener> listeners_;
};

/// Setting: size (number of addressable registers, default 2^32).
class RegisterMemory final : public MemoryPlugin {
public:
    RegisterMemory();

    MemoryContext& context() override { return registers_; }
    void apply_setting(std::string_view key, std::string_view value) override;
    const RegisterContext& registers() const noexcept { return registers_; }

private:
    RegisterContext registers_;
};

constexpr std::uint64_t kDefaultRegisterCount = std::uint64_t{1} << 32;

// -----------------------------------------------------------------------------
// CPU
// -----------------------------------------------------------------------------

constexpr Address kInputPort = 0;
constexpr Address kOutputPort = 1;

class Cpu final : public CpuPlugin {
public:
    Cpu();

    CpuContext& context() override { return ports_; }
    /// Accepts one "instruction" memory and one 64-bit "data" memory.
    void connect_memory(MemoryContext& memory) override;
    void check_wiring() const override;

    void reset(Address start_address) override;
    StepOutcome step() override;
    Address program_counter() const override { return pc_; }
    CpuStatusSnapshot status() const override;
    Disassembly disassemble(Address address) const override;

private:
    std::int64_t reg(std::uint64_t index) const;
    void set_reg(std::uint64_t index, std::int64_t value);
    std::uint64_t register_index(std::int64_t value) const;

    PortTable ports_;
    MemoryContext* program_ = nullptr;
    MemoryContext* registers_ = nullptr;
    Address pc_ = 0;
};

// -----------------------------------------------------------------------------
// Tapes
// -----------------------------------------------------------------------------

/// In-only device. `in` on an exhausted tape throws DeviceError.
class InputTape final : public DevicePlugin, public HostInput {
public:
    InputTape();

    std::vector<DeviceContext*> contexts() override { return {&context_}; }
    void feed(std::span<const Word> values) override;
    std::size_t consumed() const noexcept { return consumed_; }
    std::size_t remaining() const noexcept { return tape_.size(); }

private:
    class Context final : public DeviceContext {
    public:
        explicit Context(InputTape& owner) : owner_(owner) {}
        Word in() override;
        void out(Word value) override;
        std::string_view context_id() const override { return "tape"; }
        int width_bits() const override { return 64; }

    private:
        InputTape& owner_;
    };

    Context context_;
    std::deque<Word> tape_;
    std::size_t consumed_ = 0;
};

/// Out-only device; values are appended and reported to the host.
class OutputTape final : public DevicePlugin, public HostOutput {
public:
    OutputTape();

    std::vector<DeviceContext*> contexts() override { return {&context_}; }
    std::vector<Word> take_output() override;
    bool signed_values() const override { return true; }
    const std::vector<Word>& tape() const noexcept { return tape_; }

private:
    class Context final : public DeviceContext {
    public:
        explicit Context(OutputTape& owner) : owner_(owner) {}
        Word in() override;
        void out(Word value) override;
        std::string_view context_id() const override { return "tape"; }
        int width_bits() const override { return 64; }

    private:
        OutputTape& owner_;
    };

    Context context_;
    std::vector<Word> tape_;
    std::size_t taken_ = 0;
};

}  // namespace emu::ram
