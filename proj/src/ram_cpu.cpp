#include "emu/ram.hpp"

#include "emu/errors.hpp"
#include "emu/settings.hpp"

#include <fmt/format.h>

namespace emu::ram {

// -----------------------------------------------------------------------------
// Memories
// -----------------------------------------------------------------------------

ProgramMemory::ProgramMemory()
    : MemoryPlugin({"ram-program-memory", PluginKind::Memory, "RAM program memory", "1.0.0"}),
      memory_(*this, 1024, 64, "instruction"),
      cpu_view_(memory_) {}

MemoryContext& ProgramMemory::context_for(PluginKind requester) {
    if (requester == PluginKind::Cpu) return cpu_view_;
    return memory_;
}

void ProgramMemory::apply_setting(std::string_view key, std::string_view value) {
    if (key == "size") {
        memory_.resize(parse_setting_uint(metadata().id, key, value, 1, std::uint64_t{1} << 20));
    } else {
        MemoryPlugin::apply_setting(key, value);
    }
}

std::vector<Cell> RegisterContext::read(Address address, std::uint64_t count) const {
    if (address > size_ || count > size_ - address) {
        throw RangeError(fmt::format("register access [{}, +{}) outside {} registers", address, count, size_));
    }
    std::vector<Cell> values;
    values.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        auto it = cells_.find(address + i);
        values.push_back(it == cells_.end() ? 0 : it->second);
    }
    return values;
}

void RegisterContext::write(Address address, std::span<const Cell> values) {
    if (address > size_ || values.size() > size_ - address) {
        throw RangeError(fmt::format("register access [{}, +{}) outside {} registers", address, values.size(), size_));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] == 0) {
            cells_.erase(address + i);
        } else {
            cells_[address + i] = values[i];
        }
    }
    for (const auto& listener : listeners_) listener(address, values);
}

void RegisterContext::add_listener(MemoryListener listener) {
    if (owner_.sealed()) throw WiringSealedError(owner_.metadata().id + ": wiring is sealed");
    listeners_.push_back(std::move(listener));
}

std::map<std::uint64_t, std::int64_t> RegisterContext::entries() const {
    std::map<std::uint64_t, std::int64_t> out;
    for (const auto& [index, cell] : cells_) out.emplace(index, static_cast<std::int64_t>(cell));
    return out;
}

RegisterMemory::RegisterMemory()
    : MemoryPlugin({"ram-register-memory", PluginKind::Memory, "RAM register memory", "1.0.0"}),
      registers_(*this, kDefaultRegisterCount) {}

void RegisterMemory::apply_setting(std::string_view key, std::string_view value) {
    if (key == "size") {
        registers_.set_size(parse_setting_uint(metadata().id, key, value, 1, std::uint64_t{1} << 62));
    } else {
        MemoryPlugin::apply_setting(key, value);
    }
}

// -----------------------------------------------------------------------------
// CPU
// -----------------------------------------------------------------------------

namespace {

/// Raised inside one step; converted to a Fault outcome.
struct StepFault {
    std::string message;
};

}  // namespace

Cpu::Cpu() : CpuPlugin({"ram-cpu", PluginKind::Cpu, "RAM CPU", "1.0.0"}), ports_(*this) {}

void Cpu::connect_memory(MemoryContext& memory) {
    if (memory.cell_kind() == "instruction") {
        if (program_ != nullptr) throw WiringError("ram-cpu: program memory already connected");
        program_ = &memory;
    } else if (memory.cell_width() == 64) {
        if (registers_ != nullptr) throw WiringError("ram-cpu: register memory already connected");
        registers_ = &memory;
    } else {
        throw WiringError("ram-cpu: needs an instruction memory and a 64-bit register memory");
    }
}

void Cpu::check_wiring() const {
    if (program_ == nullptr) throw WiringError("ram-cpu: no program memory connected");
    if (registers_ == nullptr) throw WiringError("ram-cpu: no register memory connected");
}

void Cpu::reset(Address start_address) {
    pc_ = start_address;
}

std::int64_t Cpu::reg(std::uint64_t index) const {
    return static_cast<std::int64_t>(registers_->read_cell(index));
}

void Cpu::set_reg(std::uint64_t index, std::int64_t value) {
    registers_->write_cell(index, static_cast<Cell>(value));
}

std::uint64_t Cpu::register_index(std::int64_t value) const {
    if (value < 0) throw StepFault{fmt::format("negative register index {}", value)};
    if (static_cast<std::uint64_t>(value) >= registers_->size()) {
        throw StepFault{fmt::format("register index {} out of range", value)};
    }
    return static_cast<std::uint64_t>(value);
}

StepOutcome Cpu::step() {
    try {
        if (pc_ >= program_->size()) throw StepFault{fmt::format("pc {} outside program", pc_)};
        const Cell cell = program_->read_cell(pc_);
        if (cell == 0) throw StepFault{fmt::format("pc {} outside program", pc_)};
        const auto ins = decode(cell);
        if (!ins) throw StepFault{fmt::format("invalid instruction 0x{:X} at {}", cell, pc_)};

        auto direct = [&](std::uint64_t n) { return register_index(static_cast<std::int64_t>(n)); };
        auto target = [&]() -> std::uint64_t {
            const std::uint64_t n = direct(ins->operand);
            return ins->mode == Mode::Indirect ? register_index(reg(n)) : n;
        };
        auto value = [&]() -> std::int64_t {
            if (ins->mode == Mode::Constant) return static_cast<std::int64_t>(ins->operand);
            return reg(target());
        };
        auto device = [&](Address port) -> DeviceContext& {
            DeviceContext* dev = ports_.device(port);
            if (dev == nullptr) throw StepFault{fmt::format("no tape attached on port {}", port)};
            return *dev;
        };

        Address next = pc_ + 1;
        switch (ins->op) {
            case Op::Halt: return StepOutcome::halted();
            case Op::Load: set_reg(0, value()); break;
            case Op::Store: set_reg(target(), reg(0)); break;
            case Op::Add:
            case Op::Sub: {
                const std::int64_t lhs = reg(0);
                const std::int64_t rhs = value();
                std::int64_t result = 0;
                const bool overflow = ins->op == Op::Add ? __builtin_add_overflow(lhs, rhs, &result)
                                                         : __builtin_sub_overflow(lhs, rhs, &result);
                if (overflow) throw StepFault{fmt::format("64-bit overflow in {} at {}", to_string(ins->op), pc_)};
                set_reg(0, result);
                break;
            }
            case Op::Read: {
                const std::uint64_t t = target();
                const Word input = device(kInputPort).in();
                set_reg(t, static_cast<std::int64_t>(input));
                break;
            }
            case Op::Write: device(kOutputPort).out(static_cast<Word>(value())); break;
            case Op::Jmp: next = ins->operand; break;
            case Op::Jz:
                if (reg(0) == 0) next = ins->operand;
                break;
        }
        pc_ = next;
        return StepOutcome::proceed();
    } catch (const StepFault& f) {
        return StepOutcome::fault(f.message);
    } catch (const EmuError& e) {
        return StepOutcome::fault(e.what());
    }
}

CpuStatusSnapshot Cpu::status() const {
    CpuStatusSnapshot s;
    const Cell acc = registers_ != nullptr ? registers_->read_cell(0) : 0;
    s.registers = {{"PC", pc_, 64}, {"R0", acc, 64}};
    s.flags = {{"Z", acc == 0}};
    s.program_counter = pc_;
    return s;
}

Disassembly Cpu::disassemble(Address address) const {
    const Cell cell = program_->read_cell(address);
    const auto ins = decode(cell);
    if (!ins) return {fmt::format("?? 0x{:X}", cell), 1};
    return {render(*ins), 1};
}

// -----------------------------------------------------------------------------
// Tapes
// -----------------------------------------------------------------------------

InputTape::InputTape()
    : DevicePlugin({"input-tape", PluginKind::Device, "Input tape", "1.0.0"}), context_(*this) {}

void InputTape::feed(std::span<const Word> values) {
    tape_.insert(tape_.end(), values.begin(), values.end());
}

Word InputTape::Context::in() {
    if (owner_.tape_.empty()) throw DeviceError("input tape exhausted");
    const Word value = owner_.tape_.front();
    owner_.tape_.pop_front();
    ++owner_.consumed_;
    return value;
}

void InputTape::Context::out(Word value) {
    (void)value;
    throw DeviceError("input tape is read-only");
}

OutputTape::OutputTape()
    : DevicePlugin({"output-tape", PluginKind::Device, "Output tape", "1.0.0"}), context_(*this) {}

std::vector<Word> OutputTape::take_output() {
    std::vector<Word> out(tape_.begin() + static_cast<std::ptrdiff_t>(taken_), tape_.end());
    taken_ = tape_.size();
    return out;
}

Word OutputTape::Context::in() {
    throw DeviceError("output tape is write-only");
}

void OutputTape::Context::out(Word value) {
    owner_.tape_.push_back(value);
    owner_.report_output(context_id(), value);
}

}  // namespace emu::ram
