#include "emu/tinyvn.hpp"

#include "emu/errors.hpp"

#include <fmt/format.h>

namespace emu::tinyvn {

namespace {

std::uint64_t operand_address(Address opcode_address) {
    return (opcode_address + 1) & 0xFF;
}

}  // namespace

StepOutcome execute_instruction(Registers& regs, MemoryContext& memory, const PortTable& ports) {
    try {
        const auto byte = static_cast<std::uint8_t>(memory.read_cell(regs.pc) & 0xFF);
        const OpcodeInfo* info = decode(byte);
        if (info == nullptr) return StepOutcome::fault(fmt::format("invalid opcode 0x{:02X} at 0x{:02X}", byte, regs.pc));
        if (info->opcode == Opcode::Halt) return StepOutcome::halted();

        const auto operand = static_cast<std::uint8_t>(memory.read_cell(operand_address(regs.pc)) & 0xFF);
        Registers next = regs;
        next.pc = static_cast<std::uint8_t>(regs.pc + 2);

        auto set_a = [&](std::uint64_t value) {
            next.a = static_cast<std::uint8_t>(value & 0xFF);
            next.z = next.a == 0;
        };
        auto port = [&](std::uint8_t p) -> DeviceContext* { return ports.device(p); };

        switch (info->opcode) {
            case Opcode::Load: set_a(memory.read_cell(operand)); break;
            case Opcode::Store: memory.write_cell(operand, regs.a); break;
            case Opcode::Add: set_a(regs.a + (memory.read_cell(operand) & 0xFF)); break;
            case Opcode::Sub: set_a(regs.a + 256 - (memory.read_cell(operand) & 0xFF)); break;
            case Opcode::Jmp: next.pc = operand; break;
            case Opcode::Jz:
                if (regs.z) next.pc = operand;
                break;
            case Opcode::In: {
                DeviceContext* dev = port(operand);
                if (dev == nullptr) return StepOutcome::fault(fmt::format("IN from unattached port {}", operand));
                set_a(dev->in());
                break;
            }
            case Opcode::Out: {
                DeviceContext* dev = port(operand);
                if (dev == nullptr) return StepOutcome::fault(fmt::format("OUT to unattached port {}", operand));
                dev->out(regs.a);
                break;
            }
            case Opcode::Ldi: set_a(operand); break;
            case Opcode::Halt: break;
        }
        regs = next;
        return StepOutcome::proceed();
    } catch (const EmuError& e) {
        return StepOutcome::fault(e.what());
    }
}

Disassembly disassemble(const MemoryContext& memory, Address address) {
    const auto byte = static_cast<std::uint8_t>(memory.read_cell(address) & 0xFF);
    const OpcodeInfo* info = decode(byte);
    if (info == nullptr) return {fmt::format("DB 0x{:02X}", byte), 1};
    if (info->length == 1) return {std::string(info->mnemonic), 1};
    const auto operand = memory.read_cell(operand_address(address)) & 0xFF;
    return {fmt::format("{} {}", info->mnemonic, operand), 2};
}

std::string disassemble_range(const MemoryContext& memory, Address begin, Address end) {
    std::string out;
    Address at = begin;
    while (at < end) {
        const Disassembly d = disassemble(memory, at);
        out += d.text;
        out += '\n';
        at += d.length;
    }
    return out;
}

// -----------------------------------------------------------------------------

Cpu::Cpu() : CpuPlugin({"tinyvn-cpu", PluginKind::Cpu, "TinyVN CPU", "1.0.0"}), ports_(*this) {}

void Cpu::connect_memory(MemoryContext& memory) {
    if (memory_ != nullptr) throw WiringError("tinyvn-cpu: already connected to a memory");
    if (memory.cell_width() != 8) throw WiringError("tinyvn-cpu: memory must have 8-bit cells");
    memory_ = &memory;
}

void Cpu::check_wiring() const {
    if (memory_ == nullptr) throw WiringError("tinyvn-cpu: no memory connected");
}

void Cpu::reset(Address start_address) {
    regs_ = Registers{};
    regs_.pc = static_cast<std::uint8_t>(start_address & 0xFF);
}

StepOutcome Cpu::step() {
    return execute_instruction(regs_, *memory_, ports_);
}

CpuStatusSnapshot Cpu::status() const {
    CpuStatusSnapshot s;
    s.registers = {{"PC", regs_.pc, 8}, {"A", regs_.a, 8}};
    s.flags = {{"Z", regs_.z}};
    s.program_counter = regs_.pc;
    return s;
}

Disassembly Cpu::disassemble(Address address) const {
    return tinyvn::disassemble(*memory_, address);
}

}  // namespace emu::tinyvn
