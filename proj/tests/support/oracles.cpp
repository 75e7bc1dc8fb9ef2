#include "oracles.hpp"

#include <climits>
#include <sstream>

namespace oracle {

const char* to_string(End end) {
    switch (end) {
        case End::Halted: return "halted";
        case End::Fault: return "fault";
        case End::Budget: return "budget";
    }
    return "?";
}

// -----------------------------------------------------------------------------
// TinyVN
// -----------------------------------------------------------------------------

VnState run_tinyvn(const std::array<std::uint8_t, 256>& memory, std::uint8_t start, std::deque<std::uint8_t> input,
                   std::uint64_t budget) {
    VnState s;
    s.mem = memory;
    s.pc = start;
    while (s.steps < budget) {
        const std::uint8_t op = s.mem[s.pc];
        const std::uint8_t arg = s.mem[static_cast<std::uint8_t>(s.pc + 1)];
        const std::uint8_t after = static_cast<std::uint8_t>(s.pc + 2);
        s.steps++;
        switch (op) {
            case 0x00: s.end = End::Halted; return s;
            case 0x01: s.a = s.mem[arg]; s.z = s.a == 0; s.pc = after; break;
            case 0x02: s.mem[arg] = s.a; s.pc = after; break;
            case 0x03: s.a = static_cast<std::uint8_t>(s.a + s.mem[arg]); s.z = s.a == 0; s.pc = after; break;
            case 0x04: s.a = static_cast<std::uint8_t>(s.a - s.mem[arg]); s.z = s.a == 0; s.pc = after; break;
            case 0x05: s.pc = arg; break;
            case 0x06: s.pc = s.z ? arg : after; break;
            case 0x07:
                if (arg != 0) {
                    s.end = End::Fault;
                    return s;
                }
                if (input.empty()) {
                    s.a = 0;
                } else {
                    s.a = input.front();
                    input.pop_front();
                }
                s.z = s.a == 0;
                s.pc = after;
                break;
            case 0x08:
                if (arg != 0) {
                    s.end = End::Fault;
                    return s;
                }
                s.out.push_back(s.a);
                s.pc = after;
                break;
            case 0x09: s.a = arg; s.z = s.a == 0; s.pc = after; break;
            default: s.end = End::Fault; return s;
        }
    }
    s.end = End::Budget;
    return s;
}

VnProgram random_tinyvn(std::mt19937_64& rng, std::size_t max_bytes) {
    static const char* names[] = {"HALT", "LOAD", "STORE", "ADD", "SUB", "JMP", "JZ", "IN", "OUT", "LDI"};
    VnProgram p;
    std::uniform_int_distribution<int> pick(0, 99);
    std::uniform_int_distribution<int> byte(0, 255);
    const std::size_t limit = std::uniform_int_distribution<std::size_t>(1, max_bytes)(rng);
    std::ostringstream src;

    while (p.length < limit) {
        const int roll = pick(rng);
        int op;
        if (roll < 3) op = 0;
        else if (roll < 13) op = 1;
        else if (roll < 23) op = 2;
        else if (roll < 35) op = 3;
        else if (roll < 45) op = 4;
        else if (roll < 50) op = 5;
        else if (roll < 58) op = 6;
        else if (roll < 68) op = 7;
        else if (roll < 80) op = 8;
        else if (roll < 97) op = 9;
        else op = -1;  // raw byte

        if (op == -1) {
            const int v = byte(rng);
            p.image[p.length++] = static_cast<std::uint8_t>(v);
            src << "DB " << v << '\n';
            continue;
        }
        if (op == 0) {
            p.image[p.length++] = 0;
            src << names[0] << '\n';
            continue;
        }
        if (p.length + 2 > limit) break;
        int arg;
        switch (op) {
            case 1: case 2: case 3: case 4: arg = pick(rng) < 70 ? 64 + byte(rng) % 32 : byte(rng); break;
            case 5: case 6: arg = byte(rng) % static_cast<int>(limit + 1); break;
            case 7: case 8: arg = pick(rng) < 95 ? 0 : 1 + byte(rng) % 3; break;
            default: arg = byte(rng); break;
        }
        p.image[p.length++] = static_cast<std::uint8_t>(op);
        p.image[p.length++] = static_cast<std::uint8_t>(arg);
        // Mix decimal, hex and case to exercise the lexer.
        const bool hex = pick(rng) < 30;
        const bool lower = pick(rng) < 20;
        std::string name = names[op];
        if (lower) {
            for (auto& c : name) c = static_cast<char>(c - 'A' + 'a');
        }
        src << name << ' ';
        if (hex) {
            src << "0x" << std::hex << arg << std::dec;
        } else {
            src << arg;
        }
        if (pick(rng) < 10) src << " ; note";
        src << '\n';
    }
    p.source = src.str();
    const int inputs = pick(rng) % 6;
    for (int i = 0; i < inputs; ++i) p.input.push_back(static_cast<std::uint8_t>(byte(rng) % 20));
    return p;
}

// -----------------------------------------------------------------------------
// RAM machine
// -----------------------------------------------------------------------------

namespace {

struct RamFault {};

}  // namespace

RamState run_ram(const std::vector<RamIns>& program, std::uint64_t start, std::deque<std::int64_t> input,
                 std::uint64_t budget, std::uint64_t register_count) {
    RamState s;
    s.pc = start;
    std::map<std::uint64_t, std::int64_t> regs;

    auto get = [&](std::uint64_t i) -> std::int64_t {
        auto it = regs.find(i);
        return it == regs.end() ? 0 : it->second;
    };
    auto index = [&](std::int64_t v) -> std::uint64_t {
        if (v < 0 || static_cast<std::uint64_t>(v) >= register_count) throw RamFault{};
        return static_cast<std::uint64_t>(v);
    };
    auto direct = [&](std::uint64_t n) -> std::uint64_t {
        if (n >= register_count) throw RamFault{};
        return n;
    };

    while (s.steps < budget) {
        if (s.pc >= program.size()) {
            s.end = End::Fault;
            break;
        }
        const RamIns& ins = program[s.pc];
        s.steps++;
        try {
            auto target = [&]() -> std::uint64_t {
                const std::uint64_t n = direct(ins.operand);
                return ins.mode == '*' ? index(get(n)) : n;
            };
            auto value = [&]() -> std::int64_t {
                if (ins.mode == '=') return static_cast<std::int64_t>(ins.operand);
                return get(target());
            };
            std::uint64_t next = s.pc + 1;
            if (ins.op == "HALT") {
                s.end = End::Halted;
                break;
            } else if (ins.op == "LOAD") {
                regs[0] = value();
            } else if (ins.op == "STORE") {
                const auto t = target();
                regs[t] = get(0);
            } else if (ins.op == "ADD" || ins.op == "SUB") {
                const __int128 lhs = get(0);
                const __int128 rhs = value();
                const __int128 r = ins.op == "ADD" ? lhs + rhs : lhs - rhs;
                if (r > INT64_MAX || r < INT64_MIN) throw RamFault{};
                regs[0] = static_cast<std::int64_t>(r);
            } else if (ins.op == "READ") {
                const auto t = target();
                if (input.empty()) throw RamFault{};
                regs[t] = input.front();
                input.pop_front();
            } else if (ins.op == "WRITE") {
                s.out.push_back(value());
            } else if (ins.op == "JMP") {
                next = ins.operand;
            } else if (ins.op == "JZ") {
                if (get(0) == 0) next = ins.operand;
            }
            s.pc = next;
        } catch (const RamFault&) {
            s.end = End::Fault;
            break;
        }
    }
    for (const auto& [k, v] : regs) {
        if (v != 0) s.regs[k] = v;
    }
    return s;
}

RamProgram random_ram(std::mt19937_64& rng, std::size_t max_instructions) {
    RamProgram p;
    std::uniform_int_distribution<int> pick(0, 99);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_instructions)(rng);

    for (std::size_t i = 0; i < n; ++i) {
        RamIns ins;
        const int roll = pick(rng);
        if (roll < 4) ins.op = "HALT";
        else if (roll < 16) ins.op = "READ";
        else if (roll < 28) ins.op = "WRITE";
        else if (roll < 42) ins.op = "LOAD";
        else if (roll < 54) ins.op = "STORE";
        else if (roll < 68) ins.op = "ADD";
        else if (roll < 80) ins.op = "SUB";
        else if (roll < 88) ins.op = "JMP";
        else ins.op = "JZ";

        auto reg_operand = [&] { return static_cast<std::uint64_t>(pick(rng) < 95 ? pick(rng) % 8 : pick(rng) * 1000); };
        if (ins.op == "HALT") {
            ins.mode = ' ';
        } else if (ins.op == "JMP" || ins.op == "JZ") {
            ins.mode = 'L';
            ins.operand = static_cast<std::uint64_t>(pick(rng)) % (n + 1);
        } else if (ins.op == "READ" || ins.op == "STORE") {
            ins.mode = pick(rng) < 75 ? 'd' : '*';
            ins.operand = reg_operand();
        } else {
            const int m = pick(rng);
            ins.mode = m < 35 ? '=' : (m < 80 ? 'd' : '*');
            if (ins.mode == '=') {
                const int big = pick(rng);
                ins.operand = big < 5 ? (std::uint64_t{1} << 47) + static_cast<std::uint64_t>(pick(rng))
                                      : static_cast<std::uint64_t>(pick(rng) % 20);
            } else {
                ins.operand = reg_operand();
            }
        }
        p.program.push_back(ins);
    }

    if (pick(rng) < 25) p.start = static_cast<std::uint64_t>(pick(rng)) % n;

    std::set<std::uint64_t> targets;
    for (const auto& ins : p.program) {
        if (ins.mode == 'L') targets.insert(ins.operand);
    }
    std::ostringstream src;
    for (std::size_t i = 0; i <= n; ++i) {
        if (i == p.start && (p.start != 0 || pick(rng) < 50)) src << "start:\n";
        if (targets.count(i) != 0) src << "L" << i << ":\n";
        if (i == n) break;
        const RamIns& ins = p.program[i];
        src << (pick(rng) < 15 ? "  " : "") << ins.op;
        switch (ins.mode) {
            case '=': src << " =" << ins.operand; break;
            case 'd': src << ' ' << ins.operand; break;
            case '*': src << " *" << ins.operand; break;
            case 'L': src << " L" << ins.operand; break;
            default: break;
        }
        if (pick(rng) < 10) src << " ; c";
        src << '\n';
    }
    p.source = src.str();

    const int inputs = pick(rng) % 8;
    for (int i = 0; i < inputs; ++i) p.input.push_back(pick(rng) - 50);
    return p;
}

// -----------------------------------------------------------------------------
// Configurations
// -----------------------------------------------------------------------------

emu::ArchitectureConfig random_config(std::mt19937_64& rng, bool legal) {
    using emu::PluginKind;
    std::uniform_int_distribution<int> pick(0, 99);
    emu::ArchitectureConfig c;
    c.name = "generated";
    c.plugins.push_back({"cpu", "x-cpu", PluginKind::Cpu});
    c.plugins.push_back({"cc", "x-compiler", PluginKind::Compiler});
    const int memories = 1 + pick(rng) % 3;
    const int devices = pick(rng) % 5;
    for (int i = 0; i < memories; ++i) c.plugins.push_back({"m" + std::to_string(i), "x-mem", PluginKind::Memory});
    for (int i = 0; i < devices; ++i) c.plugins.push_back({"d" + std::to_string(i), "x-dev", PluginKind::Device});

    auto random_of = [&](PluginKind kind) {
        const auto all = c.of_kind(kind);
        return all.empty() ? std::string() : all[static_cast<std::size_t>(pick(rng)) % all.size()]->instance_id;
    };

    // Legal edges with every secondary rule respected.
    c.connections.push_back({"cpu", random_of(PluginKind::Memory), std::nullopt, std::nullopt});
    if (pick(rng) < 70) c.connections.push_back({"cc", random_of(PluginKind::Memory), std::nullopt, std::nullopt});
    emu::Address next_cpu_port = 0;
    for (int i = 0; i < devices; ++i) {
        const std::string d = "d" + std::to_string(i);
        const int r = pick(rng);
        if (r < 50) {
            c.connections.push_back({d, "cpu", next_cpu_port++, std::nullopt});
        } else if (r < 70) {
            c.connections.push_back({d, random_of(PluginKind::Memory), std::nullopt, std::nullopt});
        } else if (devices > 1) {
            std::string other = d;
            while (other == d) other = random_of(PluginKind::Device);
            c.connections.push_back({d, other, std::nullopt, std::nullopt});
        }
    }
    if (legal) return c;

    // Forbidden kind pairs (memory sources included).
    static const std::pair<PluginKind, PluginKind> forbidden[] = {
        {PluginKind::Cpu, PluginKind::Cpu},         {PluginKind::Cpu, PluginKind::Compiler},
        {PluginKind::Cpu, PluginKind::Device},      {PluginKind::Compiler, PluginKind::Cpu},
        {PluginKind::Compiler, PluginKind::Device}, {PluginKind::Compiler, PluginKind::Compiler},
        {PluginKind::Memory, PluginKind::Cpu},      {PluginKind::Memory, PluginKind::Memory},
        {PluginKind::Memory, PluginKind::Device},   {PluginKind::Memory, PluginKind::Compiler},
        {PluginKind::Device, PluginKind::Compiler},
    };
    for (int tries = 0; tries < 50; ++tries) {
        const auto [from_kind, to_kind] = forbidden[static_cast<std::size_t>(pick(rng)) % std::size(forbidden)];
        std::string from = random_of(from_kind);
        std::string to = random_of(to_kind);
        if (from.empty() || to.empty()) continue;
        if (from == to) {
            if (from_kind != to_kind) continue;
            c.plugins.push_back({"extra", c.find(from)->plugin_id, from_kind});
            to = "extra";
        }
        const auto pos = static_cast<std::size_t>(pick(rng)) % (c.connections.size() + 1);
        c.connections.insert(c.connections.begin() + static_cast<std::ptrdiff_t>(pos), {from, to, std::nullopt, std::nullopt});
        return c;
    }
    // Always reachable: memory -> memory exists since there is at least one memory.
    c.connections.push_back({"m0", "cpu", std::nullopt, std::nullopt});
    return c;
}

}  // namespace oracle
