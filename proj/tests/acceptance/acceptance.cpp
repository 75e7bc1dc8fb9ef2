// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails. `--write-golden` regenerates the protocol transcript.

#include "cli.hpp"
#include "emu/config.hpp"
#include "emu/errors.hpp"
#include "emu/machine.hpp"
#include "emu/memory.hpp"
#include "emu/ram.hpp"
#include "emu/registry.hpp"
#include "emu/runner.hpp"
#include "emu/service.hpp"
#include "emu/tinyvn.hpp"

#include "oracles.hpp"
#include "ws_client.hpp"

#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

using namespace emu;
using namespace std::chrono_literals;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
using S = CpuRunState;
using C = ControlCommand;

/// Collects the first few mismatch descriptions.
struct Failures {
    std::vector<std::string> items;
    std::size_t count = 0;

    void add(std::string what) {
        if (++count <= 3) items.push_back(std::move(what));
    }
    bool ok() const { return count == 0; }
    std::string summary() const {
        std::string s = fmt::format("{} mismatch(es)", count);
        for (const auto& i : items) s += "; " + i;
        return s;
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::unique_ptr<Machine> preset(const std::string& name) {
    return Machine::build(*find_preset(name));
}

struct Events {
    explicit Events(Machine& m) : sub(m.subscribe([this](const EmuEvent& e) { all.push_back(e); })) {}

    template <class T>
    std::vector<T> of() const {
        std::vector<T> out;
        for (const auto& e : all) {
            if (const auto* x = std::get_if<T>(&e)) out.push_back(*x);
        }
        return out;
    }
    std::vector<EmuEvent> data() const {
        std::vector<EmuEvent> out;
        for (const auto& e : all) {
            if (!std::holds_alternative<StateChanged>(e)) out.push_back(e);
        }
        return out;
    }

    std::vector<EmuEvent> all;
    Subscription sub;
};

oracle::End end_of(const RunResult& r) {
    switch (r.reason) {
        case RunResult::Reason::Halted: return oracle::End::Halted;
        case RunResult::Reason::Fault: return oracle::End::Fault;
        default: return oracle::End::Budget;
    }
}

Word reg(const CpuStatusSnapshot& s, const std::string& name) {
    for (const auto& r : s.registers) {
        if (r.name == name) return r.value;
    }
    throw std::runtime_error("no register " + name);
}

bool flag(const CpuStatusSnapshot& s, const std::string& name) {
    for (const auto& f : s.flags) {
        if (f.name == name) return f.value;
    }
    throw std::runtime_error("no flag " + name);
}

// -----------------------------------------------------------------------------
// Criteria
// -----------------------------------------------------------------------------

/// Machine in `state` running a two-instruction loop.
std::unique_ptr<Machine> machine_in(S state) {
    auto m = preset("tinyvn");
    m->compile_and_load("l: LDI 1\nJMP l");
    m->reset();
    if (state == S::Running) m->execute();
    if (state == S::Stopped) m->stop();
    return m;
}

std::string state_machine(Failures& f) {
    // Expected table written out independently of the library's transition().
    struct Case {
        S from;
        C cmd;
        std::optional<S> to;
    };
    const std::vector<Case> table = {
        {S::Breakpoint, C::Reset, S::Breakpoint}, {S::Breakpoint, C::Step, S::Breakpoint},
        {S::Breakpoint, C::Execute, S::Running},  {S::Breakpoint, C::Pause, std::nullopt},
        {S::Breakpoint, C::Stop, S::Stopped},     {S::Running, C::Reset, S::Breakpoint},
        {S::Running, C::Step, std::nullopt},      {S::Running, C::Execute, std::nullopt},
        {S::Running, C::Pause, S::Breakpoint},    {S::Running, C::Stop, S::Stopped},
        {S::Stopped, C::Reset, S::Breakpoint},    {S::Stopped, C::Step, std::nullopt},
        {S::Stopped, C::Execute, std::nullopt},   {S::Stopped, C::Pause, std::nullopt},
        {S::Stopped, C::Stop, std::nullopt},
    };
    const auto t0 = Clock::now();
    for (const auto& c : table) {
        const std::string label = fmt::format("{} x {}", to_string(c.from), to_string(c.cmd));
        auto m = machine_in(c.from);
        if (m->state() != c.from) {
            f.add(label + ": setup");
            continue;
        }
        Events ev(*m);
        try {
            const S got = m->apply(c.cmd);
            const auto changes = ev.of<StateChanged>();
            if (!c.to) {
                f.add(label + ": accepted an illegal command");
            } else if (got != *c.to || m->state() != *c.to) {
                f.add(fmt::format("{}: reached {}", label, to_string(got)));
            } else if (changes.size() != 1 || changes[0].old_state != c.from || changes[0].new_state != *c.to) {
                f.add(label + ": state event");
            }
        } catch (const IllegalCommand&) {
            if (c.to) f.add(label + ": rejected a legal command");
            if (m->state() != c.from) f.add(label + ": state moved on rejection");
            if (!ev.all.empty()) f.add(label + ": events on rejection");
        }
    }
    // Step outcomes that end in Stopped.
    for (const auto& [src, reason] : {std::pair{"HALT", "halt"}, std::pair{"OUT 7", "fault"}}) {
        auto m = preset("tinyvn");
        m->compile_and_load(src);
        m->reset();
        m->step();
        if (m->state() != S::Stopped) f.add(fmt::format("step into {} left {}", reason, to_string(m->state())));
    }
    const double elapsed = seconds_since(t0);
    if (elapsed >= 1.0) f.add(fmt::format("took {:.2f} s", elapsed));
    return fmt::format("15 cases in {:.0f} ms", elapsed * 1000);
}

std::string tinyvn_oracle(Failures& f) {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240601);
    constexpr std::uint64_t kBudget = 10'000;
    for (int i = 0; i < 1000; ++i) {
        const auto p = oracle::random_tinyvn(rng, 64);
        auto m = preset("tinyvn");
        const auto compiled = m->compile_and_load(p.source);
        if (!compiled.success) {
            f.add(fmt::format("program {} failed to compile", i));
            continue;
        }
        m->feed_input("term0", std::vector<Word>(p.input.begin(), p.input.end()));
        m->reset();
        Events ev(*m);
        const RunResult r = m->execute_blocking(kBudget);

        std::deque<std::uint8_t> input(p.input.begin(), p.input.end());
        const auto expected = oracle::run_tinyvn(p.image, 0, input, kBudget);

        const auto snap = m->snapshot();
        const auto memory = m->memory("mem0").read(0, 256);
        std::vector<std::uint8_t> outputs;
        for (const auto& o : ev.of<DeviceOutput>()) outputs.push_back(static_cast<std::uint8_t>(o.value));
        bool same = reg(snap, "A") == expected.a && reg(snap, "PC") == expected.pc && flag(snap, "Z") == expected.z &&
                    outputs == expected.out && end_of(r) == expected.end;
        for (std::size_t a = 0; same && a < 256; ++a) same = memory[a] == expected.mem[a];
        if (!same) {
            f.add(fmt::format("program {} ({} vs oracle {}): {}", i, oracle::to_string(end_of(r)),
                              oracle::to_string(expected.end), p.source));
        }
    }
    const double elapsed = seconds_since(t0);
    if (elapsed >= 30.0) f.add(fmt::format("took {:.1f} s", elapsed));
    return fmt::format("1000 programs in {:.2f} s", elapsed);
}

std::map<std::uint64_t, std::int64_t> ram_registers(Machine& m) {
    return m.plugin_as<ram::RegisterMemory>("regs")->registers().entries();
}

std::vector<std::int64_t> ram_output(Machine& m) {
    std::vector<std::int64_t> out;
    for (Word w : m.plugin_as<ram::OutputTape>("out")->tape()) out.push_back(static_cast<std::int64_t>(w));
    return out;
}

std::string ram_oracle(Failures& f) {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(77);
    constexpr std::uint64_t kBudget = 10'000;
    for (int i = 0; i < 500; ++i) {
        const auto p = oracle::random_ram(rng);
        auto m = preset("ram");
        if (!m->compile_and_load(p.source).success) {
            f.add(fmt::format("program {} failed to compile", i));
            continue;
        }
        m->feed_input("in", std::vector<Word>(p.input.begin(), p.input.end()));
        m->reset();
        const RunResult r = m->execute_blocking(kBudget);
        const auto expected =
            oracle::run_ram(p.program, p.start, std::deque<std::int64_t>(p.input.begin(), p.input.end()), kBudget);
        if (ram_output(*m) != expected.out || ram_registers(*m) != expected.regs || end_of(r) != expected.end) {
            f.add(fmt::format("program {} ({} vs oracle {})", i, oracle::to_string(end_of(r)),
                              oracle::to_string(expected.end)));
        }
    }
    const double elapsed = seconds_since(t0);
    if (elapsed >= 30.0) f.add(fmt::format("took {:.1f} s", elapsed));
    return fmt::format("500 programs in {:.2f} s", elapsed);
}

/// Runs `m` once by execute and `twin` by repeated step, then compares.
void compare_step_execute(Machine& m, Machine& twin, std::uint64_t budget, const std::string& label, Failures& f) {
    Events a(m);
    Events b(twin);
    const RunResult r = m.execute_blocking(budget);
    std::uint64_t steps = 0;
    while (twin.state() == S::Breakpoint && steps < budget) {
        twin.step();
        ++steps;
    }
    const bool finished = r.reason == RunResult::Reason::Halted || r.reason == RunResult::Reason::Fault;
    auto sa = m.snapshot();
    auto sb = twin.snapshot();
    const bool same_regs = sa.registers == sb.registers && sa.flags == sb.flags &&
                           sa.program_counter == sb.program_counter;
    const bool same_state = !finished || m.state() == twin.state();
    if (a.data() != b.data() || !same_regs || !same_state || r.instructions != steps) f.add(label);
}

std::string step_execute(Failures& f) {
    std::mt19937_64 rng(4242);
    constexpr std::uint64_t kBudget = 2'000;
    for (int i = 0; i < 200; ++i) {
        const auto p = oracle::random_tinyvn(rng, 64);
        auto m = preset("tinyvn");
        auto twin = preset("tinyvn");
        for (auto* x : {m.get(), &*twin}) {
            x->compile_and_load(p.source);
            x->feed_input("term0", std::vector<Word>(p.input.begin(), p.input.end()));
            x->reset();
        }
        compare_step_execute(*m, *twin, kBudget, fmt::format("tinyvn program {}", i), f);
    }
    for (int i = 0; i < 200; ++i) {
        const auto p = oracle::random_ram(rng);
        auto m = preset("ram");
        auto twin = preset("ram");
        for (auto* x : {m.get(), &*twin}) {
            x->compile_and_load(p.source);
            x->feed_input("in", std::vector<Word>(p.input.begin(), p.input.end()));
            x->reset();
        }
        compare_step_execute(*m, *twin, kBudget, fmt::format("ram program {}", i), f);
    }
    return "200 TinyVN and 200 RAM programs";
}

std::string connection_validation(Failures& f) {
    const std::set<std::pair<PluginKind, PluginKind>> allowed = {
        {PluginKind::Cpu, PluginKind::Memory},      {PluginKind::Device, PluginKind::Cpu},
        {PluginKind::Device, PluginKind::Memory},   {PluginKind::Device, PluginKind::Device},
        {PluginKind::Compiler, PluginKind::Memory},
    };
    const auto all_legal = [&](const ArchitectureConfig& c) {
        for (const auto& e : c.connections) {
            if (allowed.count({c.find(e.from)->kind, c.find(e.to)->kind}) == 0) return false;
        }
        return true;
    };

    std::mt19937_64 rng(99);
    std::size_t legal = 0;
    std::size_t illegal = 0;
    for (int i = 0; i < 1000; ++i) {
        for (bool want_legal : {true, false}) {
            const auto c = oracle::random_config(rng, want_legal);
            const bool expect_ok = all_legal(c);
            (expect_ok ? legal : illegal) += 1;
            if (validate(c).ok != expect_ok) {
                f.add(fmt::format("config {} expected {}", i, expect_ok ? "valid" : "rejected"));
            }
        }
    }

    // Every kind pair as the single extra edge of a minimal valid graph.
    const PluginKind kinds[] = {PluginKind::Compiler, PluginKind::Cpu, PluginKind::Memory, PluginKind::Device};
    for (PluginKind from : kinds) {
        for (PluginKind to : kinds) {
            ArchitectureConfig c;
            c.name = "pair";
            c.plugins = {{"cpu", "p-cpu", PluginKind::Cpu},
                         {"mem", "p-mem", PluginKind::Memory},
                         {"cc", "p-cc", PluginKind::Compiler},
                         {"dev", "p-dev", PluginKind::Device}};
            c.connections = {{"cpu", "mem", std::nullopt, std::nullopt}};
            // Singleton roles are reused; memories and devices get fresh instances.
            const auto instance = [&](PluginKind k, const std::string& suffix) -> std::string {
                if (k == PluginKind::Cpu && suffix == "_a") return "cpu";
                if (k == PluginKind::Compiler && suffix == "_a") return "cc";
                if (k == PluginKind::Cpu && from != to) return "cpu";
                if (k == PluginKind::Compiler && from != to) return "cc";
                const std::string id = fmt::format("{}{}", to_string(k), suffix);
                c.plugins.push_back({id, "p-" + id, k});
                return id;
            };
            const std::optional<Address> port =
                to == PluginKind::Cpu || to == PluginKind::Device ? std::optional<Address>(0) : std::nullopt;
            c.connections.push_back({instance(from, "_a"), instance(to, "_b"), port, std::nullopt});
            const bool expect_ok = allowed.count({from, to}) != 0;
            (expect_ok ? legal : illegal) += 1;
            if (validate(c).ok != expect_ok) {
                f.add(fmt::format("{} -> {} expected {}", to_string(from), to_string(to),
                                  expect_ok ? "valid" : "rejected"));
            }
        }
    }
    return fmt::format("{} legal and {} illegal configurations", legal, illegal);
}

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
    std::istringstream in;
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, in, out, err);
    return {code, out.str(), err.str()};
}

struct Scratch {
    Scratch() : dir(fs::temp_directory_path() / fmt::format("emu-acceptance-{}", ::getpid())) {
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(dir / name) << text;
        return (dir / name).string();
    }
    fs::path dir;
};

std::string golden_end_to_end(Failures& f) {
    Scratch tmp;
    const std::string store = tmp.dir.string();
    const std::string input = tmp.write("input.txt", "2 3\n");

    // Expected output from the reference interpreters over hand-encoded programs.
    std::array<std::uint8_t, 256> image{};
    const std::uint8_t vn_bytes[] = {0x07, 0, 0x02, 12, 0x07, 0, 0x03, 12, 0x08, 0, 0x00};
    std::copy(std::begin(vn_bytes), std::end(vn_bytes), image.begin());
    const auto vn = oracle::run_tinyvn(image, 0, {2, 3}, 1000);
    std::string vn_expected;
    for (auto v : vn.out) vn_expected += std::to_string(v) + "\n";

    const std::vector<oracle::RamIns> ram_prog = {
        {"READ", 'd', 1}, {"READ", 'd', 2}, {"LOAD", 'd', 1}, {"ADD", 'd', 2}, {"WRITE", 'd', 0}, {"HALT", ' ', 0}};
    const auto rm = oracle::run_ram(ram_prog, 0, {2, 3}, 1000);
    std::string ram_expected;
    for (auto v : rm.out) ram_expected += std::to_string(v) + "\n";

    if (vn_expected != "5\n" || ram_expected != "5\n") f.add("oracles disagree with the expected sum");

    // The terminal renders printable bytes as characters; 5 is not printable.
    const auto a = run_cli({"run", "--config", "tinyvn", "--store", store, "--input", input,
                            tmp.write("sum.vn", "IN 0\nSTORE x\nIN 0\nADD x\nOUT 0\nHALT\nx: DB 0\n")});
    if (a.code != cli::kOk || a.out != vn_expected) f.add(fmt::format("tinyvn sum printed '{}' exit {}", a.out, a.code));
    const auto b = run_cli({"run", "--config", "ram", "--store", store, "--input", input,
                            tmp.write("sum.ram", "READ 1\nREAD 2\nLOAD 1\nADD 2\nWRITE 0\nHALT\n")});
    if (b.code != cli::kOk || b.out != ram_expected) f.add(fmt::format("ram sum printed '{}' exit {}", b.out, b.code));

    const auto expect_code = [&](const char* what, const std::vector<std::string>& args, int code) {
        const auto r = run_cli(args);
        if (r.code != code) f.add(fmt::format("{}: exit {} instead of {}", what, r.code, code));
    };
    expect_code("compile", {"compile", "--config", "tinyvn", "--store", store, tmp.write("ok.vn", "LDI 5\nOUT 0\nHALT")},
                cli::kOk);
    expect_code("diagnostics", {"run", "--config", "tinyvn", "--store", store, tmp.write("bad.vn", "FLY 1")},
                cli::kDiagnostics);
    expect_code("unknown config", {"run", "--config", "nope", "--store", store, tmp.write("h.vn", "HALT")},
                cli::kUsage);
    expect_code("bad flag", {"run", "--bogus"}, cli::kUsage);
    expect_code("fault", {"run", "--config", "tinyvn", "--store", store, tmp.write("f.vn", "OUT 3\nHALT")},
                cli::kFault);
    expect_code("budget",
                {"run", "--config", "tinyvn", "--store", store, "--max-steps", "500", tmp.write("l.vn", "l: JMP l")},
                cli::kBudget);
    return "sum programs and exit codes 0-4";
}

std::string token_coverage(Failures& f) {
    const fs::path dir = fs::path(EMU_CORPUS_DIR) / "lexer";
    std::size_t files = 0;
    std::size_t errors = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream s;
        s << in.rdbuf();
        const std::string source = s.str();
        ++files;
        using Lexer = std::vector<Token> (*)(std::string_view);
        for (const auto& [name, lex] : {std::pair<const char*, Lexer>{"tinyvn", tinyvn::lex},
                                        std::pair<const char*, Lexer>{"ram", ram::lex}}) {
            std::string joined;
            std::size_t offset = 0;
            bool offsets_ok = true;
            for (const auto& t : lex(source)) {
                if (t.offset != offset) offsets_ok = false;
                offset += t.lexeme.size();
                joined += t.lexeme;
                if (t.category == TokenCategory::Error) ++errors;
            }
            if (joined != source || !offsets_ok) {
                f.add(fmt::format("{} lexer on {}", name, entry.path().filename().string()));
            }
        }
    }
    if (files < 50) f.add(fmt::format("corpus has only {} files", files));
    if (errors == 0) f.add("corpus exercises no error tokens");
    return fmt::format("{} files, {} error tokens", files, errors);
}

std::string roundtrip(Failures& f) {
    std::mt19937_64 rng(31337);
    for (int i = 0; i < 500; ++i) {
        const auto p = oracle::random_tinyvn(rng, 64);
        const auto first = tinyvn::compile_source(p.source);
        if (!first.success) {
            f.add(fmt::format("program {} failed to compile", i));
            continue;
        }
        std::vector<ImageCell> expected;
        for (std::size_t a = 0; a < p.length; ++a) expected.push_back({a, p.image[a]});
        if (first.image != expected) f.add(fmt::format("program {} assembled differently from the generator", i));

        ByteMemory mem;
        for (const auto& c : first.image) mem.context().write(c.address, std::vector<Cell>{c.value});
        const std::string text = tinyvn::disassemble_range(mem.context(), 0, p.length);
        const auto second = tinyvn::compile_source(text);
        if (!second.success || second.image != first.image) {
            f.add(fmt::format("program {} did not survive disassembly:\n{}", i, text));
        }
    }
    return "500 programs";
}

// -----------------------------------------------------------------------------
// Protocol
// -----------------------------------------------------------------------------

/// Replaces each distinct "req" with its order of first appearance.
json normalize(std::vector<json> transcript) {
    std::vector<json> seen;
    for (auto& m : transcript) {
        if (!m.contains("req")) continue;
        auto it = std::find(seen.begin(), seen.end(), m["req"]);
        if (it == seen.end()) it = seen.insert(seen.end(), m["req"]);
        m["req"] = fmt::format("#{}", it - seen.begin() + 1);
    }
    return transcript;
}

json protocol_session() {
    ServiceOptions opts;
    opts.port = 0;
    ControlService service(preset("tinyvn"), opts);
    service.start();
    std::vector<json> transcript;
    {
        testing_support::WsClient client("127.0.0.1", service.port());
        const auto record = [&](const json& m) { transcript.push_back({{"dir", "in"}, {"msg", m}}); };
        const auto say = [&](const json& m) { transcript.push_back({{"dir", "out"}, {"msg", m}}); client.send(m); };
        const auto until = [&](const std::function<bool(const json&)>& done) {
            while (auto m = client.receive(2000ms)) {
                record(*m);
                if (done(*m)) return;
            }
            throw std::runtime_error("protocol session timed out");
        };
        const auto reply_to = [](const std::string& req) {
            return [req](const json& m) { return m.value("req", json()) == req; };
        };

        until([](const json& m) { return m["t"] == "hello"; });
        say({{"t", "compile"}, {"source", "LDI 5\nOUT 0\nHALT\n"}, {"req", "c-81f2"}});
        until(reply_to("c-81f2"));
        say({{"t", "mem_read"}, {"mem", "mem0"}, {"addr", 0}, {"count", 6}, {"req", "m-03aa"}});
        until(reply_to("m-03aa"));
        say({{"t", "cmd"}, {"cmd", "pause"}, {"req", "p-9c11"}});
        until(reply_to("p-9c11"));
        say({{"t", "cmd"}, {"cmd", "execute"}, {"req", "x-5e07"}});
        until(reply_to("x-5e07"));
        until([](const json& m) { return m["t"] == "event" && m["kind"] == "state" && m["new"] == "stopped"; });
        say({{"t", "status"}, {"req", "s-7d40"}});
        until(reply_to("s-7d40"));
    }
    service.stop();
    return transcript;
}

/// Normalizes ids across the whole session so a request and its reply agree.
json normalize_transcript(json transcript) {
    std::vector<json> messages;
    for (const auto& e : transcript) messages.push_back(e["msg"]);
    const json normalized = normalize(messages);
    for (std::size_t i = 0; i < transcript.size(); ++i) transcript[i]["msg"] = normalized[i];
    return transcript;
}

const fs::path kGolden = fs::path(EMU_GOLDEN_DIR) / "protocol_session.json";

std::string protocol_conformance(Failures& f) {
    std::ifstream in(kGolden);
    if (!in) {
        f.add("missing " + kGolden.string());
        return "";
    }
    const json golden = json::parse(in);
    const json actual = normalize_transcript(protocol_session());
    if (actual.size() != golden.size()) f.add(fmt::format("{} messages, golden has {}", actual.size(), golden.size()));
    for (std::size_t i = 0; i < std::min(actual.size(), golden.size()); ++i) {
        if (actual[i] != golden[i]) f.add(fmt::format("message {}: {} vs golden {}", i, actual[i].dump(), golden[i].dump()));
    }
    return fmt::format("{} messages", golden.size());
}

std::string pause_latency(Failures& f) {
    // Instruction boundaries of the loop below: 0, 2, 4.
    const std::set<Word> boundaries = {0, 2, 4};
    double worst_ms = 0;

    MachineRunner runner(preset("tinyvn"));
    for (int trial = 0; trial < 10; ++trial) {
        runner
            .call([](Machine& m) {
                if (m.state() != S::Breakpoint) m.reset();
                m.compile_and_load("l: LDI 1\nADD 9\nJMP l");
                m.reset();
                m.execute();
            })
            .get();
        std::this_thread::sleep_for(20ms);
        const auto t0 = Clock::now();
        const auto snap = runner
                              .call([](Machine& m) {
                                  m.pause();
                                  return m.snapshot();
                              })
                              .get();
        const double ms = seconds_since(t0) * 1000;
        worst_ms = std::max(worst_ms, ms);
        if (snap.state != S::Breakpoint) f.add(fmt::format("trial {} ended in {}", trial, to_string(snap.state)));
        if (boundaries.count(snap.program_counter) == 0) f.add(fmt::format("pc {} mid-instruction", snap.program_counter));
    }

    // Same through the socket service.
    ServiceOptions opts;
    opts.port = 0;
    ControlService service(preset("tinyvn"), opts);
    service.start();
    {
        testing_support::WsClient client("127.0.0.1", service.port());
        client.receive();
        client.send({{"t", "compile"}, {"source", "l: LDI 1\nADD 9\nJMP l"}, {"req", 1}});
        client.until_reply(1);
        client.send({{"t", "cmd"}, {"cmd", "execute"}, {"req", 2}});
        client.until_reply(2);
        std::this_thread::sleep_for(50ms);
        const auto t0 = Clock::now();
        client.send({{"t", "cmd"}, {"cmd", "pause"}, {"req", 3}});
        const auto reply = client.until_reply(3);
        const double ms = seconds_since(t0) * 1000;
        worst_ms = std::max(worst_ms, ms);
        if (!reply || (*reply)["state"] != "breakpoint") f.add("service pause did not reach breakpoint");
        client.send({{"t", "status"}, {"req", 4}});
        const auto status = client.until_reply(4);
        if (!status || boundaries.count((*status)["pc"].get<Word>()) == 0) f.add("service snapshot mid-instruction");
    }
    service.stop();
    if (worst_ms > 100.0) f.add(fmt::format("worst pause {:.1f} ms", worst_ms));
    return fmt::format("worst {:.2f} ms", worst_ms);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1 && std::string(argv[1]) == "--write-golden") {
        fs::create_directories(kGolden.parent_path());
        std::ofstream(kGolden) << normalize_transcript(protocol_session()).dump(2) << '\n';
        std::cout << "wrote " << kGolden.string() << '\n';
        return 0;
    }

    const std::vector<std::pair<const char*, std::function<std::string(Failures&)>>> criteria = {
        {"state-machine conformance", state_machine},
        {"tinyvn oracle equivalence", tinyvn_oracle},
        {"ram oracle equivalence", ram_oracle},
        {"step/execute equivalence", step_execute},
        {"connection validation", connection_validation},
        {"golden end-to-end", golden_end_to_end},
        {"token coverage", token_coverage},
        {"assembler/disassembler roundtrip", roundtrip},
        {"protocol conformance", protocol_conformance},
        {"pause latency", pause_latency},
    };

    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Failures f;
        std::string detail;
        try {
            detail = check(f);
        } catch (const std::exception& e) {
            f.add(std::string("exception: ") + e.what());
        }
        if (f.ok()) {
            std::cout << "PASS " << name << " (" << detail << ")\n";
        } else {
            ++failed;
            std::cout << "FAIL " << name << ": " << f.summary() << '\n';
        }
        std::cout.flush();
    }
    std::cout << (failed == 0 ? "all criteria passed" : fmt::format("{} criteria failed", failed)) << '\n';
    return failed == 0 ? 0 : 1;
}
