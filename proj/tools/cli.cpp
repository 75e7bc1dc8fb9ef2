#include "cli.hpp"

#include "emu/errors.hpp"
#include "emu/registry.hpp"
#include "emu/service.hpp"
#include "emu/settings.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace emu::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigOptions {
    std::string name;
    std::string file;
    std::string store;

    std::filesystem::path store_dir() const {
        if (!store.empty()) return store;
        if (const char* env = std::getenv("EMU_CONFIG_STORE"); env != nullptr && *env != '\0') return env;
        return "configs";
    }
};

void add_config_options(CLI::App& cmd, ConfigOptions& opts) {
    auto* name = cmd.add_option("--config", opts.name, "Configuration name (store entry or builtin preset)");
    auto* file = cmd.add_option("--config-file", opts.file, "Configuration JSON file");
    name->excludes(file);
    cmd.add_option("--store", opts.store, "Configuration store directory");
}

Address parse_unsigned_text(std::string_view text) {
    const auto v = parse_unsigned(text);
    if (!v) throw UsageError("bad number '" + std::string(text) + "'");
    return *v;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::unique_ptr<Machine> build_machine(const ConfigOptions& opts) {
    ArchitectureConfig config;
    try {
        if (!opts.file.empty()) {
            config = parse_config(read_file(opts.file));
        } else if (!opts.name.empty()) {
            config = resolve_config(opts.name, opts.store_dir());
        } else {
            throw UsageError("one of --config or --config-file is required");
        }
        return Machine::build(config);
    } catch (const UsageError&) {
        throw;
    } catch (const EmuError& e) {
        throw UsageError(e.what());
    }
}

std::string hex(Word value, int digits) {
    return fmt::format("0x{:0{}X}", value, digits);
}

int address_digits(const Machine& m) {
    for (const auto& r : m.snapshot().registers) {
        if (r.name == "PC") return r.width_bits <= 16 ? (r.width_bits + 3) / 4 : 2;
    }
    return 2;
}

void print_diagnostics(const CompileOutput& out, std::ostream& err) {
    for (const auto& d : out.diagnostics) {
        err << d.line << ':' << d.column << ": " << to_string(d.severity) << ": " << d.message << '\n';
    }
}

/// Compiles and reports. Returns false after printing errors.
bool compile_into(Machine& m, const std::string& source_path, std::ostream& err, CompileOutput* result = nullptr) {
    const CompileOutput out = m.compile_and_load(read_file(source_path));
    print_diagnostics(out, err);
    if (result != nullptr) *result = out;
    if (!out.success) return false;
    m.reset();
    return true;
}

std::pair<Address, Address> parse_range(const std::string& text) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) throw UsageError("range must look like A..B");
    const Address a = parse_unsigned_text(text.substr(0, dots));
    const Address b = parse_unsigned_text(text.substr(dots + 2));
    if (b < a) throw UsageError("range end before start");
    return {a, b};
}

std::string default_memory(Machine& m, const std::string& requested) {
    if (!requested.empty()) return requested;
    const auto ids = m.memory_ids();
    if (ids.empty()) throw UsageError("configuration has no memory");
    return ids.front();
}

void dump_memory(Machine& m, const std::string& mem_id, Address a, Address b, std::ostream& out) {
    MemoryContext& mem = m.memory(mem_id);
    const auto values = mem.read(a, b - a + 1);
    for (std::size_t i = 0; i < values.size(); ++i) out << fmt::format("{:02X} {:02X}\n", a + i, values[i]);
}

void feed_first_input(Machine& m, std::span<const Word> values) {
    const auto ids = m.input_device_ids();
    if (ids.empty()) throw UsageError("configuration has no input device");
    m.feed_input(ids.front(), values);
}

// -----------------------------------------------------------------------------
// Subcommands
// -----------------------------------------------------------------------------

int cmd_compile(const ConfigOptions& opts, const std::string& source, const std::string& out_path,
                std::ostream& out, std::ostream& err) {
    auto m = build_machine(opts);
    CompileOutput result;
    if (!compile_into(*m, source, err, &result)) return kDiagnostics;
    out << result.image.size() << ' ' << m->compiler().cell_unit() << ", start "
        << hex(result.start_address, address_digits(*m)) << '\n';
    if (!out_path.empty()) {
        std::ofstream file(out_path, std::ios::trunc);
        if (!file) throw UsageError("cannot write " + out_path);
        for (const auto& cell : result.image) file << fmt::format("{:02X} {:02X}\n", cell.address, cell.value);
    }
    return kOk;
}

struct RunOptions {
    std::string source;
    std::string input;
    std::uint64_t max_steps = kHeadlessStepBudget;
    std::string dump;
    std::string memory;
};

int cmd_run(const ConfigOptions& opts, const RunOptions& run, std::ostream& out, std::ostream& err) {
    auto m = build_machine(opts);
    if (!compile_into(*m, run.source, err)) return kDiagnostics;
    if (!run.input.empty()) {
        const auto values = parse_values(read_file(run.input));
        try {
            feed_first_input(*m, values);
        } catch (const EmuError& e) {
            throw UsageError(e.what());
        }
    }

    OutputRenderer renderer;
    auto sub = m->subscribe([&](const EmuEvent& e) {
        if (const auto* o = std::get_if<DeviceOutput>(&e)) {
            auto* host = m->plugin_as<HostOutput>(o->device);
            renderer.add(*o, host != nullptr && host->signed_values());
        } else if (const auto* w = std::get_if<DeviceWarning>(&e)) {
            err << "warning: " << w->device << ": " << w->message << '\n';
        }
    });
    const RunResult result = m->execute_blocking(run.max_steps);
    out << renderer.text();

    if (!run.dump.empty()) {
        const auto [a, b] = parse_range(run.dump);
        dump_memory(*m, default_memory(*m, run.memory), a, b, out);
    }

    switch (result.reason) {
        case RunResult::Reason::Halted: return kOk;
        case RunResult::Reason::Fault:
            err << "fault: " << result.message << '\n';
            return kFault;
        case RunResult::Reason::BudgetExhausted:
            err << "step budget of " << run.max_steps << " exhausted\n";
            return kBudget;
        default: return kFault;
    }
}

int cmd_debug(const ConfigOptions& opts, const std::string& source, std::istream& in, std::ostream& out,
              std::ostream& err) {
    auto m = build_machine(opts);
    if (!compile_into(*m, source, err)) return kDiagnostics;

    auto sub = m->subscribe([&](const EmuEvent& e) {
        if (const auto* o = std::get_if<DeviceOutput>(&e)) {
            out << "out " << o->device << ": " << o->value << '\n';
        } else if (const auto* b = std::get_if<BreakpointHit>(&e)) {
            out << "breakpoint hit at " << format_address(*m, b->address) << '\n';
        } else if (const auto* h = std::get_if<Halted>(&e)) {
            out << "halted at " << format_address(*m, h->pc) << '\n';
        } else if (const auto* w = std::get_if<DeviceWarning>(&e)) {
            out << "warning: " << w->device << ": " << w->message << '\n';
        } else if (const auto* s = std::get_if<StateChanged>(&e)) {
            if (s->reason.rfind("fault: ", 0) == 0) out << s->reason << '\n';
        }
    });

    out << status_line(*m) << '\n';
    std::string line;
    while (out << "> " << std::flush, std::getline(in, line)) {
        std::istringstream words(line);
        std::string cmd;
        if (!(words >> cmd)) continue;
        std::vector<std::string> args;
        for (std::string w; words >> w;) args.push_back(w);
        const auto arg = [&](std::size_t i) -> Address {
            if (i >= args.size()) throw UsageError(cmd + ": missing address");
            return parse_unsigned_text(args[i]);
        };

        try {
            if (cmd == "q") {
                break;
            } else if (cmd == "s") {
                m->step();
            } else if (cmd == "c") {
                m->execute();
                const RunResult r = m->run(kHeadlessStepBudget);
                if (r.reason == RunResult::Reason::BudgetExhausted) {
                    out << "step budget exhausted, pausing\n";
                    m->pause();
                }
            } else if (cmd == "r") {
                m->reset();
            } else if (cmd == "b") {
                m->add_breakpoint(arg(0));
                out << "breakpoint set at " << format_address(*m, arg(0)) << '\n';
                continue;
            } else if (cmd == "d") {
                m->remove_breakpoint(arg(0));
                out << "breakpoint removed at " << format_address(*m, arg(0)) << '\n';
                continue;
            } else if (cmd == "x") {
                const Address a = arg(0);
                const Address b = args.size() > 1 ? arg(1) : a;
                if (b < a) throw UsageError("x: end before start");
                dump_memory(*m, default_memory(*m, ""), a, b, out);
                continue;
            } else if (cmd == "i") {
                std::string rest;
                for (const auto& a : args) rest += a + ' ';
                const auto values = parse_values(rest);
                feed_first_input(*m, values);
            } else if (cmd != "st") {
                out << "unknown command '" << cmd << "' (s c b d r x st i q)\n";
                continue;
            }
            out << status_line(*m) << '\n';
        } catch (const IllegalCommand& e) {
            out << "illegal command: " << e.what() << '\n';
        } catch (const std::exception& e) {
            out << "error: " << e.what() << '\n';
        }
    }
    return kOk;
}

int cmd_plugins(std::ostream& out) {
    for (const auto& meta : builtin_registry().entries()) {
        out << meta.id << "  " << to_string(meta.kind) << "  " << meta.version << '\n';
    }
    return kOk;
}

int cmd_configs(const ConfigOptions& opts, std::ostream& out) {
    try {
        for (const auto& name : list_configs(opts.store_dir())) out << name << '\n';
    } catch (const IoError& e) {
        throw UsageError(e.what());
    }
    return kOk;
}

int cmd_serve(ConfigOptions opts, ServiceOptions service_opts, std::ostream& out) {
    if (opts.name.empty() && opts.file.empty()) opts.name = "tinyvn";
    service_opts.config_store = opts.store_dir();

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    // Blocked before any thread starts so only sigwait() below sees them.
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    ControlService service(build_machine(opts), service_opts);
    try {
        service.start();
    } catch (const EmuError& e) {
        throw UsageError(e.what());
    }
    out << "listening on ws://" << service_opts.address << ':' << service.port() << std::endl;
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
    return kOk;
}

}  // namespace

// -----------------------------------------------------------------------------
// Helpers
// -----------------------------------------------------------------------------

void OutputRenderer::line(const std::string& s) {
    if (!text_.empty() && text_.back() != '\n') text_ += '\n';
    text_ += s;
    text_ += '\n';
}

void OutputRenderer::add(const DeviceOutput& output, bool signed_values) {
    const Word v = output.value;
    if (signed_values) {
        line(std::to_string(static_cast<std::int64_t>(v)));
    } else if ((v >= 32 && v <= 126) || v == '\n' || v == '\t') {
        text_ += static_cast<char>(v);
    } else {
        line(std::to_string(v));
    }
}

std::string OutputRenderer::text() const {
    if (!text_.empty() && text_.back() != '\n') return text_ + '\n';
    return text_;
}

std::vector<Word> parse_values(std::string_view text) {
    std::vector<Word> values;
    std::size_t i = 0;
    while (i < text.size()) {
        if (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == ',') {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != ',') ++j;
        const std::string_view word = text.substr(i, j - i);
        std::int64_t value = 0;
        const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
        if (ec != std::errc() || ptr != word.data() + word.size()) {
            throw UsageError("bad input value '" + std::string(word) + "'");
        }
        values.push_back(static_cast<Word>(value));
        i = j;
    }
    return values;
}

std::string format_address(const Machine& machine, Address address) {
    return hex(address, address_digits(machine));
}

std::string status_line(const Machine& machine) {
    const CpuStatusSnapshot s = machine.snapshot();
    std::string line = fmt::format("state={} pc={}", to_string(s.state), format_address(machine, s.program_counter));
    for (const auto& r : s.registers) {
        if (r.name == "PC") continue;
        line += fmt::format(" {}={}", r.name, hex(r.value, r.width_bits <= 16 ? (r.width_bits + 3) / 4 : 1));
    }
    for (const auto& f : s.flags) line += fmt::format(" {}={}", f.name, f.value ? 1 : 0);
    return line;
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Plug-in based emulation platform", "emu"};
    app.require_subcommand(1);

    ConfigOptions config;
    std::string source;
    std::string out_path;
    RunOptions run_opts;
    ServiceOptions service_opts;
    std::string static_dir;

    auto* compile = app.add_subcommand("compile", "Compile a source file and report the image");
    add_config_options(*compile, config);
    compile->add_option("source", source, "Source file")->required();
    compile->add_option("--out", out_path, "Write the image as `ADDR VALUE` hex lines");

    auto* runc = app.add_subcommand("run", "Compile, load and execute until halt");
    add_config_options(*runc, config);
    runc->add_option("source", run_opts.source, "Source file")->required();
    runc->add_option("--input", run_opts.input, "File of integers fed to the first input device");
    runc->add_option("--max-steps", run_opts.max_steps, "Instruction budget")->check(CLI::PositiveNumber);
    runc->add_option("--dump-memory", run_opts.dump, "Print memory range A..B after the run");
    runc->add_option("--memory", run_opts.memory, "Memory instance for --dump-memory");

    auto* debug = app.add_subcommand("debug", "Interactive debugger");
    add_config_options(*debug, config);
    debug->add_option("source", source, "Source file")->required();

    auto* plugins = app.add_subcommand("plugins", "List registered plug-ins");

    auto* configs = app.add_subcommand("configs", "List stored configurations");
    configs->add_option("--store", config.store, "Configuration store directory");

    auto* serve = app.add_subcommand("serve", "Run the WebSocket control service");
    add_config_options(*serve, config);
    serve->add_option("--port", service_opts.port, "TCP port");
    serve->add_option("--address", service_opts.address, "Bind address");
    serve->add_option("--static", static_dir, "Serve files from this directory over HTTP");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*compile) return cmd_compile(config, source, out_path, out, err);
        if (*runc) return cmd_run(config, run_opts, out, err);
        if (*debug) return cmd_debug(config, source, in, out, err);
        if (*plugins) return cmd_plugins(out);
        if (*configs) return cmd_configs(config, out);
        if (*serve) {
            if (!static_dir.empty()) service_opts.static_dir = static_dir;
            return cmd_serve(config, service_opts, out);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

}  // namespace emu::cli
