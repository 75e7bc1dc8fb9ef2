#include "emu/machine.hpp"

#include "emu/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <utility>

namespace emu {

std::string_view to_string(ControlCommand command) {
    switch (command) {
        case ControlCommand::Reset: return "reset";
        case ControlCommand::Step: return "step";
        case ControlCommand::Execute: return "execute";
        case ControlCommand::Pause: return "pause";
        case ControlCommand::Stop: return "stop";
    }
    return "?";
}

std::optional<ControlCommand> parse_command(std::string_view text) {
    for (auto c : {ControlCommand::Reset, ControlCommand::Step, ControlCommand::Execute, ControlCommand::Pause,
                   ControlCommand::Stop}) {
        if (to_string(c) == text) return c;
    }
    return std::nullopt;
}

std::optional<CpuRunState> transition(CpuRunState state, ControlCommand command,
                                      std::optional<StepOutcome::Kind> step_outcome) {
    using S = CpuRunState;
    if (command == ControlCommand::Reset) return S::Breakpoint;
    switch (state) {
        case S::Breakpoint:
            switch (command) {
                case ControlCommand::Step:
                    if (step_outcome == StepOutcome::Kind::Halted || step_outcome == StepOutcome::Kind::Fault) {
                        return S::Stopped;
                    }
                    return S::Breakpoint;
                case ControlCommand::Execute: return S::Running;
                case ControlCommand::Stop: return S::Stopped;
                default: return std::nullopt;
            }
        case S::Running:
            switch (command) {
                case ControlCommand::Pause: return S::Breakpoint;
                case ControlCommand::Stop: return S::Stopped;
                default: return std::nullopt;
            }
        case S::Stopped:
        case S::Reset: return std::nullopt;
    }
    return std::nullopt;
}

// -----------------------------------------------------------------------------
// Event bus
// -----------------------------------------------------------------------------

namespace detail {

struct EventBus {
    std::vector<std::pair<std::uint64_t, std::shared_ptr<EventSink>>> sinks;
    std::uint64_t next_id = 1;
};

}  // namespace detail

Subscription::Subscription(Subscription&& other) noexcept
    : bus_(std::move(other.bus_)), id_(std::exchange(other.id_, 0)) {}

Subscription& Subscription::operator=(Subscription&& other) noexcept {
    if (this != &other) {
        reset();
        bus_ = std::move(other.bus_);
        id_ = std::exchange(other.id_, 0);
    }
    return *this;
}

void Subscription::reset() {
    if (auto bus = bus_.lock()) {
        std::erase_if(bus->sinks, [&](const auto& entry) { return entry.first == id_; });
    }
    bus_.reset();
    id_ = 0;
}

// -----------------------------------------------------------------------------
// Build
// -----------------------------------------------------------------------------

class Machine::HostAdapter final : public DeviceHost {
public:
    HostAdapter(Machine& machine, std::string device) : machine_(machine), device_(std::move(device)) {}

    void device_output(std::string_view context_id, Word value) override {
        machine_.emit(DeviceOutput{device_, std::string(context_id), value});
    }
    void device_warning(std::string_view message) override {
        machine_.emit(DeviceWarning{device_, std::string(message)});
    }

private:
    Machine& machine_;
    std::string device_;
};

Machine::Machine() : bus_(std::make_shared<detail::EventBus>()) {}

Machine::~Machine() = default;

std::unique_ptr<Machine> Machine::build(const ArchitectureConfig& config, const PluginRegistry& registry) {
    const ValidationReport report = validate(config);
    if (!report.ok) {
        std::string message = "invalid configuration '" + config.name + "':";
        for (const auto& v : report.violations) message += " [" + v.rule_id + "] " + v.message + ";";
        throw WiringError(message);
    }

    std::unique_ptr<Machine> m(new Machine());
    m->config_ = config;

    for (const auto& inst : config.plugins) {
        const PluginMetadata* meta = registry.find(inst.plugin_id);
        if (meta == nullptr) throw UnknownPlugin(inst.plugin_id);
        if (meta->kind != inst.kind) {
            throw WiringError(fmt::format("{}: plug-in {} is a {}, configured as {}", inst.instance_id, inst.plugin_id,
                                          to_string(meta->kind), to_string(inst.kind)));
        }
        std::unique_ptr<Plugin> plugin = registry.create(inst.plugin_id);
        if (auto it = config.settings.find(inst.instance_id); it != config.settings.end()) {
            for (const auto& [key, value] : it->second) {
                try {
                    plugin->apply_setting(key, value);
                } catch (const SettingsError&) {
                    throw;
                } catch (const std::exception& e) {
                    throw SettingsError(inst.instance_id + ": " + e.what());
                }
            }
        }
        if (inst.kind == PluginKind::Cpu) m->cpu_ = static_cast<CpuPlugin*>(plugin.get());
        if (inst.kind == PluginKind::Compiler) m->compiler_ = static_cast<CompilerPlugin*>(plugin.get());
        if (inst.kind == PluginKind::Memory) {
            Machine* self = m.get();
            std::string id = inst.instance_id;
            static_cast<MemoryPlugin*>(plugin.get())
                ->context()
                .add_listener([self, id](Address address, std::span<const Cell> values) {
                    self->emit(MemoryWritten{id, address, values.size()});
                });
        }
        if (inst.kind == PluginKind::Device) {
            m->hosts_.push_back(std::make_unique<HostAdapter>(*m, inst.instance_id));
            static_cast<DevicePlugin*>(plugin.get())->set_host(m->hosts_.back().get());
        }
        m->plugins_.emplace_back(inst.instance_id, std::move(plugin));
    }

    for (const auto& connection : config.connections) m->wire(connection);
    m->cpu_->check_wiring();

    for (auto& [id, plugin] : m->plugins_) plugin->seal();
    m->reset();
    return m;
}

void Machine::wire(const Connection& c) {
    Plugin& from = plugin(c.from);
    Plugin& to = plugin(c.to);
    const std::string edge = c.from + " -> " + c.to;
    const auto kind_from = from.metadata().kind;
    const auto kind_to = to.metadata().kind;

    try {
        if (kind_to == PluginKind::Memory) {
            MemoryContext& mem = static_cast<MemoryPlugin&>(to).context_for(kind_from);
            if (kind_from == PluginKind::Cpu) {
                static_cast<CpuPlugin&>(from).connect_memory(mem);
            } else if (kind_from == PluginKind::Compiler) {
                compile_target_ = &mem;
            } else {
                static_cast<DevicePlugin&>(from).connect_memory(mem);
            }
        } else if (kind_to == PluginKind::Cpu) {
            auto& device = static_cast<DevicePlugin&>(from);
            auto& cpu = static_cast<CpuPlugin&>(to);
            cpu.context().attach_device(*c.port, device.context(c.context_id.value_or("")));
            device.connect_cpu(cpu.context());
        } else {
            // Device <-> Device: both sides receive the other's context.
            auto& source = static_cast<DevicePlugin&>(from);
            auto& host = static_cast<DevicePlugin&>(to);
            const std::string source_ctx = c.context_id.value_or("");
            host.attach_device(source.context(source_ctx), c.port);
            source.attach_device(host.context_for_slot(c.port), source.slot_for_context(source_ctx));
        }
    } catch (const WiringError& e) {
        throw WiringError(edge + ": " + e.what());
    } catch (const EmuError& e) {
        throw WiringError(edge + ": " + e.what());
    }
}

// -----------------------------------------------------------------------------
// Control
// -----------------------------------------------------------------------------

void Machine::emit(const EmuEvent& event) {
    if (bus_->sinks.empty()) return;
    auto sinks = bus_->sinks;  // sinks may unsubscribe while being called
    for (const auto& [id, sink] : sinks) (*sink)(event);
}

Subscription Machine::subscribe(EventSink sink) {
    const std::uint64_t id = bus_->next_id++;
    bus_->sinks.emplace_back(id, std::make_shared<EventSink>(std::move(sink)));
    return Subscription(bus_, id);
}

void Machine::set_state(CpuRunState next, std::string reason) {
    const CpuRunState old = state_;
    state_ = next;
    emit(StateChanged{old, next, std::move(reason)});
}

void Machine::illegal(ControlCommand command) const {
    throw IllegalCommand(fmt::format("{} is not allowed in state {}", to_string(command), to_string(state_)));
}

void Machine::reset() {
    cpu_->reset(compiler_->has_program() ? compiler_->start_address() : 0);
    resuming_ = false;
    set_state(CpuRunState::Breakpoint, "reset");
}

StepOutcome Machine::step() {
    if (!transition(state_, ControlCommand::Step)) illegal(ControlCommand::Step);
    const Address pc = cpu_->program_counter();
    StepOutcome outcome = cpu_->step();
    if (outcome.kind == StepOutcome::Kind::Halted) emit(Halted{pc});
    const CpuRunState next = *transition(state_, ControlCommand::Step, outcome.kind);
    set_state(next, outcome.kind == StepOutcome::Kind::Fault ? "fault: " + outcome.message
                                                                : std::string(to_string(outcome.kind)));
    return outcome;
}

void Machine::execute() {
    if (!transition(state_, ControlCommand::Execute)) illegal(ControlCommand::Execute);
    resuming_ = true;
    set_state(CpuRunState::Running, "execute");
}

void Machine::pause() {
    if (!transition(state_, ControlCommand::Pause)) illegal(ControlCommand::Pause);
    set_state(CpuRunState::Breakpoint, "pause");
}

void Machine::stop() {
    if (!transition(state_, ControlCommand::Stop)) illegal(ControlCommand::Stop);
    set_state(CpuRunState::Stopped, "stop");
}

CpuRunState Machine::apply(ControlCommand command) {
    switch (command) {
        case ControlCommand::Reset: reset(); break;
        case ControlCommand::Step: step(); break;
        case ControlCommand::Execute: execute(); break;
        case ControlCommand::Pause: pause(); break;
        case ControlCommand::Stop: stop(); break;
    }
    return state_;
}

RunResult Machine::run(std::uint64_t max_instructions, const std::function<bool()>& yield) {
    RunResult result;
    if (state_ != CpuRunState::Running) return result;

    while (true) {
        if (max_instructions != 0 && result.instructions >= max_instructions) {
            result.reason = RunResult::Reason::BudgetExhausted;
            return result;
        }
        if (yield && yield()) {
            result.reason = RunResult::Reason::Yielded;
            return result;
        }
        const Address pc = cpu_->program_counter();
        // The instruction a run resumes from is not re-trapped.
        if (!resuming_ && breakpoints_.count(pc) != 0) {
            emit(BreakpointHit{pc});
            set_state(CpuRunState::Breakpoint, "breakpoint");
            result.reason = RunResult::Reason::Breakpoint;
            return result;
        }
        resuming_ = false;

        const StepOutcome outcome = cpu_->step();
        ++result.instructions;
        if (outcome.kind == StepOutcome::Kind::Halted) {
            emit(Halted{pc});
            set_state(CpuRunState::Stopped, "halted");
            result.reason = RunResult::Reason::Halted;
            return result;
        }
        if (outcome.kind == StepOutcome::Kind::Fault) {
            set_state(CpuRunState::Stopped, "fault: " + outcome.message);
            result.reason = RunResult::Reason::Fault;
            result.message = outcome.message;
            return result;
        }
    }
}

RunResult Machine::execute_blocking(std::uint64_t max_instructions) {
    execute();
    return run(max_instructions);
}

CompileOutput Machine::compile_and_load(std::string_view source) {
    if (state_ == CpuRunState::Running) throw IllegalCommand("compile is not allowed in state running");
    return compiler_->compile(source, compile_target_);
}

std::vector<Token> Machine::tokens(std::string_view source) const {
    return compiler_->lex(source);
}

CpuStatusSnapshot Machine::snapshot() const {
    CpuStatusSnapshot s = cpu_->status();
    s.state = state_;
    return s;
}

Disassembly Machine::disassemble(Address address) const {
    return cpu_->disassemble(address);
}

// -----------------------------------------------------------------------------
// Host access
// -----------------------------------------------------------------------------

Plugin& Machine::plugin(std::string_view instance_id) {
    for (auto& [id, plugin] : plugins_) {
        if (id == instance_id) return *plugin;
    }
    throw NotFound("no plug-in instance '" + std::string(instance_id) + "'");
}

std::vector<std::string> Machine::memory_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, plugin] : plugins_) {
        if (plugin->metadata().kind == PluginKind::Memory) out.push_back(id);
    }
    return out;
}

std::vector<std::string> Machine::device_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, plugin] : plugins_) {
        if (plugin->metadata().kind == PluginKind::Device) out.push_back(id);
    }
    return out;
}

MemoryContext& Machine::memory(std::string_view instance_id) {
    auto* mem = dynamic_cast<MemoryPlugin*>(&plugin(instance_id));
    if (mem == nullptr) throw NotFound("'" + std::string(instance_id) + "' is not a memory");
    return mem->context();
}

void Machine::feed_input(std::string_view device_id, std::span<const Word> values) {
    auto* input = dynamic_cast<HostInput*>(&plugin(device_id));
    if (input == nullptr) throw NotFound("'" + std::string(device_id) + "' takes no host input");
    input->feed(values);
}

std::vector<std::string> Machine::output_device_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, plugin] : plugins_) {
        if (dynamic_cast<const HostOutput*>(plugin.get()) != nullptr) out.push_back(id);
    }
    return out;
}

std::vector<std::string> Machine::input_device_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, plugin] : plugins_) {
        if (dynamic_cast<const HostInput*>(plugin.get()) != nullptr) out.push_back(id);
    }
    return out;
}

}  // namespace emu
