#pragma once

/**
 * @file
 * @brief A live virtual architecture: wiring plus the CPU work-flow cycle.
 *
 * Run states and commands:
 *
 *                 Reset        Step          Execute   Pause       Stop
 *   Breakpoint    Breakpoint   Breakpoint*   Running   illegal     Stopped
 *   Running       Breakpoint   illegal       illegal   Breakpoint  Stopped
 *   Stopped       Breakpoint   illegal       illegal   illegal     illegal
 *
 *   * Stopped when the stepped instruction halts or faults.
 *
 * While Running, a halt or fault moves to Stopped and reaching a breakpoint
 * address moves to Breakpoint before that instruction executes.
 *
 * A Machine is single-threaded. MachineRunner (runner.hpp) wraps one in a
 * command queue for concurrent front ends.
 */

#include "emu/config.hpp"
#include "emu/contracts.hpp"
#include "emu/registry.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace emu {

enum class ControlCommand { Reset, Step, Execute, Pause, Stop };

std::string_view to_string(ControlCommand command);
std::optional<ControlCommand> parse_command(std::string_view text);

/// Pure transition table. `step_outcome` only matters for Step. nullopt means illegal.
std::optional<CpuRunState> transition(CpuRunState state, ControlCommand command,
                                      std::optional<StepOutcome::Kind> step_outcome = std::nullopt);

// -----------------------------------------------------------------------------
// Events
// -----------------------------------------------------------------------------

struct StateChanged {
    CpuRunState old_state;
    CpuRunState new_state;
    std::string reason;
    bool operator==(const StateChanged&) const = default;
};

struct MemoryWritten {
    std::string memory;
    Address address;
    std::uint64_t count;
    bool operator==(const MemoryWritten&) const = default;
};

struct DeviceOutput {
    std::string device;
    std::string context_id;
    Word value;
    bool operator==(const DeviceOutput&) const = default;
};

struct Halted {
    Address pc;
    bool operator==(const Halted&) const = default;
};

struct BreakpointHit {
    Address address;
    bool operator==(const BreakpointHit&) const = default;
};

struct DeviceWarning {
    std::string device;
    std::string message;
    bool operator==(const DeviceWarning&) const = default;
};

using EmuEvent = std::variant<StateChanged, MemoryWritten, DeviceOutput, Halted, BreakpointHit, DeviceWarning>;
using EventSink = std::function<void(const EmuEvent&)>;

namespace detail {
struct EventBus;
}

/// Unsubscribes on destruction.
class Subscription {
public:
    Subscription() = default;
    Subscription(std::weak_ptr<detail::EventBus> bus, std::uint64_t id) : bus_(std::move(bus)), id_(id) {}
    Subscription(Subscription&& other) noexcept;
    Subscription& operator=(Subscription&& other) noexcept;
    ~Subscription() { reset(); }

    void reset();

private:
    std::weak_ptr<detail::EventBus> bus_;
    std::uint64_t id_ = 0;
};

// -----------------------------------------------------------------------------
// Machine
// -----------------------------------------------------------------------------

struct RunResult {
    enum class Reason { Halted, Fault, Breakpoint, Yielded, BudgetExhausted, NotRunning };

    Reason reason = Reason::NotRunning;
    std::uint64_t instructions = 0;
    std::string message;
};

/// Default instruction budget for headless execution.
constexpr std::uint64_t kHeadlessStepBudget = 10'000'000;

class Machine {
public:
    /// Validates, instantiates, applies settings, exchanges contexts, seals and resets.
    /// Throws UnknownPlugin, WiringError, SettingsError.
    static std::unique_ptr<Machine> build(const ArchitectureConfig& config,
                                          const PluginRegistry& registry = builtin_registry());

    ~Machine();
    Machine(const Machine&) = delete;
    Machine& operator=(const Machine&) = delete;

    const ArchitectureConfig& config() const noexcept { return config_; }
    CpuRunState state() const noexcept { return state_; }

    // Control commands; illegal ones throw IllegalCommand.
    void reset();
    StepOutcome step();
    /// Breakpoint -> Running. Instructions execute in run().
    void execute();
    void pause();
    void stop();
    /// Dispatches to the command above and returns the resulting state.
    CpuRunState apply(ControlCommand command);

    /// Executes while Running, up to `max_instructions` (0 = unlimited), checking
    /// `yield` before every instruction. Yielding or exhausting the budget leaves
    /// the state Running.
    RunResult run(std::uint64_t max_instructions = 0, const std::function<bool()>& yield = {});

    /// execute() followed by run(). Leaves Running on budget exhaustion.
    RunResult execute_blocking(std::uint64_t max_instructions = kHeadlessStepBudget);

    /// Throws IllegalCommand while Running.
    CompileOutput compile_and_load(std::string_view source);
    std::vector<Token> tokens(std::string_view source) const;

    CpuStatusSnapshot snapshot() const;
    Disassembly disassemble(Address address) const;

    void add_breakpoint(Address address) { breakpoints_.insert(address); }
    void remove_breakpoint(Address address) { breakpoints_.erase(address); }
    const std::set<Address>& breakpoints() const noexcept { return breakpoints_; }

    /// Sinks run synchronously on the thread driving the machine.
    [[nodiscard]] Subscription subscribe(EventSink sink);

    // Host-side access to plug-ins.
    std::vector<std::string> memory_ids() const;
    std::vector<std::string> device_ids() const;
    /// Unrestricted memory context. Throws NotFound.
    MemoryContext& memory(std::string_view instance_id);
    /// Throws NotFound.
    Plugin& plugin(std::string_view instance_id);
    CpuPlugin& cpu() noexcept { return *cpu_; }
    CompilerPlugin& compiler() noexcept { return *compiler_; }
    bool has_compile_target() const noexcept { return compile_target_ != nullptr; }

    template <class T>
    T* plugin_as(std::string_view instance_id) {
        return dynamic_cast<T*>(&plugin(instance_id));
    }

    /// Throws NotFound when the device takes no host input.
    void feed_input(std::string_view device_id, std::span<const Word> values);
    /// Devices with host output, in configuration order.
    std::vector<std::string> output_device_ids() const;
    std::vector<std::string> input_device_ids() const;

private:
    class HostAdapter;

    Machine();

    void emit(const EmuEvent& event);
    void set_state(CpuRunState next, std::string reason);
    [[noreturn]] void illegal(ControlCommand command) const;
    void wire(const Connection& connection);

    ArchitectureConfig config_;
    std::vector<std::unique_ptr<HostAdapter>> hosts_;
    std::vector<std::pair<std::string, std::unique_ptr<Plugin>>> plugins_;
    std::shared_ptr<detail::EventBus> bus_;

    CpuPlugin* cpu_ = nullptr;
    CompilerPlugin* compiler_ = nullptr;
    MemoryContext* compile_target_ = nullptr;

    CpuRunState state_ = CpuRunState::Reset;
    std::set<Address> breakpoints_;
    bool resuming_ = false;
};

}  // namespace emu
