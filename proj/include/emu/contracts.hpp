#pragma once

/**
 * @file
 * @brief Plug-in kinds, their standard operations and the context types.
 *
 * A plug-in never hands itself to another plug-in. It hands out contexts:
 * narrow capability objects that expose data transfer only. Control over the
 * emulation (reset, stop, wiring) stays with the machine that owns every
 * plug-in. Contexts are plain interfaces; a plug-in may extend them with
 * non-standard operations which a peer can reach through dynamic_cast when it
 * knows the extended type.
 */

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emu {

using Cell = std::uint64_t;
using Word = std::uint64_t;
using Address = std::uint64_t;

enum class PluginKind { Compiler, Cpu, Memory, Device };

std::string_view to_string(PluginKind kind);
std::optional<PluginKind> parse_plugin_kind(std::string_view text);

struct PluginMetadata {
    std::string id;
    PluginKind kind = PluginKind::Device;
    std::string human_name;
    std::string version;
};

/// `[a-z0-9-]+`
bool is_valid_plugin_id(std::string_view id);

// -----------------------------------------------------------------------------
// Compiler data
// -----------------------------------------------------------------------------

enum class TokenCategory { Keyword, Label, Number, Directive, Comment, Separator, Whitespace, Error };

std::string_view to_string(TokenCategory category);

struct Token {
    TokenCategory category = TokenCategory::Error;
    std::string lexeme;
    int line = 1;            // 1-based
    int column = 1;          // 1-based, in bytes
    std::size_t offset = 0;  // 0-based byte index into the source

    bool operator==(const Token&) const = default;
};

enum class Severity { Error, Warning };

std::string_view to_string(Severity severity);

struct Diagnostic {
    Severity severity = Severity::Error;
    int line = 0;
    int column = 0;
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

struct ImageCell {
    Address address = 0;
    Cell value = 0;

    bool operator==(const ImageCell&) const = default;
};

/// Result of one compile. `image` is sorted by address and empty on failure.
struct CompileOutput {
    std::vector<ImageCell> image;
    Address start_address = 0;
    std::vector<Diagnostic> diagnostics;
    bool success = false;

    bool has_errors() const;
};

// -----------------------------------------------------------------------------
// CPU data
// -----------------------------------------------------------------------------

/// Reset is transient: the CPU passes through it and settles in Breakpoint.
enum class CpuRunState { Reset, Breakpoint, Running, Stopped };

/// Lowercase wire/CLI name ("breakpoint", "running", ...).
std::string_view to_string(CpuRunState state);

struct RegisterValue {
    std::string name;
    std::uint64_t value = 0;
    int width_bits = 8;

    bool operator==(const RegisterValue&) const = default;
};

struct FlagValue {
    std::string name;
    bool value = false;

    bool operator==(const FlagValue&) const = default;
};

struct CpuStatusSnapshot {
    std::vector<RegisterValue> registers;
    std::vector<FlagValue> flags;
    CpuRunState state = CpuRunState::Breakpoint;
    Address program_counter = 0;

    bool operator==(const CpuStatusSnapshot&) const = default;
};

struct StepOutcome {
    enum class Kind { Continue, Halted, BreakpointReached, Fault };

    Kind kind = Kind::Continue;
    std::string message;  // Fault only

    static StepOutcome proceed() { return {}; }
    static StepOutcome halted() { return {Kind::Halted, {}}; }
    static StepOutcome fault(std::string message) { return {Kind::Fault, std::move(message)}; }

    bool operator==(const StepOutcome&) const = default;
};

std::string_view to_string(StepOutcome::Kind kind);

struct Disassembly {
    std::string text;
    std::uint64_t length = 1;

    bool operator==(const Disassembly&) const = default;
};

// -----------------------------------------------------------------------------
// Contexts
// -----------------------------------------------------------------------------

/// Called after the cells changed, once per write call.
using MemoryListener = std::function<void(Address address, std::span<const Cell> values)>;

class MemoryContext {
public:
    virtual ~MemoryContext() = default;

    /// All-or-nothing: throws RangeError if any cell lies outside [0, size).
    virtual std::vector<Cell> read(Address address, std::uint64_t count) const = 0;
    /// Throws RangeError / ValueError without touching any cell.
    virtual void write(Address address, std::span<const Cell> values) = 0;
    virtual std::uint64_t size() const = 0;
    virtual int cell_width() const = 0;
    /// "data" for plain integer cells; plug-ins may declare other kinds ("instruction").
    virtual std::string_view cell_kind() const { return "data"; }
    /// Throws WiringSealedError once the machine is built.
    virtual void add_listener(MemoryListener listener) = 0;

    Cell read_cell(Address address) const { return read(address, 1).front(); }
    void write_cell(Address address, Cell value) { write(address, std::span<const Cell>(&value, 1)); }
};

class DeviceContext {
public:
    virtual ~DeviceContext() = default;

    virtual Word in() = 0;
    virtual void out(Word value) = 0;
    virtual std::string_view context_id() const = 0;
    virtual int width_bits() const { return 8; }
};

class CpuContext {
public:
    virtual ~CpuContext() = default;

    /// Throws CapacityError on an occupied port, WiringSealedError after build.
    virtual void attach_device(Address port, DeviceContext& device) = 0;
    virtual bool is_interrupt_supported() const { return false; }
};

/// Host-side callbacks a device uses to report traffic to the machine.
class DeviceHost {
public:
    virtual ~DeviceHost() = default;

    virtual void device_output(std::string_view context_id, Word value) = 0;
    virtual void device_warning(std::string_view message) = 0;
};

// -----------------------------------------------------------------------------
// Plug-ins (full surface; only the machine holds these)
// -----------------------------------------------------------------------------

class Plugin {
public:
    explicit Plugin(PluginMetadata metadata) : metadata_(std::move(metadata)) {}
    virtual ~Plugin() = default;

    Plugin(const Plugin&) = delete;
    Plugin& operator=(const Plugin&) = delete;

    const PluginMetadata& metadata() const noexcept { return metadata_; }

    /// Throws SettingsError for unknown keys or bad values.
    virtual void apply_setting(std::string_view key, std::string_view value);

    /// Closes the wiring phase. Attachments and listener registration fail afterwards.
    void seal() noexcept { sealed_ = true; }
    bool sealed() const noexcept { return sealed_; }

private:
    PluginMetadata metadata_;
    bool sealed_ = false;
};

class CompilerPlugin : public Plugin {
public:
    using Plugin::Plugin;

    /// Full token stream; concatenated lexemes reproduce `source`.
    virtual std::vector<Token> lex(std::string_view source) const = 0;

    /// Never throws for source errors. When `memory` is given and the compile
    /// succeeds, the image is written through it (one write per contiguous run).
    CompileOutput compile(std::string_view source, MemoryContext* memory = nullptr);

    /// Start address of the last successful compile; throws NoCompiledProgram.
    Address start_address() const;
    bool has_program() const noexcept { return start_address_.has_value(); }

    /// Unit name used in summaries ("bytes", "instructions").
    virtual std::string_view cell_unit() const { return "cells"; }

protected:
    virtual CompileOutput translate(std::string_view source) = 0;

private:
    std::optional<Address> start_address_;
};

class CpuPlugin : public Plugin {
public:
    using Plugin::Plugin;

    virtual CpuContext& context() = 0;
    /// Called once per Cpu->Memory connection. Throws WiringError if unusable.
    virtual void connect_memory(MemoryContext& memory) = 0;
    /// Throws WiringError if the CPU cannot run with its current wiring.
    virtual void check_wiring() const {}

    virtual void reset(Address start_address) = 0;
    virtual StepOutcome step() = 0;
    virtual Address program_counter() const = 0;
    /// Registers and flags; `state` is filled in by the machine.
    virtual CpuStatusSnapshot status() const = 0;
    virtual Disassembly disassemble(Address address) const = 0;
};

class MemoryPlugin : public Plugin {
public:
    using Plugin::Plugin;

    /// Unrestricted context (compiler, devices, host).
    virtual MemoryContext& context() = 0;
    /// Context handed to a requester of the given kind; defaults to context().
    virtual MemoryContext& context_for(PluginKind requester) {
        (void)requester;
        return context();
    }
};

class DevicePlugin : public Plugin {
public:
    using Plugin::Plugin;

    /// At least one context; ids are distinct.
    virtual std::vector<DeviceContext*> contexts() = 0;
    /// Throws WiringError for an unknown id. Empty id selects the first context.
    DeviceContext& context(std::string_view context_id);

    /// Retains `peer` for later in/out. Throws WiringSealedError after build,
    /// CapacityError when no slot is free.
    void attach_device(DeviceContext& peer, std::optional<Address> slot = std::nullopt);
    /// Context handed back to a device attached at `slot`.
    virtual DeviceContext& context_for_slot(std::optional<Address> slot);
    /// Slot paired with one of this device's own contexts, if any.
    virtual std::optional<Address> slot_for_context(std::string_view context_id) const {
        (void)context_id;
        return std::nullopt;
    }

    virtual void connect_cpu(CpuContext& cpu) { (void)cpu; }
    /// Throws WiringError if the device does not use memory.
    virtual void connect_memory(MemoryContext& memory);

    void set_host(DeviceHost* host) noexcept { host_ = host; }

protected:
    virtual void do_attach(DeviceContext& peer, std::optional<Address> slot);

    void report_output(std::string_view context_id, Word value) const {
        if (host_ != nullptr) host_->device_output(context_id, value);
    }
    void report_warning(std::string_view message) const {
        if (host_ != nullptr) host_->device_warning(message);
    }

private:
    DeviceHost* host_ = nullptr;
};

/// Host-side feeding of input values (terminal keyboard, input tape).
class HostInput {
public:
    virtual ~HostInput() = default;
    virtual void feed(std::span<const Word> values) = 0;
};

/// Host-side draining of produced values (terminal screen, output tape).
class HostOutput {
public:
    virtual ~HostOutput() = default;
    virtual std::vector<Word> take_output() = 0;
    /// Values are two's-complement signed when true.
    virtual bool signed_values() const { return false; }
};

}  // namespace emu
