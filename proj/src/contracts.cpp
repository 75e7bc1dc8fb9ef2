#include "emu/contracts.hpp"

#include "emu/errors.hpp"

#include <algorithm>
#include <cctype>

namespace emu {

std::string_view to_string(PluginKind kind) {
    switch (kind) {
        case PluginKind::Compiler: return "Compiler";
        case PluginKind::Cpu: return "Cpu";
        case PluginKind::Memory: return "Memory";
        case PluginKind::Device: return "Device";
    }
    return "?";
}

std::optional<PluginKind> parse_plugin_kind(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "compiler") return PluginKind::Compiler;
    if (lower == "cpu") return PluginKind::Cpu;
    if (lower == "memory") return PluginKind::Memory;
    if (lower == "device") return PluginKind::Device;
    return std::nullopt;
}

bool is_valid_plugin_id(std::string_view id) {
    return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
    });
}

std::string_view to_string(TokenCategory category) {
    switch (category) {
        case TokenCategory::Keyword: return "keyword";
        case TokenCategory::Label: return "label";
        case TokenCategory::Number: return "number";
        case TokenCategory::Directive: return "directive";
        case TokenCategory::Comment: return "comment";
        case TokenCategory::Separator: return "separator";
        case TokenCategory::Whitespace: return "whitespace";
        case TokenCategory::Error: return "error";
    }
    return "?";
}

std::string_view to_string(Severity severity) {
    return severity == Severity::Error ? "error" : "warning";
}

bool CompileOutput::has_errors() const {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::string_view to_string(CpuRunState state) {
    switch (state) {
        case CpuRunState::Reset: return "reset";
        case CpuRunState::Breakpoint: return "breakpoint";
        case CpuRunState::Running: return "running";
        case CpuRunState::Stopped: return "stopped";
    }
    return "?";
}

std::string_view to_string(StepOutcome::Kind kind) {
    switch (kind) {
        case StepOutcome::Kind::Continue: return "continue";
        case StepOutcome::Kind::Halted: return "halted";
        case StepOutcome::Kind::BreakpointReached: return "breakpoint";
        case StepOutcome::Kind::Fault: return "fault";
    }
    return "?";
}

void Plugin::apply_setting(std::string_view key, std::string_view value) {
    (void)value;
    throw SettingsError(metadata_.id + ": unknown setting '" + std::string(key) + "'");
}

// -----------------------------------------------------------------------------

CompileOutput CompilerPlugin::compile(std::string_view source, MemoryContext* memory) {
    CompileOutput out = translate(source);
    if (out.has_errors()) {
        out.success = false;
        out.image.clear();
        return out;
    }
    out.success = true;
    std::sort(out.image.begin(), out.image.end(),
              [](const ImageCell& a, const ImageCell& b) { return a.address < b.address; });

    if (memory != nullptr) {
        if (!out.image.empty() && out.image.back().address >= memory->size()) {
            throw RangeError("compiled image does not fit memory of " + std::to_string(memory->size()) +
                             " cells");
        }
        // One write per run of consecutive addresses.
        std::size_t i = 0;
        while (i < out.image.size()) {
            std::size_t j = i + 1;
            while (j < out.image.size() && out.image[j].address == out.image[j - 1].address + 1) ++j;
            std::vector<Cell> run;
            run.reserve(j - i);
            for (std::size_t k = i; k < j; ++k) run.push_back(out.image[k].value);
            memory->write(out.image[i].address, run);
            i = j;
        }
    }
    start_address_ = out.start_address;
    return out;
}

Address CompilerPlugin::start_address() const {
    if (!start_address_) throw NoCompiledProgram();
    return *start_address_;
}

// -----------------------------------------------------------------------------

DeviceContext& DevicePlugin::context(std::string_view context_id) {
    auto all = contexts();
    if (context_id.empty() && !all.empty()) return *all.front();
    for (DeviceContext* ctx : all) {
        if (ctx->context_id() == context_id) return *ctx;
    }
    throw WiringError(metadata().id + ": no device context '" + std::string(context_id) + "'");
}

void DevicePlugin::attach_device(DeviceContext& peer, std::optional<Address> slot) {
    if (sealed()) throw WiringSealedError(metadata().id + ": wiring is sealed");
    do_attach(peer, slot);
}

DeviceContext& DevicePlugin::context_for_slot(std::optional<Address> slot) {
    (void)slot;
    return *contexts().front();
}

void DevicePlugin::connect_memory(MemoryContext& memory) {
    (void)memory;
    throw WiringError(metadata().id + ": device does not use memory");
}

void DevicePlugin::do_attach(DeviceContext& peer, std::optional<Address> slot) {
    (void)peer;
    (void)slot;
    throw CapacityError(metadata().id + ": device accepts no attachments");
}

}  // namespace emu
