#include "emu/registry.hpp"

#include "emu/devices.hpp"
#include "emu/errors.hpp"
#include "emu/memory.hpp"
#include "emu/ram.hpp"
#include "emu/tinyvn.hpp"

#include <set>

namespace emu {

void PluginRegistry::add(Factory factory) {
    const PluginMetadata metadata = factory()->metadata();
    if (!is_valid_plugin_id(metadata.id)) throw SchemaError("invalid plug-in id '" + metadata.id + "'");
    if (entries_.count(metadata.id) != 0) throw DuplicateIdError("plug-in '" + metadata.id + "' already registered");
    entries_.emplace(metadata.id, Entry{metadata, std::move(factory)});
}

const PluginMetadata* PluginRegistry::find(std::string_view plugin_id) const {
    auto it = entries_.find(plugin_id);
    return it == entries_.end() ? nullptr : &it->second.metadata;
}

std::unique_ptr<Plugin> PluginRegistry::create(std::string_view plugin_id) const {
    auto it = entries_.find(plugin_id);
    if (it == entries_.end()) throw UnknownPlugin(std::string(plugin_id));
    return it->second.factory();
}

std::vector<PluginMetadata> PluginRegistry::entries() const {
    std::vector<PluginMetadata> out;
    for (const auto& [id, entry] : entries_) out.push_back(entry.metadata);
    return out;
}

const PluginRegistry& builtin_registry() {
    static const PluginRegistry registry = [] {
        PluginRegistry r;
        r.add<tinyvn::Assembler>();
        r.add<tinyvn::Cpu>();
        r.add<ByteMemory>();
        r.add<ram::Compiler>();
        r.add<ram::Cpu>();
        r.add<ram::ProgramMemory>();
        r.add<ram::RegisterMemory>();
        r.add<ram::InputTape>();
        r.add<ram::OutputTape>();
        r.add<devices::Terminal>();
        r.add<devices::SerialHub>();
        r.add<devices::WriteLogger>();
        return r;
    }();
    return registry;
}

std::vector<ArchitectureConfig> builtin_presets() {
    ArchitectureConfig tinyvn;
    tinyvn.name = "tinyvn";
    tinyvn.plugins = {
        {"cpu", "tinyvn-cpu", PluginKind::Cpu},
        {"mem0", "byte-memory", PluginKind::Memory},
        {"asm", "tinyvn-asm", PluginKind::Compiler},
        {"term0", "terminal", PluginKind::Device},
    };
    tinyvn.connections = {
        {"cpu", "mem0", std::nullopt, std::nullopt},
        {"asm", "mem0", std::nullopt, std::nullopt},
        {"term0", "cpu", 0, std::nullopt},
    };

    ArchitectureConfig hub = tinyvn;
    hub.name = "tinyvn-hub";
    hub.plugins.push_back({"hub0", "serial-hub", PluginKind::Device});
    hub.plugins.push_back({"term1", "terminal", PluginKind::Device});
    hub.plugins.push_back({"log0", "write-logger", PluginKind::Device});
    hub.connections.push_back({"hub0", "cpu", 1, "port0"});
    hub.connections.push_back({"term1", "hub0", 0, std::nullopt});
    hub.connections.push_back({"log0", "mem0", std::nullopt, std::nullopt});
    hub.settings["hub0"]["ports"] = "4";

    ArchitectureConfig ram;
    ram.name = "ram";
    ram.plugins = {
        {"cpu", "ram-cpu", PluginKind::Cpu},
        {"prog", "ram-program-memory", PluginKind::Memory},
        {"regs", "ram-register-memory", PluginKind::Memory},
        {"compiler", "ram-compiler", PluginKind::Compiler},
        {"in", "input-tape", PluginKind::Device},
        {"out", "output-tape", PluginKind::Device},
    };
    ram.connections = {
        {"cpu", "prog", std::nullopt, std::nullopt},
        {"cpu", "regs", std::nullopt, std::nullopt},
        {"compiler", "prog", std::nullopt, std::nullopt},
        {"in", "cpu", ram::kInputPort, std::nullopt},
        {"out", "cpu", ram::kOutputPort, std::nullopt},
    };

    return {tinyvn, hub, ram};
}

std::optional<ArchitectureConfig> find_preset(std::string_view name) {
    for (auto& preset : builtin_presets()) {
        if (preset.name == name) return preset;
    }
    return std::nullopt;
}

ArchitectureConfig resolve_config(std::string_view name, const std::filesystem::path& store_dir) {
    std::error_code ec;
    if (is_valid_config_name(name) && std::filesystem::exists(config_path(store_dir, name), ec)) {
        return load_config(name, store_dir);
    }
    if (auto preset = find_preset(name)) return *preset;
    throw NotFound("no configuration '" + std::string(name) + "'");
}

std::vector<std::string> available_configs(const std::filesystem::path& store_dir) {
    std::set<std::string> names;
    std::error_code ec;
    if (std::filesystem::is_directory(store_dir, ec)) {
        for (auto& n : list_configs(store_dir)) names.insert(n);
    }
    for (const auto& preset : builtin_presets()) names.insert(preset.name);
    return {names.begin(), names.end()};
}

}  // namespace emu
