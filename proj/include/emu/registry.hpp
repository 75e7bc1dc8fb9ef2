#pragma once

#include "emu/config.hpp"
#include "emu/contracts.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace emu {

/// Compiled-in plug-ins, keyed by plug-in id.
class PluginRegistry {
public:
    using Factory = std::function<std::unique_ptr<Plugin>()>;

    /// Metadata is read from a probe instance. Throws SchemaError for an
    /// invalid id and DuplicateIdError for a repeated one.
    void add(Factory factory);

    template <class T>
    void add() {
        add([] { return std::make_unique<T>(); });
    }

    const PluginMetadata* find(std::string_view plugin_id) const;
    /// Throws UnknownPlugin.
    std::unique_ptr<Plugin> create(std::string_view plugin_id) const;
    /// Sorted by id.
    std::vector<PluginMetadata> entries() const;

private:
    struct Entry {
        PluginMetadata metadata;
        Factory factory;
    };
    std::map<std::string, Entry, std::less<>> entries_;
};

/// Every reference plug-in: TinyVN, RAM machine and the standard devices.
const PluginRegistry& builtin_registry();

/// Ready-made configurations: "tinyvn", "tinyvn-hub", "ram".
std::vector<ArchitectureConfig> builtin_presets();
std::optional<ArchitectureConfig> find_preset(std::string_view name);

/// Store entry `name` if present, else the builtin preset. Throws NotFound.
ArchitectureConfig resolve_config(std::string_view name, const std::filesystem::path& store_dir);

/// Store names plus preset names, sorted, without duplicates. A missing store
/// contributes nothing.
std::vector<std::string> available_configs(const std::filesystem::path& store_dir);

}  // namespace emu
