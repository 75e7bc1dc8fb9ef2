#pragma once

/**
 * @file
 * @brief Declarative architecture configurations.
 *
 * A configuration names plug-in instances and the directed connections
 * between them. An edge A -> B means A may call operations of B's context;
 * B can only return results. Allowed edges:
 *
 *   Cpu -> Memory, Device -> Cpu, Device -> Memory, Device -> Device,
 *   Compiler -> Memory
 *
 * Memory never initiates. The optional `port` of an edge selects a slot on
 * the target (a CPU port, a hub slot); `context` selects one of the source
 * device's contexts.
 *
 * File format: JSON, keys sorted, two-space indent, trailing newline.
 * Stores keep one file per configuration: `<store>/<name>.emucfg.json`.
 */

#include "emu/contracts.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emu {

struct PluginInstance {
    std::string instance_id;
    std::string plugin_id;
    PluginKind kind = PluginKind::Device;

    bool operator==(const PluginInstance&) const = default;
};

struct Connection {
    std::string from;
    std::string to;
    std::optional<Address> port;
    std::optional<std::string> context_id;

    bool operator==(const Connection&) const = default;
};

/// Editor-only placement, persisted opaquely and ignored by validation.
struct LayoutPoint {
    double x = 0;
    double y = 0;

    bool operator==(const LayoutPoint&) const = default;
};

using SettingsMap = std::map<std::string, std::map<std::string, std::string>>;

struct ArchitectureConfig {
    std::string name;
    std::vector<PluginInstance> plugins;
    std::vector<Connection> connections;
    SettingsMap settings;
    std::map<std::string, LayoutPoint> layout;

    const PluginInstance* find(std::string_view instance_id) const;
    std::vector<const PluginInstance*> of_kind(PluginKind kind) const;

    bool operator==(const ArchitectureConfig&) const = default;
};

struct Violation {
    std::string rule_id;
    std::string message;
    std::optional<Connection> connection;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;
    std::vector<std::string> warnings;
};

bool is_allowed_edge(PluginKind from, PluginKind to);

/// Throws ConfigSyntaxError, SchemaError, DuplicateIdError.
ArchitectureConfig parse_config(std::string_view text);

/// Canonical form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ArchitectureConfig& config);

/// Pure. Rule ids: role-count, duplicate-id, unknown-endpoint, self-loop,
/// memory-initiates, edge-not-allowed, port-required, port-clash,
/// compiler-target-count, unknown-settings-target.
ValidationReport validate(const ArchitectureConfig& config);

/// Letters, digits, '.', '_' and '-'; not starting with '.'.
bool is_valid_config_name(std::string_view name);

std::filesystem::path config_path(const std::filesystem::path& store_dir, std::string_view name);

/// Atomic: writes a temporary file then renames it. Throws IoError, SchemaError.
void save_config(const ArchitectureConfig& config, const std::filesystem::path& store_dir);
/// Throws NotFound, IoError and the parse_config errors.
ArchitectureConfig load_config(std::string_view name, const std::filesystem::path& store_dir);
/// Sorted names. Throws IoError when the store cannot be read.
std::vector<std::string> list_configs(const std::filesystem::path& store_dir);

}  // namespace emu
