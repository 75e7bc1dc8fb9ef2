#include "emu/config.hpp"

#include "emu/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unistd.h>

namespace emu {

using nlohmann::json;

namespace {

constexpr std::string_view kSuffix = ".emucfg.json";

std::string kind_key(PluginKind kind) {
    std::string s(to_string(kind));
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

const json& require(const json& object, const char* key, const std::string& where) {
    auto it = object.find(key);
    if (it == object.end()) throw SchemaError(where + ": missing field '" + key + "'");
    return *it;
}

std::string require_string(const json& object, const char* key, const std::string& where) {
    const json& v = require(object, key, where);
    if (!v.is_string()) throw SchemaError(where + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

void check_roles(const ArchitectureConfig& config, const std::function<void(std::string)>& fail) {
    const auto count = [&](PluginKind k) { return config.of_kind(k).size(); };
    if (count(PluginKind::Cpu) == 0) fail("missing role cpu");
    if (count(PluginKind::Cpu) > 1) fail("more than one cpu");
    if (count(PluginKind::Compiler) == 0) fail("missing role compiler");
    if (count(PluginKind::Compiler) > 1) fail("more than one compiler");
    if (count(PluginKind::Memory) == 0) fail("missing role memory");
}

}  // namespace

const PluginInstance* ArchitectureConfig::find(std::string_view instance_id) const {
    auto it = std::find_if(plugins.begin(), plugins.end(),
                           [&](const PluginInstance& p) { return p.instance_id == instance_id; });
    return it == plugins.end() ? nullptr : &*it;
}

std::vector<const PluginInstance*> ArchitectureConfig::of_kind(PluginKind kind) const {
    std::vector<const PluginInstance*> out;
    for (const auto& p : plugins) {
        if (p.kind == kind) out.push_back(&p);
    }
    return out;
}

bool is_allowed_edge(PluginKind from, PluginKind to) {
    switch (from) {
        case PluginKind::Cpu: return to == PluginKind::Memory;
        case PluginKind::Compiler: return to == PluginKind::Memory;
        case PluginKind::Device: return to == PluginKind::Cpu || to == PluginKind::Memory || to == PluginKind::Device;
        case PluginKind::Memory: return false;
    }
    return false;
}

// -----------------------------------------------------------------------------
// Parsing and serialisation
// -----------------------------------------------------------------------------

ArchitectureConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, column] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ConfigSyntaxError("malformed configuration at " + std::to_string(line) + ":" + std::to_string(column) +
                                    ": " + e.what(),
                                line, column);
    }
    if (!doc.is_object()) throw SchemaError("configuration must be a JSON object");

    ArchitectureConfig config;
    config.name = require_string(doc, "name", "configuration");

    const json& plugins = require(doc, "plugins", "configuration");
    if (!plugins.is_array()) throw SchemaError("configuration: 'plugins' must be an array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < plugins.size(); ++i) {
        const std::string where = "plugins[" + std::to_string(i) + "]";
        const json& entry = plugins[i];
        if (!entry.is_object()) throw SchemaError(where + " must be an object");
        PluginInstance inst;
        inst.instance_id = require_string(entry, "id", where);
        inst.plugin_id = require_string(entry, "plugin", where);
        const std::string kind = require_string(entry, "kind", where);
        const auto parsed = parse_plugin_kind(kind);
        if (!parsed) throw SchemaError(where + ": unknown kind '" + kind + "'");
        inst.kind = *parsed;
        if (inst.instance_id.empty()) throw SchemaError(where + ": empty id");
        if (!ids.insert(inst.instance_id).second) {
            throw DuplicateIdError("duplicate plug-in instance id '" + inst.instance_id + "'");
        }
        config.plugins.push_back(std::move(inst));
    }

    const json& connections = require(doc, "connections", "configuration");
    if (!connections.is_array()) throw SchemaError("configuration: 'connections' must be an array");
    for (std::size_t i = 0; i < connections.size(); ++i) {
        const std::string where = "connections[" + std::to_string(i) + "]";
        const json& entry = connections[i];
        if (!entry.is_object()) throw SchemaError(where + " must be an object");
        Connection c;
        c.from = require_string(entry, "from", where);
        c.to = require_string(entry, "to", where);
        if (auto it = entry.find("port"); it != entry.end()) {
            if (!it->is_number_unsigned()) throw SchemaError(where + ": 'port' must be an unsigned integer");
            c.port = it->get<Address>();
        }
        if (auto it = entry.find("context"); it != entry.end()) {
            if (!it->is_string()) throw SchemaError(where + ": 'context' must be a string");
            c.context_id = it->get<std::string>();
        }
        config.connections.push_back(std::move(c));
    }

    if (auto it = doc.find("settings"); it != doc.end()) {
        if (!it->is_object()) throw SchemaError("configuration: 'settings' must be an object");
        for (const auto& [instance, map] : it->items()) {
            if (!map.is_object()) throw SchemaError("settings." + instance + " must be an object");
            auto& target = config.settings[instance];
            for (const auto& [key, value] : map.items()) {
                if (!value.is_string()) throw SchemaError("settings." + instance + "." + key + " must be a string");
                target[key] = value.get<std::string>();
            }
        }
    }

    if (auto it = doc.find("layout"); it != doc.end()) {
        if (!it->is_object()) throw SchemaError("configuration: 'layout' must be an object");
        for (const auto& [instance, point] : it->items()) {
            if (!point.is_object() || !point.contains("x") || !point.contains("y") || !point["x"].is_number() ||
                !point["y"].is_number()) {
                throw SchemaError("layout." + instance + " must be {\"x\": number, \"y\": number}");
            }
            config.layout[instance] = LayoutPoint{point["x"].get<double>(), point["y"].get<double>()};
        }
    }

    check_roles(config, [](std::string message) { throw SchemaError(std::move(message)); });
    return config;
}

std::string serialize_config(const ArchitectureConfig& config) {
    json doc = json::object();
    doc["name"] = config.name;

    json plugins = json::array();
    for (const auto& p : config.plugins) {
        plugins.push_back({{"id", p.instance_id}, {"plugin", p.plugin_id}, {"kind", kind_key(p.kind)}});
    }
    doc["plugins"] = std::move(plugins);

    json connections = json::array();
    for (const auto& c : config.connections) {
        json entry = {{"from", c.from}, {"to", c.to}};
        if (c.port) entry["port"] = *c.port;
        if (c.context_id) entry["context"] = *c.context_id;
        connections.push_back(std::move(entry));
    }
    doc["connections"] = std::move(connections);

    json settings = json::object();
    for (const auto& [instance, map] : config.settings) settings[instance] = map;
    doc["settings"] = std::move(settings);

    if (!config.layout.empty()) {
        json layout = json::object();
        for (const auto& [instance, point] : config.layout) layout[instance] = {{"x", point.x}, {"y", point.y}};
        doc["layout"] = std::move(layout);
    }
    return doc.dump(2) + "\n";
}

// -----------------------------------------------------------------------------
// Validation
// -----------------------------------------------------------------------------

ValidationReport validate(const ArchitectureConfig& config) {
    ValidationReport report;
    auto violation = [&](std::string rule, std::string message, const Connection* c = nullptr) {
        report.violations.push_back(
            Violation{std::move(rule), std::move(message), c ? std::optional<Connection>(*c) : std::nullopt});
    };

    check_roles(config, [&](std::string message) { violation("role-count", std::move(message)); });

    std::set<std::string> ids;
    for (const auto& p : config.plugins) {
        if (!ids.insert(p.instance_id).second) violation("duplicate-id", "duplicate instance id " + p.instance_id);
    }

    std::set<std::pair<std::string, Address>> used_ports;
    std::size_t compiler_targets = 0;
    bool cpu_has_memory = false;

    for (const auto& c : config.connections) {
        const PluginInstance* from = config.find(c.from);
        const PluginInstance* to = config.find(c.to);
        const std::string edge = c.from + " -> " + c.to;
        if (from == nullptr || to == nullptr) {
            violation("unknown-endpoint", edge + ": unknown instance", &c);
            continue;
        }
        if (c.from == c.to) {
            violation("self-loop", edge + ": connection to itself", &c);
            continue;
        }
        if (from->kind == PluginKind::Memory) {
            violation("memory-initiates", edge + ": memory never initiates communication", &c);
            continue;
        }
        if (!is_allowed_edge(from->kind, to->kind)) {
            violation("edge-not-allowed",
                      edge + ": " + std::string(to_string(from->kind)) + " -> " + std::string(to_string(to->kind)) +
                          " is not an allowed connection",
                      &c);
            continue;
        }
        if (from->kind == PluginKind::Device && to->kind == PluginKind::Cpu && !c.port) {
            violation("port-required", edge + ": device to cpu connection needs a port", &c);
        }
        if (c.port && (to->kind == PluginKind::Cpu || to->kind == PluginKind::Device)) {
            if (!used_ports.emplace(c.to, *c.port).second) {
                violation("port-clash", edge + ": port " + std::to_string(*c.port) + " already taken", &c);
            }
        }
        if (from->kind == PluginKind::Compiler && ++compiler_targets > 1) {
            violation("compiler-target-count", edge + ": compiler output can target one memory only", &c);
        }
        if (from->kind == PluginKind::Cpu) cpu_has_memory = true;
    }

    for (const auto& [instance, map] : config.settings) {
        (void)map;
        if (config.find(instance) == nullptr) {
            violation("unknown-settings-target", "settings for unknown instance " + instance);
        }
    }

    if (!cpu_has_memory && !config.of_kind(PluginKind::Cpu).empty()) {
        report.warnings.push_back("cpu has no memory connection");
    }
    report.ok = report.violations.empty();
    return report;
}

// -----------------------------------------------------------------------------
// Store
// -----------------------------------------------------------------------------

bool is_valid_config_name(std::string_view name) {
    return !name.empty() && name.front() != '.' && std::all_of(name.begin(), name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
    });
}

std::filesystem::path config_path(const std::filesystem::path& store_dir, std::string_view name) {
    return store_dir / (std::string(name) + std::string(kSuffix));
}

void save_config(const ArchitectureConfig& config, const std::filesystem::path& store_dir) {
    if (!is_valid_config_name(config.name)) throw SchemaError("invalid configuration name '" + config.name + "'");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(store_dir, ec);
    if (ec) throw IoError("cannot create store " + store_dir.string() + ": " + ec.message());

    const fs::path target = config_path(store_dir, config.name);
    fs::path temp = target;
    temp += ".tmp-" + std::to_string(::getpid());
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + temp.string());
        out << serialize_config(config);
        out.flush();
        if (!out) throw IoError("cannot write " + temp.string());
    }
    fs::rename(temp, target, ec);
    if (ec) {
        fs::remove(temp);
        throw IoError("cannot rename into " + target.string() + ": " + ec.message());
    }
}

ArchitectureConfig load_config(std::string_view name, const std::filesystem::path& store_dir) {
    if (!is_valid_config_name(name)) throw NotFound("no configuration named '" + std::string(name) + "'");
    const auto path = config_path(store_dir, name);
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw NotFound("no configuration named '" + std::string(name) + "' in " + store_dir.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::vector<std::string> list_configs(const std::filesystem::path& store_dir) {
    std::vector<std::string> names;
    std::error_code ec;
    std::filesystem::directory_iterator it(store_dir, ec);
    if (ec) throw IoError("cannot read store " + store_dir.string() + ": " + ec.message());
    for (const auto& entry : it) {
        const std::string file = entry.path().filename().string();
        if (file.size() > kSuffix.size() && file.ends_with(kSuffix) && entry.is_regular_file(ec)) {
            names.push_back(file.substr(0, file.size() - kSuffix.size()));
        }
    }
    std::sort(names.begin(), names.end());
    return names;
}

}  // namespace emu
