#include "emu/protocol.hpp"

#include "emu/errors.hpp"

#include <fmt/format.h>

namespace emu::protocol {

namespace {

constexpr std::uint64_t kMaxTransfer = 65536;

struct BadRequest : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const json& field(const json& m, const char* name) {
    auto it = m.find(name);
    if (it == m.end()) throw BadRequest(fmt::format("missing field '{}'", name));
    return *it;
}

std::string string_field(const json& m, const char* name) {
    const json& v = field(m, name);
    if (!v.is_string()) throw BadRequest(fmt::format("field '{}' must be a string", name));
    return v.get<std::string>();
}

std::uint64_t uint_field(const json& m, const char* name) {
    const json& v = field(m, name);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw BadRequest(fmt::format("field '{}' must be a non-negative integer", name));
    }
    return v.get<std::uint64_t>();
}

// Negative integers are accepted and stored as two's-complement bit patterns.
std::vector<Word> words_field(const json& m, const char* name) {
    const json& v = field(m, name);
    if (!v.is_array()) throw BadRequest(fmt::format("field '{}' must be an array", name));
    std::vector<Word> out;
    out.reserve(v.size());
    for (const auto& x : v) {
        if (x.is_number_unsigned()) {
            out.push_back(x.get<std::uint64_t>());
        } else if (x.is_number_integer()) {
            out.push_back(static_cast<Word>(x.get<std::int64_t>()));
        } else {
            throw BadRequest(fmt::format("field '{}' must hold integers", name));
        }
    }
    if (out.size() > kMaxTransfer) throw BadRequest("too many values");
    return out;
}

json reply(std::string_view type) {
    return json{{"t", type}};
}

json state_reply(const Machine& m) {
    json r = reply("state");
    r["state"] = to_string(m.state());
    return r;
}

json handle_cmd(Machine& m, const json& msg) {
    const std::string name = string_field(msg, "cmd");
    const auto command = parse_command(name);
    if (!command) return error("unknown_command", "unknown command '" + name + "'");
    m.apply(*command);
    return state_reply(m);
}

json handle_compile(Machine& m, const json& msg) {
    const CompileOutput out = m.compile_and_load(string_field(msg, "source"));
    json r = reply("diag");
    r["success"] = out.success;
    r["start"] = out.success ? json(out.start_address) : json(nullptr);
    r["size"] = out.image.size();
    r["diagnostics"] = json::array();
    for (const auto& d : out.diagnostics) {
        r["diagnostics"].push_back(
            {{"severity", to_string(d.severity)}, {"line", d.line}, {"col", d.column}, {"message", d.message}});
    }
    return r;
}

json handle_tokens(Machine& m, const json& msg) {
    json r = reply("tokens");
    r["tokens"] = json::array();
    for (const auto& t : m.tokens(string_field(msg, "source"))) {
        r["tokens"].push_back({{"cat", to_string(t.category)},
                               {"text", t.lexeme},
                               {"line", t.line},
                               {"col", t.column},
                               {"offset", t.offset}});
    }
    return r;
}

json handle_mem_read(Machine& m, const json& msg) {
    MemoryContext& mem = m.memory(string_field(msg, "mem"));
    const std::uint64_t addr = uint_field(msg, "addr");
    const std::uint64_t count = uint_field(msg, "count");
    if (count > kMaxTransfer) throw BadRequest("count too large");
    json r = reply("mem");
    r["values"] = mem.read(addr, count);
    return r;
}

json handle_mem_write(Machine& m, const json& msg) {
    MemoryContext& mem = m.memory(string_field(msg, "mem"));
    const std::uint64_t addr = uint_field(msg, "addr");
    const auto values = words_field(msg, "values");
    mem.write(addr, values);
    return reply("ack");
}

json handle_bp(Machine& m, const json& msg) {
    const std::string op = string_field(msg, "op");
    if (op == "add") {
        m.add_breakpoint(uint_field(msg, "addr"));
    } else if (op == "remove") {
        m.remove_breakpoint(uint_field(msg, "addr"));
    } else if (op != "list") {
        throw BadRequest("op must be add, remove or list");
    }
    json r = reply("bp");
    r["breakpoints"] = json::array();
    for (Address a : m.breakpoints()) r["breakpoints"].push_back(a);
    return r;
}

json handle_dev_in(Machine& m, const json& msg) {
    const std::string dev = string_field(msg, "dev");
    const auto values = words_field(msg, "values");
    m.feed_input(dev, values);
    return reply("ack");
}

}  // namespace

json event_to_json(const EmuEvent& event) {
    json j = reply("event");
    std::visit(
        [&](const auto& e) {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, StateChanged>) {
                j["kind"] = "state";
                j["old"] = to_string(e.old_state);
                j["new"] = to_string(e.new_state);
                if (e.reason.rfind("fault: ", 0) == 0) j["msg"] = e.reason.substr(7);
            } else if constexpr (std::is_same_v<T, MemoryWritten>) {
                j["kind"] = "mem_write";
                j["mem"] = e.memory;
                j["addr"] = e.address;
                j["count"] = e.count;
            } else if constexpr (std::is_same_v<T, DeviceOutput>) {
                j["kind"] = "dev_out";
                j["dev"] = e.device;
                j["value"] = e.value;
            } else if constexpr (std::is_same_v<T, Halted>) {
                j["kind"] = "halted";
                j["pc"] = e.pc;
            } else if constexpr (std::is_same_v<T, BreakpointHit>) {
                j["kind"] = "breakpoint";
                j["addr"] = e.address;
            } else {
                j["kind"] = "warning";
                j["dev"] = e.device;
                j["msg"] = e.message;
            }
        },
        event);
    return j;
}

json snapshot_to_json(const CpuStatusSnapshot& s) {
    json j = reply("status");
    j["state"] = to_string(s.state);
    j["pc"] = s.program_counter;
    j["registers"] = json::array();
    for (const auto& r : s.registers) {
        j["registers"].push_back({{"name", r.name}, {"value", r.value}, {"width", r.width_bits}});
    }
    j["flags"] = json::array();
    for (const auto& f : s.flags) j["flags"].push_back({{"name", f.name}, {"value", f.value}});
    return j;
}

json hello(const Machine& machine) {
    json j = reply("hello");
    j["version"] = kVersion;
    j["config"] = machine.config().name;
    return j;
}

json error(std::string_view code, std::string_view message, const json* req) {
    json j = reply("error");
    j["code"] = code;
    j["msg"] = message;
    if (req != nullptr) j["req"] = *req;
    return j;
}

std::optional<json> parse_message(std::string_view text, json& out) {
    json m = json::parse(text, nullptr, false);
    if (m.is_discarded() || !m.is_object()) {
        out = error("bad_message", "expected a JSON object");
        return std::nullopt;
    }
    auto req = m.find("req");
    auto t = m.find("t");
    if (t == m.end() || !t->is_string()) {
        out = error("bad_message", "missing string field 't'", req == m.end() ? nullptr : &*req);
        return std::nullopt;
    }
    return m;
}

json handle(Machine& machine, const json& message) {
    const auto req_it = message.find("req");
    const json* req = req_it == message.end() ? nullptr : &*req_it;
    json r;
    try {
        const std::string t = message.at("t").get<std::string>();
        if (t == "cmd") {
            r = handle_cmd(machine, message);
        } else if (t == "compile") {
            r = handle_compile(machine, message);
        } else if (t == "tokens") {
            r = handle_tokens(machine, message);
        } else if (t == "mem_read") {
            r = handle_mem_read(machine, message);
        } else if (t == "mem_write") {
            r = handle_mem_write(machine, message);
        } else if (t == "bp") {
            r = handle_bp(machine, message);
        } else if (t == "dev_in") {
            r = handle_dev_in(machine, message);
        } else if (t == "status") {
            r = snapshot_to_json(machine.snapshot());
        } else {
            r = error("unknown_type", "unknown message type '" + t + "'");
        }
    } catch (const BadRequest& e) {
        r = error("bad_request", e.what());
    } catch (const IllegalCommand& e) {
        r = error("illegal_command", e.what());
    } catch (const RangeError& e) {
        r = error("range", e.what());
    } catch (const NotFound& e) {
        r = error("not_found", e.what());
    } catch (const std::exception& e) {
        r = error("bad_request", e.what());
    }
    if (req != nullptr) r["req"] = *req;
    return r;
}

}  // namespace emu::protocol
