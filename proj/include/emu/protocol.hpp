#pragma once

/**
 * @file
 * @brief JSON message protocol between front ends and one Machine.
 *
 * Every message is an object with a discriminator "t". A client message that
 * carries "req" gets exactly one reply echoing it; events never carry "req".
 *
 * Client to server:
 *   {"t":"cmd","cmd":"reset|step|execute|pause|stop"}      -> state
 *   {"t":"compile","source":S}                              -> diag
 *   {"t":"tokens","source":S}                               -> tokens
 *   {"t":"mem_read","mem":ID,"addr":N,"count":N}            -> mem
 *   {"t":"mem_write","mem":ID,"addr":N,"values":[...]}      -> ack
 *   {"t":"bp","op":"add|remove|list","addr":N}              -> bp
 *   {"t":"dev_in","dev":ID,"values":[...]}                  -> ack
 *   {"t":"status"}                                          -> status
 *   {"t":"configs"}                                         -> configs
 *   {"t":"select_config","name":S}                          -> hello
 *
 * Server to client: state, diag, tokens, mem, bp, ack, status, configs,
 * hello {"version":1,"config":NAME}, event {"kind":...}, and
 * error {"code","msg"} with code one of bad_message, unknown_type,
 * bad_request, unknown_command, illegal_command, range, not_found, config.
 */

#include "emu/machine.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace emu::protocol {

using nlohmann::json;

constexpr int kVersion = 1;

json event_to_json(const EmuEvent& event);
json snapshot_to_json(const CpuStatusSnapshot& snapshot);
json hello(const Machine& machine);
json error(std::string_view code, std::string_view message, const json* req = nullptr);

/// Parses one text frame. nullopt carries a bad_message error in `reply`.
std::optional<json> parse_message(std::string_view text, json& reply);

/// Handles every message type that only needs the machine ("configs" and
/// "select_config" belong to the service). Never throws; failures become
/// error replies. Runs on the thread that owns the machine.
json handle(Machine& machine, const json& message);

}  // namespace emu::protocol
