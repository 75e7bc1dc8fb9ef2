#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace emu {

/// Decimal or 0x-prefixed hexadecimal, no sign, no surrounding spaces.
std::optional<std::uint64_t> parse_unsigned(std::string_view text);

/// Decimal integer with optional leading '-'.
std::optional<std::int64_t> parse_signed(std::string_view text);

/// parse_unsigned within [min, max]; throws SettingsError naming the plug-in and key.
std::uint64_t parse_setting_uint(std::string_view plugin_id, std::string_view key, std::string_view value,
                                 std::uint64_t min, std::uint64_t max);

}  // namespace emu
