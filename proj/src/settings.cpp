#include "emu/settings.hpp"

#include "emu/errors.hpp"

#include <charconv>
#include <string>

namespace emu {

std::optional<std::uint64_t> parse_unsigned(std::string_view text) {
    int base = 10;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        base = 16;
        text.remove_prefix(2);
    }
    if (text.empty()) return std::nullopt;
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::optional<std::int64_t> parse_signed(std::string_view text) {
    if (text.empty() || text.front() == '+') return std::nullopt;
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, 10);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::uint64_t parse_setting_uint(std::string_view plugin_id, std::string_view key, std::string_view value,
                                 std::uint64_t min, std::uint64_t max) {
    auto parsed = parse_unsigned(value);
    if (!parsed || *parsed < min || *parsed > max) {
        throw SettingsError(std::string(plugin_id) + ": setting '" + std::string(key) + "' expects an integer in [" +
                            std::to_string(min) + ", " + std::to_string(max) + "], got '" + std::string(value) +
                            "'");
    }
    return *parsed;
}

}  // namespace emu
