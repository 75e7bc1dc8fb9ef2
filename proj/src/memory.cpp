#include "emu/memory.hpp"

#include "emu/errors.hpp"
#include "emu/settings.hpp"

#include <string>

namespace emu {

namespace {

Cell width_limit(int width) {
    return width >= 64 ? ~Cell{0} : (Cell{1} << width) - 1;
}

}  // namespace

ArrayMemory::ArrayMemory(const Plugin& owner, std::uint64_t size, int cell_width, std::string cell_kind)
    : owner_(owner), cells_(size, 0), cell_width_(cell_width), cell_kind_(std::move(cell_kind)) {}

void ArrayMemory::check_range(Address address, std::uint64_t count) const {
    if (address > cells_.size() || count > cells_.size() - address) {
        throw RangeError("memory access [" + std::to_string(address) + ", +" + std::to_string(count) +
                         ") outside " + std::to_string(cells_.size()) + " cells");
    }
}

std::vector<Cell> ArrayMemory::read(Address address, std::uint64_t count) const {
    check_range(address, count);
    return {cells_.begin() + static_cast<std::ptrdiff_t>(address),
            cells_.begin() + static_cast<std::ptrdiff_t>(address + count)};
}

void ArrayMemory::write(Address address, std::span<const Cell> values) {
    check_range(address, values.size());
    const Cell limit = width_limit(cell_width_);
    for (Cell v : values) {
        if (v > limit) {
            throw ValueError("value " + std::to_string(v) + " exceeds " + std::to_string(cell_width_) +
                             "-bit cell");
        }
    }
    std::copy(values.begin(), values.end(), cells_.begin() + static_cast<std::ptrdiff_t>(address));
    for (const auto& listener : listeners_) listener(address, values);
}

void ArrayMemory::add_listener(MemoryListener listener) {
    if (owner_.sealed()) throw WiringSealedError(owner_.metadata().id + ": wiring is sealed");
    listeners_.push_back(std::move(listener));
}

void ArrayMemory::resize(std::uint64_t size) {
    cells_.assign(size, 0);
}

void ArrayMemory::set_cell_width(int width) {
    cell_width_ = width;
    for (Cell& c : cells_) c &= width_limit(width);
}

void ReadOnlyMemoryView::write(Address address, std::span<const Cell> values) {
    (void)values;
    throw AccessError("write to read-only memory context at " + std::to_string(address));
}

// -----------------------------------------------------------------------------

ByteMemory::ByteMemory()
    : MemoryPlugin({"byte-memory", PluginKind::Memory, "Byte memory", "1.0.0"}), memory_(*this, 256, 8) {}

void ByteMemory::apply_setting(std::string_view key, std::string_view value) {
    if (key == "size") {
        memory_.resize(parse_setting_uint(metadata().id, key, value, 1, std::uint64_t{1} << 24));
    } else if (key == "cell_width") {
        memory_.set_cell_width(static_cast<int>(parse_setting_uint(metadata().id, key, value, 1, 64)));
    } else {
        MemoryPlugin::apply_setting(key, value);
    }
}

}  // namespace emu
