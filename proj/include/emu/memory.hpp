#pragma once

#include "emu/contracts.hpp"

#include <map>
#include <string>
#include <vector>

namespace emu {

/// Dense zero-initialised cell array with listeners. Seals together with its owner.
class ArrayMemory final : public MemoryContext {
public:
    ArrayMemory(const Plugin& owner, std::uint64_t size, int cell_width, std::string cell_kind = "data");

    std::vector<Cell> read(Address address, std::uint64_t count) const override;
    void write(Address address, std::span<const Cell> values) override;
    std::uint64_t size() const override { return cells_.size(); }
    int cell_width() const override { return cell_width_; }
    std::string_view cell_kind() const override { return cell_kind_; }
    void add_listener(MemoryListener listener) override;

    /// Only valid before sealing; clears contents.
    void resize(std::uint64_t size);
    void set_cell_width(int width);

private:
    void check_range(Address address, std::uint64_t count) const;

    const Plugin& owner_;
    std::vector<Cell> cells_;
    int cell_width_;
    std::string cell_kind_;
    std::vector<MemoryListener> listeners_;
};

/// Forwards reads to another context and rejects writes with AccessError.
class ReadOnlyMemoryView final : public MemoryContext {
public:
    explicit ReadOnlyMemoryView(MemoryContext& target) : target_(target) {}

    std::vector<Cell> read(Address address, std::uint64_t count) const override {
        return target_.read(address, count);
    }
    void write(Address address, std::span<const Cell> values) override;
    std::uint64_t size() const override { return target_.size(); }
    int cell_width() const override { return target_.cell_width(); }
    std::string_view cell_kind() const override { return target_.cell_kind(); }
    void add_listener(MemoryListener listener) override { target_.add_listener(std::move(listener)); }

private:
    MemoryContext& target_;
};

/// General-purpose byte-addressable memory plug-in ("byte-memory").
/// Settings: size (cells, default 256), cell_width (bits, 1..64, default 8).
class ByteMemory final : public MemoryPlugin {
public:
    ByteMemory();

    MemoryContext& context() override { return memory_; }
    void apply_setting(std::string_view key, std::string_view value) override;

private:
    ArrayMemory memory_;
};

}  // namespace emu
