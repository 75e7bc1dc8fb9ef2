#pragma once

#include "emu/contracts.hpp"

#include <deque>
#include <memory>
#include <string>
#include <vector>

namespace emu::devices {

/// Interactive character terminal. `in` pops the keyboard queue (0 when
/// empty), `out` appends to the screen log. Accepts one peer attachment.
/// Setting: columns (display hint, default 80).
class Terminal final : public DevicePlugin, public HostInput, public HostOutput {
public:
    Terminal();

    std::vector<DeviceContext*> contexts() override { return {&context_}; }
    void apply_setting(std::string_view key, std::string_view value) override;

    /// Throws ValueError for values above 255.
    void feed(std::span<const Word> values) override;
    /// Drains everything written since the last call.
    std::vector<Word> take_output() override;

    std::size_t pending_input() const noexcept { return input_.size(); }
    unsigned columns() const noexcept { return columns_; }
    DeviceContext* peer() const noexcept { return peer_; }

protected:
    void do_attach(DeviceContext& peer, std::optional<Address> slot) override;

private:
    class Context final : public DeviceContext {
    public:
        explicit Context(Terminal& owner) : owner_(owner) {}
        Word in() override;
        void out(Word value) override;
        std::string_view context_id() const override { return "term"; }

    private:
        Terminal& owner_;
    };

    Context context_;
    std::deque<Word> input_;
    std::vector<Word> output_;
    unsigned columns_ = 80;
    DeviceContext* peer_ = nullptr;
};

/// Serial card with N ports. Port i is exposed as context "port<i>" and owns
/// attachment slot i; traffic on a port context is forwarded to the device in
/// the matching slot. Unattached slot: `out` discards with a warning, `in`
/// yields 0. Setting: ports (1..64, default 4).
class SerialHub final : public DevicePlugin {
public:
    SerialHub();

    std::vector<DeviceContext*> contexts() override;
    DeviceContext& context_for_slot(std::optional<Address> slot) override;
    std::optional<Address> slot_for_context(std::string_view context_id) const override;
    void apply_setting(std::string_view key, std::string_view value) override;

    std::size_t port_count() const noexcept { return ports_.size(); }
    /// Throws RangeError for i >= port_count().
    DeviceContext& port_context(std::size_t i);

protected:
    void do_attach(DeviceContext& peer, std::optional<Address> slot) override;

private:
    class Port final : public DeviceContext {
    public:
        Port(SerialHub& owner, std::size_t index) : owner_(owner), id_("port" + std::to_string(index)) {}
        Word in() override;
        void out(Word value) override;
        std::string_view context_id() const override { return id_; }

        DeviceContext* attached = nullptr;

    private:
        SerialHub& owner_;
        std::string id_;
    };

    void resize(std::size_t count);

    std::vector<std::unique_ptr<Port>> ports_;
};

/// DMA-style observer: registers a listener on the memory it is connected to
/// and records every write notification in order.
class WriteLogger final : public DevicePlugin {
public:
    struct Entry {
        Address address = 0;
        std::vector<Cell> values;

        bool operator==(const Entry&) const = default;
    };

    WriteLogger();

    std::vector<DeviceContext*> contexts() override { return {&context_}; }
    void connect_memory(MemoryContext& memory) override;

    const std::vector<Entry>& log() const noexcept { return log_; }

private:
    class Context final : public DeviceContext {
    public:
        Word in() override { return 0; }
        void out(Word value) override { (void)value; }
        std::string_view context_id() const override { return "log"; }
    };

    Context context_;
    std::vector<Entry> log_;
    bool connected_ = false;
};

}  // namespace emu::devices
