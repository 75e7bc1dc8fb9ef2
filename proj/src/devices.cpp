#include "emu/devices.hpp"

#include "emu/errors.hpp"
#include "emu/settings.hpp"

namespace emu::devices {

// -----------------------------------------------------------------------------
// Terminal
// -----------------------------------------------------------------------------

Terminal::Terminal() : DevicePlugin({"terminal", PluginKind::Device, "Terminal", "1.0.0"}), context_(*this) {}

void Terminal::apply_setting(std::string_view key, std::string_view value) {
    if (key == "columns") {
        columns_ = static_cast<unsigned>(parse_setting_uint(metadata().id, key, value, 1, 1024));
    } else {
        DevicePlugin::apply_setting(key, value);
    }
}

void Terminal::feed(std::span<const Word> values) {
    for (Word v : values) {
        if (v > 0xFF) throw ValueError("terminal input " + std::to_string(v) + " exceeds 8 bits");
    }
    input_.insert(input_.end(), values.begin(), values.end());
}

std::vector<Word> Terminal::take_output() {
    return std::exchange(output_, {});
}

void Terminal::do_attach(DeviceContext& peer, std::optional<Address> slot) {
    if (peer_ != nullptr || (slot && *slot != 0)) {
        throw CapacityError("terminal: no free attachment slot");
    }
    peer_ = &peer;
}

Word Terminal::Context::in() {
    if (owner_.input_.empty()) return 0;
    const Word value = owner_.input_.front();
    owner_.input_.pop_front();
    return value;
}

void Terminal::Context::out(Word value) {
    if (value > 0xFF) throw ValueError("terminal output " + std::to_string(value) + " exceeds 8 bits");
    owner_.output_.push_back(value);
    owner_.report_output(context_id(), value);
}

// -----------------------------------------------------------------------------
// Serial hub
// -----------------------------------------------------------------------------

SerialHub::SerialHub() : DevicePlugin({"serial-hub", PluginKind::Device, "Serial hub", "1.0.0"}) {
    resize(4);
}

void SerialHub::resize(std::size_t count) {
    ports_.clear();
    for (std::size_t i = 0; i < count; ++i) ports_.push_back(std::make_unique<Port>(*this, i));
}

std::vector<DeviceContext*> SerialHub::contexts() {
    std::vector<DeviceContext*> out;
    out.reserve(ports_.size());
    for (auto& p : ports_) out.push_back(p.get());
    return out;
}

DeviceContext& SerialHub::port_context(std::size_t i) {
    if (i >= ports_.size()) {
        throw RangeError("serial-hub: port " + std::to_string(i) + " of " + std::to_string(ports_.size()));
    }
    return *ports_[i];
}

DeviceContext& SerialHub::context_for_slot(std::optional<Address> slot) {
    return port_context(slot.value_or(0));
}

std::optional<Address> SerialHub::slot_for_context(std::string_view context_id) const {
    for (std::size_t i = 0; i < ports_.size(); ++i) {
        if (ports_[i]->context_id() == context_id) return i;
    }
    return std::nullopt;
}

void SerialHub::apply_setting(std::string_view key, std::string_view value) {
    if (key == "ports") {
        if (sealed()) throw SettingsError("serial-hub: ports cannot change after build");
        resize(parse_setting_uint(metadata().id, key, value, 1, 64));
    } else {
        DevicePlugin::apply_setting(key, value);
    }
}

void SerialHub::do_attach(DeviceContext& peer, std::optional<Address> slot) {
    if (!slot) {
        for (std::size_t i = 0; i < ports_.size(); ++i) {
            if (ports_[i]->attached == nullptr) {
                slot = i;
                break;
            }
        }
        if (!slot) throw CapacityError("serial-hub: all ports occupied");
    }
    if (*slot >= ports_.size()) {
        throw CapacityError("serial-hub: no port " + std::to_string(*slot));
    }
    if (ports_[*slot]->attached != nullptr) {
        throw CapacityError("serial-hub: port " + std::to_string(*slot) + " is already occupied");
    }
    ports_[*slot]->attached = &peer;
}

Word SerialHub::Port::in() {
    return attached != nullptr ? attached->in() : 0;
}

void SerialHub::Port::out(Word value) {
    if (attached == nullptr) {
        owner_.report_warning("serial-hub: " + id_ + " has no device; discarded " + std::to_string(value));
        return;
    }
    attached->out(value);
}

// -----------------------------------------------------------------------------
// Write logger
// -----------------------------------------------------------------------------

WriteLogger::WriteLogger() : DevicePlugin({"write-logger", PluginKind::Device, "Memory write logger", "1.0.0"}) {}

void WriteLogger::connect_memory(MemoryContext& memory) {
    if (connected_) throw WiringError("write-logger: already observing a memory");
    memory.add_listener([this](Address address, std::span<const Cell> values) {
        log_.push_back(Entry{address, {values.begin(), values.end()}});
    });
    connected_ = true;
}

}  // namespace emu::devices
