#include "emu/cpu_ports.hpp"

#include "emu/errors.hpp"

#include <string>

namespace emu {

void PortTable::attach_device(Address port, DeviceContext& device) {
    if (owner_.sealed()) throw WiringSealedError(owner_.metadata().id + ": wiring is sealed");
    auto [it, inserted] = ports_.emplace(port, &device);
    if (!inserted) {
        throw CapacityError(owner_.metadata().id + ": port " + std::to_string(port) + " is already occupied");
    }
}

DeviceContext* PortTable::device(Address port) const {
    auto it = ports_.find(port);
    return it == ports_.end() ? nullptr : it->second;
}

}  // namespace emu
