#pragma once

#include "emu/contracts.hpp"

#include <map>

namespace emu {

/// CpuContext backed by a port -> device map. One device per port.
class PortTable final : public CpuContext {
public:
    explicit PortTable(const Plugin& owner) : owner_(owner) {}

    void attach_device(Address port, DeviceContext& device) override;

    /// nullptr when nothing is attached.
    DeviceContext* device(Address port) const;

private:
    const Plugin& owner_;
    std::map<Address, DeviceContext*> ports_;
};

}  // namespace emu
