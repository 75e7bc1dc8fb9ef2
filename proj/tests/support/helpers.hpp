#pragma once

#include "emu/machine.hpp"
#include "emu/registry.hpp"

#include <memory>
#include <string>
#include <vector>

namespace testing_support {

inline std::unique_ptr<emu::Machine> machine(const std::string& preset) {
    return emu::Machine::build(*emu::find_preset(preset));
}

/// Records every event while alive.
struct Recorder {
    explicit Recorder(emu::Machine& m) : sub(m.subscribe([this](const emu::EmuEvent& e) { events.push_back(e); })) {}

    template <class T>
    std::vector<T> of() const {
        std::vector<T> out;
        for (const auto& e : events) {
            if (const auto* x = std::get_if<T>(&e)) out.push_back(*x);
        }
        return out;
    }

    std::vector<emu::EmuEvent> events;
    emu::Subscription sub;
};

}  // namespace testing_support
