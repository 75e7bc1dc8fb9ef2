#pragma once

#include "emu/runner.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace emu {

struct ServiceOptions {
    std::string address = "127.0.0.1";
    /// 0 picks an ephemeral port; see ControlService::port().
    std::uint16_t port = 7642;
    std::filesystem::path config_store = "configs";
    /// Plain HTTP GET requests are answered from here when set.
    std::optional<std::filesystem::path> static_dir;
    /// Queued outgoing messages per client before it is disconnected.
    std::size_t client_buffer = 1024;
};

/// WebSocket front end over one MachineRunner (see protocol.hpp for the
/// message set). Network I/O runs on its own thread.
class ControlService {
public:
    ControlService(std::unique_ptr<Machine> machine, ServiceOptions options);
    ~ControlService();
    ControlService(const ControlService&) = delete;
    ControlService& operator=(const ControlService&) = delete;

    /// Binds and starts serving. Throws IoError when the address is unusable.
    void start();
    void stop();
    /// Blocks until stop() is called from another thread or a signal handler.
    void wait();

    std::uint16_t port() const noexcept;
    std::size_t client_count() const noexcept;
    MachineRunner& runner() noexcept;

private:
    class Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace emu
