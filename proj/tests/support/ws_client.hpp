#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace testing_support {

/// Blocking WebSocket client for tests.
class WsClient {
public:
    WsClient(const std::string& host, std::uint16_t port);
    ~WsClient();

    void send(const nlohmann::json& message);
    void send_text(const std::string& text);
    /// nullopt on timeout or closed connection.
    std::optional<nlohmann::json> receive(std::chrono::milliseconds timeout = std::chrono::milliseconds(2000));
    /// Reads until a message with the given "req" arrives; everything read is appended to `seen`.
    std::optional<nlohmann::json> until_reply(const nlohmann::json& req, std::vector<nlohmann::json>* seen = nullptr,
                                              std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));
    bool is_open() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace testing_support
