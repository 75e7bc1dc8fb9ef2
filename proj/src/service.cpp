#include "emu/service.hpp"

#include "emu/errors.hpp"
#include "emu/protocol.hpp"
#include "emu/registry.hpp"

#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

namespace emu {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using protocol::json;

namespace {

std::string_view mime_type(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".html") return "text/html";
    if (ext == ".js" || ext == ".mjs") return "application/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    return "application/octet-stream";
}

}  // namespace

class ControlService::Impl {
public:
    class Client;

    Impl(std::unique_ptr<Machine> machine, ServiceOptions options)
        : options_(std::move(options)), runner_(std::make_unique<MachineRunner>(std::move(machine))) {}

    ~Impl() { stop(); }

    void start();
    void stop();
    void wait();

    // Emulation thread side: queue a frame for one client (weak) or all (empty).
    void enqueue(std::weak_ptr<Client> target, bool broadcast, std::string text,
                 std::weak_ptr<Client> exclude = {});
    void on_message(const std::shared_ptr<Client>& client, std::string text);
    void on_open(const std::shared_ptr<Client>& client);
    void on_close(const std::shared_ptr<Client>& client);

    ServiceOptions options_;
    std::unique_ptr<MachineRunner> runner_;
    asio::io_context ioc_;
    std::optional<tcp::acceptor> acceptor_;
    std::thread io_thread_;
    std::atomic<std::uint16_t> port_{0};
    std::atomic<std::size_t> clients_count_{0};
    std::uint64_t listener_ = 0;
    bool started_ = false;
    bool stopped_ = false;
    std::mutex stop_mutex_;
    std::condition_variable stop_cv_;

    // Owned by the I/O thread.
    std::set<std::shared_ptr<Client>> clients_;

    struct Outgoing {
        std::weak_ptr<Client> target;
        bool broadcast = false;
        std::string text;
        std::weak_ptr<Client> exclude;
    };
    std::mutex out_mutex_;
    std::deque<Outgoing> outgoing_;
    bool flush_scheduled_ = false;

    void accept();
    void flush();
    void serve_http(std::shared_ptr<beast::tcp_stream> stream);
};

// -----------------------------------------------------------------------------
// Client session
// -----------------------------------------------------------------------------

class ControlService::Impl::Client : public std::enable_shared_from_this<Client> {
public:
    Client(Impl& service, tcp::socket socket) : service_(service), ws_(std::move(socket)) {}

    void open(http::request<http::string_body> request) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(request, [self = shared_from_this()](beast::error_code ec) {
            if (ec) return;
            self->open_ = true;
            self->service_.on_open(self);
            self->read();
        });
    }

    void send(const std::string& text) {
        if (closed_) return;
        if (outbox_.size() >= service_.options_.client_buffer) {
            // Drop the client instead of holding up anything else.
            close();
            return;
        }
        outbox_.push_back(text);
        if (!writing_) write_next();
    }

    void close() {
        if (closed_) return;
        closed_ = true;
        beast::error_code ignored;
        beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ignored);
        beast::get_lowest_layer(ws_).close();
        service_.on_close(shared_from_this());
    }

private:
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->close();
                return;
            }
            std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->service_.on_message(self, std::move(text));
            self->read();
        });
    }

    void write_next() {
        writing_ = true;
        ws_.text(true);
        ws_.async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->close();
                return;
            }
            self->outbox_.pop_front();
            if (!self->outbox_.empty() && !self->closed_) {
                self->write_next();
            } else {
                self->writing_ = false;
            }
        });
    }

    Impl& service_;
    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    bool writing_ = false;
    bool open_ = false;
    bool closed_ = false;
};

// -----------------------------------------------------------------------------
// Service
// -----------------------------------------------------------------------------

void ControlService::Impl::start() {
    if (started_) return;
    beast::error_code ec;
    const auto address = asio::ip::make_address(options_.address, ec);
    if (ec) throw IoError("bad bind address '" + options_.address + "'");
    acceptor_.emplace(ioc_);
    const tcp::endpoint endpoint(address, options_.port);
    acceptor_->open(endpoint.protocol(), ec);
    if (!ec) acceptor_->set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acceptor_->bind(endpoint, ec);
    if (!ec) acceptor_->listen(asio::socket_base::max_listen_connections, ec);
    if (ec) throw IoError("cannot listen on " + options_.address + ":" + std::to_string(options_.port) + ": " + ec.message());
    port_ = acceptor_->local_endpoint().port();

    listener_ = runner_->add_listener([this](const EmuEvent& event) {
        if (clients_count_.load() == 0) return;
        enqueue({}, true, protocol::event_to_json(event).dump());
    });

    accept();
    started_ = true;
    io_thread_ = std::thread([this] { ioc_.run(); });
}

void ControlService::Impl::stop() {
    if (!started_) return;
    {
        std::lock_guard lock(stop_mutex_);
        if (stopped_) return;
        stopped_ = true;
    }
    runner_->remove_listener(listener_);
    asio::post(ioc_, [this] {
        beast::error_code ignored;
        acceptor_->close(ignored);
        auto clients = clients_;
        for (const auto& c : clients) c->close();
        ioc_.stop();
    });
    io_thread_.join();
    // Late enqueue() calls from the emulation thread only queue into the stopped context.
    runner_.reset();
    stop_cv_.notify_all();
}

void ControlService::Impl::wait() {
    std::unique_lock lock(stop_mutex_);
    stop_cv_.wait(lock, [this] { return stopped_; });
}

void ControlService::Impl::accept() {
    acceptor_->async_accept([this](beast::error_code ec, tcp::socket socket) {
        if (ec) return;  // acceptor closed
        serve_http(std::make_shared<beast::tcp_stream>(std::move(socket)));
        accept();
    });
}

void ControlService::Impl::serve_http(std::shared_ptr<beast::tcp_stream> stream) {
    auto buffer = std::make_shared<beast::flat_buffer>();
    auto request = std::make_shared<http::request<http::string_body>>();
    stream->expires_after(std::chrono::seconds(30));
    http::async_read(*stream, *buffer, *request, [this, stream, buffer, request](beast::error_code ec, std::size_t) {
        if (ec) return;
        stream->expires_never();
        if (websocket::is_upgrade(*request)) {
            auto client = std::make_shared<Client>(*this, stream->release_socket());
            client->open(std::move(*request));
            return;
        }

        auto response = std::make_shared<http::response<http::string_body>>();
        response->version(request->version());
        response->keep_alive(false);
        response->result(http::status::not_found);
        response->set(http::field::content_type, "text/plain");
        response->body() = "not found\n";

        std::string target(request->target());
        if (auto q = target.find('?'); q != std::string::npos) target.resize(q);
        if (options_.static_dir && request->method() == http::verb::get &&
            target.find("..") == std::string::npos && !target.empty() && target.front() == '/') {
            std::filesystem::path path = *options_.static_dir / target.substr(1);
            std::error_code fec;
            if (std::filesystem::is_directory(path, fec)) path /= "index.html";
            std::ifstream in(path, std::ios::binary);
            if (in) {
                std::ostringstream body;
                body << in.rdbuf();
                response->result(http::status::ok);
                response->set(http::field::content_type, std::string(mime_type(path)));
                response->body() = body.str();
            }
        }
        response->prepare_payload();
        http::async_write(*stream, *response, [stream, response](beast::error_code, std::size_t) {
            beast::error_code ignored;
            stream->socket().shutdown(tcp::socket::shutdown_send, ignored);
        });
    });
}

void ControlService::Impl::enqueue(std::weak_ptr<Client> target, bool broadcast, std::string text,
                                   std::weak_ptr<Client> exclude) {
    bool schedule = false;
    {
        std::lock_guard lock(out_mutex_);
        outgoing_.push_back({std::move(target), broadcast, std::move(text), std::move(exclude)});
        schedule = !std::exchange(flush_scheduled_, true);
    }
    if (schedule) asio::post(ioc_, [this] { flush(); });
}

void ControlService::Impl::flush() {
    std::deque<Outgoing> batch;
    {
        std::lock_guard lock(out_mutex_);
        batch.swap(outgoing_);
        flush_scheduled_ = false;
    }
    for (auto& item : batch) {
        if (item.broadcast) {
            const auto excluded = item.exclude.lock();
            auto clients = clients_;
            for (const auto& c : clients) {
                if (c != excluded) c->send(item.text);
            }
        } else if (auto c = item.target.lock()) {
            c->send(item.text);
        }
    }
}

void ControlService::Impl::on_open(const std::shared_ptr<Client>& client) {
    clients_.insert(client);
    clients_count_ = clients_.size();
    std::weak_ptr<Client> weak = client;
    // hello goes through the queue so it precedes any later event for this client.
    runner_->post([this, weak](Machine& m) { enqueue(weak, false, protocol::hello(m).dump()); });
}

void ControlService::Impl::on_close(const std::shared_ptr<Client>& client) {
    clients_.erase(client);
    clients_count_ = clients_.size();
}

void ControlService::Impl::on_message(const std::shared_ptr<Client>& client, std::string text) {
    std::weak_ptr<Client> weak = client;
    json reply;
    auto parsed = protocol::parse_message(text, reply);
    if (!parsed) {
        // Still routed through the emulation queue to keep replies in request order.
        runner_->post([this, weak, r = reply.dump()](Machine&) { enqueue(weak, false, r); });
        return;
    }
    json message = std::move(*parsed);
    const std::string type = message["t"].get<std::string>();
    const json req = message.contains("req") ? message["req"] : json();
    const auto with_req = [req](json j) {
        if (!req.is_null()) j["req"] = req;
        return j;
    };

    if (type == "configs") {
        runner_->post([this, weak, with_req](Machine& m) {
            json r = {{"t", "configs"}, {"current", m.config().name}};
            try {
                r["names"] = available_configs(options_.config_store);
            } catch (const std::exception& e) {
                r = protocol::error("config", e.what());
            }
            enqueue(weak, false, with_req(r).dump());
        });
        return;
    }

    if (type == "select_config") {
        runner_->post([this, weak, with_req, message](Machine&) {
            const auto name_it = message.find("name");
            if (name_it == message.end() || !name_it->is_string()) {
                enqueue(weak, false, with_req(protocol::error("bad_request", "missing string field 'name'")).dump());
                return;
            }
            std::unique_ptr<Machine> next;
            try {
                next = Machine::build(resolve_config(name_it->get<std::string>(), options_.config_store));
            } catch (const NotFound& e) {
                enqueue(weak, false, with_req(protocol::error("not_found", e.what())).dump());
                return;
            } catch (const std::exception& e) {
                enqueue(weak, false, with_req(protocol::error("config", e.what())).dump());
                return;
            }
            runner_->replace(std::move(next));
            runner_->post([this, weak, with_req](Machine& m) {
                const json h = protocol::hello(m);
                enqueue(weak, false, with_req(h).dump());
                enqueue({}, true, h.dump(), weak);
            });
        });
        return;
    }

    runner_->post([this, weak, message = std::move(message)](Machine& m) {
        enqueue(weak, false, protocol::handle(m, message).dump());
    });
}

// -----------------------------------------------------------------------------

ControlService::ControlService(std::unique_ptr<Machine> machine, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(machine), std::move(options))) {}

ControlService::~ControlService() = default;

void ControlService::start() {
    impl_->start();
}

void ControlService::stop() {
    impl_->stop();
}

void ControlService::wait() {
    impl_->wait();
}

std::uint16_t ControlService::port() const noexcept {
    return impl_->port_.load();
}

std::size_t ControlService::client_count() const noexcept {
    return impl_->clients_count_.load();
}

MachineRunner& ControlService::runner() noexcept {
    return *impl_->runner_;
}

}  // namespace emu
