#include "emu/runner.hpp"

#include <algorithm>

namespace emu {

namespace {
// Instructions per run() slice; the yield check still happens per instruction.
constexpr std::uint64_t kSlice = 100'000;
}  // namespace

MachineRunner::MachineRunner(std::unique_ptr<Machine> machine) {
    attach(std::move(machine));
    thread_ = std::thread([this] { loop(); });
}

MachineRunner::~MachineRunner() {
    {
        std::lock_guard lock(mutex_);
        quit_ = true;
        pending_ = true;
    }
    wake_.notify_all();
    thread_.join();
}

void MachineRunner::post(Task task) {
    {
        std::lock_guard lock(mutex_);
        tasks_.push_back(std::move(task));
        pending_ = true;
    }
    wake_.notify_one();
}

void MachineRunner::replace(std::unique_ptr<Machine> machine) {
    auto holder = std::make_shared<std::unique_ptr<Machine>>(std::move(machine));
    post([this, holder](Machine&) {
        // Runs as its own task, so no other task holds the old reference.
        attach(std::move(*holder));
    });
}

void MachineRunner::attach(std::unique_ptr<Machine> machine) {
    subscription_.reset();
    machine_ = std::move(machine);
    subscription_ = machine_->subscribe([this](const EmuEvent& e) { forward(e); });
}

std::uint64_t MachineRunner::add_listener(EventSink sink) {
    std::lock_guard lock(sinks_mutex_);
    const std::uint64_t id = next_sink_++;
    sinks_.emplace_back(id, std::make_shared<EventSink>(std::move(sink)));
    return id;
}

void MachineRunner::remove_listener(std::uint64_t id) {
    std::lock_guard lock(sinks_mutex_);
    std::erase_if(sinks_, [&](const auto& s) { return s.first == id; });
}

void MachineRunner::forward(const EmuEvent& event) {
    decltype(sinks_) sinks;
    {
        std::lock_guard lock(sinks_mutex_);
        sinks = sinks_;
    }
    for (const auto& [id, sink] : sinks) (*sink)(event);
}

void MachineRunner::loop() {
    const auto yield = [this] { return pending_.load(std::memory_order_relaxed); };
    while (true) {
        Task task;
        {
            std::unique_lock lock(mutex_);
            if (tasks_.empty() && !quit_ && machine_->state() != CpuRunState::Running) {
                wake_.wait(lock, [this] { return quit_ || !tasks_.empty(); });
            }
            if (quit_) return;
            if (!tasks_.empty()) {
                task = std::move(tasks_.front());
                tasks_.pop_front();
            }
            pending_ = !tasks_.empty();
        }
        if (task) {
            task(*machine_);
            continue;
        }
        const RunResult r = machine_->run(kSlice, yield);
        executed_ += r.instructions;
    }
}

}  // namespace emu
