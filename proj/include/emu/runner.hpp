#pragma once

#include "emu/machine.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <thread>
#include <type_traits>

namespace emu {

/// Owns a Machine on a dedicated emulation thread. Every access goes through a
/// FIFO task queue; while the machine is Running the thread executes
/// instructions between tasks and yields as soon as a task is queued.
class MachineRunner {
public:
    using Task = std::function<void(Machine&)>;

    explicit MachineRunner(std::unique_ptr<Machine> machine);
    ~MachineRunner();
    MachineRunner(const MachineRunner&) = delete;
    MachineRunner& operator=(const MachineRunner&) = delete;

    void post(Task task);

    /// Runs `f(machine)` on the emulation thread. Exceptions travel through the future.
    template <class F>
    auto call(F&& f) -> std::future<std::invoke_result_t<F, Machine&>> {
        using R = std::invoke_result_t<F, Machine&>;
        auto task = std::make_shared<std::packaged_task<R(Machine&)>>(std::forward<F>(f));
        auto future = task->get_future();
        post([task](Machine& m) { (*task)(m); });
        return future;
    }

    /// Swaps the machine once every previously posted task has run.
    void replace(std::unique_ptr<Machine> machine);

    /// Sinks are called on the emulation thread and survive replace().
    std::uint64_t add_listener(EventSink sink);
    void remove_listener(std::uint64_t id);

    /// Instructions executed while Running since the runner started.
    std::uint64_t instructions_executed() const noexcept { return executed_.load(); }

private:
    void loop();
    void attach(std::unique_ptr<Machine> machine);
    void forward(const EmuEvent& event);

    std::unique_ptr<Machine> machine_;
    Subscription subscription_;

    std::mutex mutex_;
    std::condition_variable wake_;
    std::deque<Task> tasks_;
    std::atomic<bool> pending_{false};
    bool quit_ = false;

    std::mutex sinks_mutex_;
    std::vector<std::pair<std::uint64_t, std::shared_ptr<EventSink>>> sinks_;
    std::uint64_t next_sink_ = 1;

    std::atomic<std::uint64_t> executed_{0};
    std::thread thread_;
};

}  // namespace emu
