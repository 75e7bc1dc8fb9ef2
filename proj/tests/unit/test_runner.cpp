#include "emu/errors.hpp"
#include "emu/runner.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <chrono>
#include <thread>

using namespace emu;
using namespace std::chrono_literals;

namespace {

void wait_until(MachineRunner& r, CpuRunState s) {
    for (int i = 0; i < 500; ++i) {
        if (r.call([](Machine& m) { return m.state(); }).get() == s) return;
        std::this_thread::sleep_for(2ms);
    }
    FAIL("state not reached");
}

}  // namespace

TEST_CASE("runner executes tasks in order") {
    MachineRunner r(testing_support::machine("tinyvn"));
    std::vector<int> order;
    for (int i = 0; i < 5; ++i) r.post([&order, i](Machine&) { order.push_back(i); });
    r.call([](Machine&) {}).get();
    CHECK(order == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("runner propagates exceptions through call") {
    MachineRunner r(testing_support::machine("tinyvn"));
    auto f = r.call([](Machine& m) { m.pause(); });
    CHECK_THROWS_AS(f.get(), IllegalCommand);
}

TEST_CASE("runner drives a running machine to completion") {
    MachineRunner r(testing_support::machine("tinyvn"));
    std::atomic<int> halted{0};
    r.add_listener([&](const EmuEvent& e) {
        if (std::holds_alternative<Halted>(e)) ++halted;
    });
    r.call([](Machine& m) {
         REQUIRE(m.compile_and_load("LDI 3\nl: SUB one\nJZ end\nJMP l\nend: HALT\none: DB 1").success);
         m.reset();
         m.execute();
     }).get();
    wait_until(r, CpuRunState::Stopped);
    CHECK(halted == 1);
}

TEST_CASE("pause interrupts an infinite loop promptly") {
    MachineRunner r(testing_support::machine("tinyvn"));
    r.call([](Machine& m) {
         REQUIRE(m.compile_and_load("l: JMP l").success);
         m.reset();
         m.execute();
     }).get();
    std::this_thread::sleep_for(20ms);
    const auto t0 = std::chrono::steady_clock::now();
    const auto state = r.call([](Machine& m) {
                            m.pause();
                            return m.state();
                        }).get();
    const auto elapsed = std::chrono::steady_clock::now() - t0;
    CHECK(state == CpuRunState::Breakpoint);
    CHECK(elapsed < 100ms);
    CHECK(r.instructions_executed() > 0);
}

TEST_CASE("replace swaps the machine and keeps listeners") {
    MachineRunner r(testing_support::machine("tinyvn"));
    std::atomic<int> changes{0};
    r.add_listener([&](const EmuEvent& e) {
        if (std::holds_alternative<StateChanged>(e)) ++changes;
    });
    r.replace(testing_support::machine("ram"));
    const auto name = r.call([](Machine& m) {
                           m.reset();
                           return m.config().name;
                       }).get();
    CHECK(name == "ram");
    CHECK(changes == 1);
}
