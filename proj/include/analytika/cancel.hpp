#pragma once

#include <chrono>
#include <cstdint>
#include <optional>

#include "analytika/error.hpp"

namespace analytika {

// Cooperative deadline shared by the stages of one analysis. Long-running
// loops call poll() per unit of work; the clock is only read every
// kPollInterval calls so the check stays off the profile.
class Deadline {
public:
    using Clock = std::chrono::steady_clock;
    static constexpr std::uint32_t kPollInterval = 4096;

    Deadline() = default;
    explicit Deadline(Clock::time_point at) : at_(at) {}

    static Deadline after(std::chrono::milliseconds budget) { return Deadline(Clock::now() + budget); }
    static Deadline never() { return Deadline(); }

    bool expired() const { return at_ && Clock::now() >= *at_; }

    // Stage-boundary check.
    void check() const {
        if (expired()) throw Cancelled();
    }

    // Inner-loop check.
    void poll() const {
        if (!at_) return;
        if (++counter_ % kPollInterval == 0) check();
    }

private:
    std::optional<Clock::time_point> at_;
    mutable std::uint32_t counter_ = 0;
};

}  // namespace analytika
