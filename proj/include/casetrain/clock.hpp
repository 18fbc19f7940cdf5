#pragma once

#include <cstdint>
#include <ctime>

namespace casetrain {

/// Injectable time source. Sessions stamp every committed action through one
/// of these, so fixed clocks make logs and export bundles reproducible.
class Clock {
public:
    virtual ~Clock() = default;

    /// Seconds since the Unix epoch (or a synthetic counter for fixed clocks).
    virtual std::int64_t now() = 0;
};

class SystemClock final : public Clock {
public:
    std::int64_t now() override { return static_cast<std::int64_t>(std::time(nullptr)); }
};

/// Returns seed, seed+1, seed+2, ... one tick per call.
class FixedClock final : public Clock {
public:
    explicit FixedClock(std::int64_t seed) : next_(seed) {}
    std::int64_t now() override { return next_++; }

private:
    std::int64_t next_;
};

}  // namespace casetrain
