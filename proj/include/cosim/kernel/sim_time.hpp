#pragma once

#include "cosim/error.hpp"

#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>

namespace cosim::kernel {

COSIM_DEFINE_ERROR(TimeOverflow, Error);
COSIM_DEFINE_ERROR(TimeUnderflow, Error);

/// Simulation timestamp (or duration) in whole microseconds since start.
///
/// Both simulation domains share this clock representation. Arithmetic is
/// checked: overflow and negative results throw instead of wrapping.
class SimTime {
public:
    constexpr SimTime() noexcept = default;
    constexpr explicit SimTime(std::uint64_t micros) noexcept : micros_(micros) {}

    static constexpr SimTime from_ms(std::uint64_t ms)
    {
        if (ms > std::numeric_limits<std::uint64_t>::max() / 1000) {
            throw TimeOverflow("SimTime::from_ms: " + std::to_string(ms) + " ms overflows");
        }
        return SimTime(ms * 1000);
    }
    static constexpr SimTime zero() noexcept { return SimTime(); }
    static constexpr SimTime max() noexcept
    {
        return SimTime(std::numeric_limits<std::uint64_t>::max());
    }

    [[nodiscard]] constexpr std::uint64_t micros() const noexcept { return micros_; }

    constexpr auto operator<=>(const SimTime&) const noexcept = default;

    constexpr SimTime operator+(SimTime rhs) const
    {
        if (rhs.micros_ > std::numeric_limits<std::uint64_t>::max() - micros_) {
            throw TimeOverflow("SimTime addition overflows: " + std::to_string(micros_) + " + " +
                               std::to_string(rhs.micros_));
        }
        return SimTime(micros_ + rhs.micros_);
    }
    constexpr SimTime operator-(SimTime rhs) const
    {
        if (rhs.micros_ > micros_) {
            throw TimeUnderflow("SimTime subtraction below zero: " + std::to_string(micros_) +
                                " - " + std::to_string(rhs.micros_));
        }
        return SimTime(micros_ - rhs.micros_);
    }
    constexpr SimTime& operator+=(SimTime rhs) { return *this = *this + rhs; }

private:
    std::uint64_t micros_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, SimTime t)
{
    return os << t.micros() << "us";
}

namespace literals {
constexpr SimTime operator""_us(unsigned long long v) { return SimTime(v); }
constexpr SimTime operator""_ms(unsigned long long v) { return SimTime::from_ms(v); }
}  // namespace literals

}  // namespace cosim::kernel
