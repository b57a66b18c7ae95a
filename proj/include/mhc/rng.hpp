#pragma once

#include <array>
#include <cstdint>

namespace mhc {

// Philox4x32-10 counter-based generator. A draw is a pure function of
// (key, counter), so any (seed, path, step) stream can be generated in any
// order without carrying state between paths.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter counter, Key key) noexcept;
};

// Standard normal and uniform variates for a (seed, path, step) stream.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t path, std::uint64_t step) noexcept;

    // Uniform in [0, 1).
    double uniform() noexcept;
    double normal() noexcept;

private:
    void refill() noexcept;

    Philox4x32::Key key_{};
    Philox4x32::Counter counter_{};
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace mhc
