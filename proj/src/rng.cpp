#include "mhc/rng.hpp"

#include <cmath>
#include <numbers>

namespace mhc {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53U;
constexpr std::uint32_t kMul1 = 0xCD9E8D57U;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9U;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85U;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32U);
    lo = static_cast<std::uint32_t>(p);
}

inline Philox4x32::Counter round(const Philox4x32::Counter& c, const Philox4x32::Key& k) noexcept
{
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter counter, Key key) noexcept
{
    counter = round(counter, key);
    for (int r = 1; r < 10; ++r) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
        counter = round(counter, key);
    }
    return counter;
}

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t path, std::uint64_t step) noexcept
{
    key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32U)};
    counter_ = {0U, static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(path),
                static_cast<std::uint32_t>(path >> 32U) ^ (static_cast<std::uint32_t>(step >> 32U) << 16U)};
}

void StreamRng::refill() noexcept
{
    block_ = Philox4x32::generate(counter_, key_);
    ++counter_[0];
    used_ = 0;
}

double StreamRng::uniform() noexcept
{
    if (used_ > 2) refill();
    const std::uint64_t hi = block_[used_] >> 5U;   // 27 bits
    const std::uint64_t lo = block_[used_ + 1] >> 6U;  // 26 bits
    used_ += 2;
    return static_cast<double>((hi << 26U) | lo) * 0x1.0p-53;
}

double StreamRng::normal() noexcept
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

}  // namespace mhc
