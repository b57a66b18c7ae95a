#include "mhc/quasi_random.hpp"

#include <array>
#include <cmath>

#include "mhc/error.hpp"
#include "mhc/rng.hpp"

namespace mhc {

namespace {

constexpr std::array<std::uint32_t, 40> kPrimes = {
    2,  3,  5,  7,  11, 13, 17, 19, 23,  29,  31,  37,  41,  43,  47,  53,  59,  61,  67,  71,
    73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173};

}  // namespace

double radical_inverse(std::uint64_t index, std::uint32_t base) noexcept
{
    const double inv = 1.0 / base;
    double f = inv;
    double r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

HaltonSequence::HaltonSequence(std::size_t dims, std::uint64_t seed) : dims_(dims), shift_(dims, 0.0)
{
    require(dims <= kPrimes.size(), ErrorKind::invalid_argument,
            "Halton sequence supports at most 40 dimensions");
    if (seed != 0) {
        StreamRng rng(seed, 0x4a17ULL, 0);
        for (auto& s : shift_) s = rng.uniform();
    }
}

void HaltonSequence::point(std::uint64_t index, std::span<double> out) const
{
    for (std::size_t d = 0; d < dims_; ++d) {
        double v = radical_inverse(index, kPrimes[d]) + shift_[d];
        out[d] = v >= 1.0 ? v - 1.0 : v;
    }
}

std::vector<double> HaltonSequence::point(std::uint64_t index) const
{
    std::vector<double> p(dims_);
    point(index, p);
    return p;
}

std::vector<std::vector<double>> box_samples(std::span<const double> lower,
                                             std::span<const double> upper, std::size_t count,
                                             std::uint64_t seed)
{
    const std::size_t dims = lower.size();
    HaltonSequence halton(dims, seed);
    std::vector<std::vector<double>> out;
    out.reserve(count);
    std::vector<double> u(dims);
    for (std::size_t k = 0; k < count; ++k) {
        halton.point(k + 1, u);
        std::vector<double> p(dims);
        for (std::size_t d = 0; d < dims; ++d) p[d] = lower[d] + u[d] * (upper[d] - lower[d]);
        out.push_back(std::move(p));
    }
    if (dims <= 12) {
        const std::size_t vertices = std::size_t{1} << dims;
        for (std::size_t v = 0; v < vertices; ++v) {
            std::vector<double> p(dims);
            for (std::size_t d = 0; d < dims; ++d) p[d] = (v >> d) & 1U ? upper[d] : lower[d];
            out.push_back(std::move(p));
        }
    }
    return out;
}

}  // namespace mhc
