#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mhc {

double radical_inverse(std::uint64_t index, std::uint32_t base) noexcept;

// Halton points in [0,1)^dims with an optional Cranley-Patterson rotation
// derived from `seed` (seed 0 leaves the sequence unrotated).
class HaltonSequence {
public:
    explicit HaltonSequence(std::size_t dims, std::uint64_t seed = 0);

    std::size_t dims() const noexcept { return dims_; }
    void point(std::uint64_t index, std::span<double> out) const;
    std::vector<double> point(std::uint64_t index) const;

private:
    std::size_t dims_;
    std::vector<double> shift_;
};

// Samples of the box [lower, upper]: `count` Halton points first, then every
// vertex of the box when there are at most 2^12 of them.
std::vector<std::vector<double>> box_samples(std::span<const double> lower,
                                             std::span<const double> upper, std::size_t count,
                                             std::uint64_t seed);

}  // namespace mhc
