#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mhc {

struct Axis {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t points = 1;

    double step() const noexcept { return points > 1 ? (hi - lo) / static_cast<double>(points - 1) : 0.0; }
    double at(std::size_t k) const noexcept { return points > 1 ? lo + step() * static_cast<double>(k) : lo; }
};

// Uniform tensor grid over (w_1..w_n, z_1..z_n) with `t_steps` explicit time
// steps over [0, horizon]. Axes with a single point are degenerate: the state
// is frozen along them and every derivative in that direction is zero.
class Grid {
public:
    static constexpr std::size_t kMaxStateDims = 4;
    static constexpr std::size_t kMaxCorners = std::size_t{1} << kMaxStateDims;

    Grid() = default;
    Grid(std::vector<Axis> w_axes, std::vector<Axis> z_axes, std::size_t t_steps, double horizon);

    std::size_t n_agents() const noexcept { return n_; }
    std::size_t dims() const noexcept { return axes_.size(); }
    const Axis& axis(std::size_t d) const { return axes_[d]; }
    const std::vector<Axis>& axes() const noexcept { return axes_; }
    std::size_t t_steps() const noexcept { return t_steps_; }
    double horizon() const noexcept { return horizon_; }
    double dt() const noexcept { return horizon_ / static_cast<double>(t_steps_); }
    double time(std::size_t k) const noexcept { return dt() * static_cast<double>(k); }
    std::size_t node_count() const noexcept { return nodes_; }
    std::size_t stride(std::size_t d) const { return strides_[d]; }

    void unravel(std::size_t node, std::span<std::size_t> index) const;
    std::size_t ravel(std::span<const std::size_t> index) const;
    // (w_1..w_n, z_1..z_n) of a node
    void coordinates(std::size_t node, std::span<double> out) const;
    std::vector<double> coordinates(std::size_t node) const;

    struct Corners {
        std::array<std::size_t, kMaxCorners> nodes{};
        std::array<double, kMaxCorners> weights{};
        std::size_t count = 0;
    };
    // Multilinear interpolation stencil; the point is clamped to the grid hull.
    Corners locate(std::span<const double> point) const;
    double interpolate(std::span<const double> values, std::span<const double> point) const;

    // Spacing and time step halved: 2p - 1 points per axis, twice the steps.
    Grid refined() const;

private:
    std::size_t n_ = 0;
    std::vector<Axis> axes_;
    std::vector<std::size_t> strides_;
    std::size_t nodes_ = 0;
    std::size_t t_steps_ = 1;
    double horizon_ = 1.0;
};

// F on every (time index, node); slices[k] belongs to t = k * dt.
struct ValueField {
    Grid grid;
    std::vector<std::vector<double>> slices;
    std::size_t first_computed = 0;  // lowest time index already filled

    double at(std::size_t k, std::size_t node) const { return slices[k][node]; }
    double interpolate(std::size_t k, std::span<const double> point) const
    {
        return grid.interpolate(slices[k], point);
    }
};

// Maximising controls per node for time indices 0..t_steps-1 (the control at
// index k acts over [t_k, t_k+1)). Arrays are node-major with n entries each.
struct PolicySlice {
    std::vector<double> y;
    std::vector<double> c;
    std::vector<double> a;
    std::vector<double> value;  // H* at the node
    std::vector<std::uint8_t> multiple;
};

struct PolicyField {
    Grid grid;
    std::vector<PolicySlice> slices;

    std::size_t time_index(double t) const;
    // Multilinear interpolation of (y, c) at time t and state (w, z).
    void controls(double t, std::span<const double> state, std::span<double> y, std::span<double> c) const;
};

}  // namespace mhc
