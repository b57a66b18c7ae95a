#include "mhc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mhc/error.hpp"

namespace mhc {

Grid::Grid(std::vector<Axis> w_axes, std::vector<Axis> z_axes, std::size_t t_steps, double horizon)
    : n_(w_axes.size()), t_steps_(t_steps), horizon_(horizon)
{
    require(n_ >= 1 && z_axes.size() == n_, ErrorKind::dimension_mismatch,
            "grid needs one w axis and one z axis per agent");
    require(2 * n_ <= kMaxStateDims, ErrorKind::invalid_argument,
            "HJB grids are limited to n <= 2 agents (state dimension <= 4)");
    require(t_steps >= 1, ErrorKind::invalid_argument, "grid needs at least one time step");
    require(horizon > 0.0, ErrorKind::invalid_argument, "grid horizon must be positive");
    axes_ = std::move(w_axes);
    axes_.insert(axes_.end(), z_axes.begin(), z_axes.end());
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        const auto& ax = axes_[d];
        const std::string name = (d < n_ ? "w" : "z") + std::to_string(d % n_ + 1);
        require(ax.points == 1 || ax.points >= 3, ErrorKind::invalid_argument,
                "axis " + name + " needs 1 or at least 3 points");
        require(std::isfinite(ax.lo) && std::isfinite(ax.hi), ErrorKind::invalid_argument,
                "axis " + name + " bounds must be finite");
        require(ax.points == 1 || ax.hi > ax.lo, ErrorKind::invalid_argument,
                "axis " + name + " needs hi > lo");
    }
    strides_.assign(axes_.size(), 1);
    nodes_ = 1;
    for (std::size_t d = axes_.size(); d-- > 0;) {
        strides_[d] = nodes_;
        nodes_ *= axes_[d].points;
    }
}

void Grid::unravel(std::size_t node, std::span<std::size_t> index) const
{
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        index[d] = node / strides_[d];
        node %= strides_[d];
    }
}

std::size_t Grid::ravel(std::span<const std::size_t> index) const
{
    std::size_t node = 0;
    for (std::size_t d = 0; d < axes_.size(); ++d) node += index[d] * strides_[d];
    return node;
}

void Grid::coordinates(std::size_t node, std::span<double> out) const
{
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        out[d] = axes_[d].at(node / strides_[d]);
        node %= strides_[d];
    }
}

std::vector<double> Grid::coordinates(std::size_t node) const
{
    std::vector<double> out(axes_.size());
    coordinates(node, out);
    return out;
}

Grid::Corners Grid::locate(std::span<const double> point) const
{
    Corners c;
    std::array<std::size_t, kMaxStateDims> base{};
    std::array<double, kMaxStateDims> frac{};
    std::array<bool, kMaxStateDims> flat{};
    for (std::size_t d = 0; d < axes_.size(); ++d) {
        const auto& ax = axes_[d];
        if (ax.points == 1) {
            flat[d] = true;
            continue;
        }
        const double s = (std::clamp(point[d], ax.lo, ax.hi) - ax.lo) / ax.step();
        const auto k = std::min(static_cast<std::size_t>(s), ax.points - 2);
        base[d] = k;
        frac[d] = std::clamp(s - static_cast<double>(k), 0.0, 1.0);
    }
    const std::size_t corners = std::size_t{1} << axes_.size();
    for (std::size_t v = 0; v < corners; ++v) {
        double w = 1.0;
        std::size_t node = 0;
        bool skip = false;
        for (std::size_t d = 0; d < axes_.size(); ++d) {
            const bool up = (v >> d) & 1U;
            if (flat[d]) {
                if (up) skip = true;
                continue;
            }
            w *= up ? frac[d] : 1.0 - frac[d];
            node += (base[d] + (up ? 1 : 0)) * strides_[d];
        }
        if (skip) continue;
        c.nodes[c.count] = node;
        c.weights[c.count] = w;
        ++c.count;
    }
    return c;
}

double Grid::interpolate(std::span<const double> values, std::span<const double> point) const
{
    const auto c = locate(point);
    double v = 0.0;
    for (std::size_t k = 0; k < c.count; ++k) v += c.weights[k] * values[c.nodes[k]];
    return v;
}

Grid Grid::refined() const
{
    std::vector<Axis> w(axes_.begin(), axes_.begin() + static_cast<std::ptrdiff_t>(n_));
    std::vector<Axis> z(axes_.begin() + static_cast<std::ptrdiff_t>(n_), axes_.end());
    for (auto* group : {&w, &z})
        for (auto& ax : *group)
            if (ax.points > 1) ax.points = 2 * ax.points - 1;
    return Grid(std::move(w), std::move(z), 2 * t_steps_, horizon_);
}

std::size_t PolicyField::time_index(double t) const
{
    const double s = t / grid.dt();
    if (!(s > 0.0)) return 0;
    const auto k = static_cast<std::size_t>(std::floor(s + 1e-9));
    return std::min(k, slices.size() - 1);
}

void PolicyField::controls(double t, std::span<const double> state, std::span<double> y,
                           std::span<double> c) const
{
    require(!slices.empty(), ErrorKind::policy_lookup, "policy field is empty");
    for (double s : state)
        require(std::isfinite(s), ErrorKind::policy_lookup, "policy lookup at a non-finite state");
    const auto& slice = slices[time_index(t)];
    const std::size_t n = grid.n_agents();
    const auto corners = grid.locate(state);
    std::fill(y.begin(), y.end(), 0.0);
    std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t k = 0; k < corners.count; ++k) {
        const double w = corners.weights[k];
        const std::size_t base = corners.nodes[k] * n;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] += w * slice.y[base + i];
            c[i] += w * slice.c[base + i];
        }
    }
}

}  // namespace mhc
