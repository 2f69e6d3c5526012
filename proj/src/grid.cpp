#include "nmepi/grid.h"

#include "nmepi/errors.h"

#include <cmath>
#include <string>

namespace nmepi {

namespace {
constexpr double kNodeTol = 1e-9;
}

TimeGrid::TimeGrid(double horizon, double dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ValidationError("grid.dt must be positive and finite, got " + std::to_string(dt));
    }
    if (!(horizon >= dt) || !std::isfinite(horizon)) {
        throw ValidationError("grid.horizon must be finite and at least grid.dt");
    }
    const double ratio = horizon / dt;
    const double steps = std::round(ratio);
    if (std::abs(ratio - steps) > kNodeTol * std::max(1.0, ratio)) {
        throw ValidationError("grid.dt must divide grid.horizon");
    }
    dt_ = dt;
    steps_ = static_cast<std::size_t>(steps);
}

TimeGrid TimeGrid::from_times(std::span<const double> times)
{
    if (times.size() < 2) {
        throw ValidationError("grid needs at least two nodes");
    }
    if (std::abs(times[0]) > 0.0) {
        throw ValidationError("grid must start at t = 0");
    }
    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) {
        throw ValidationError("grid nodes must be increasing");
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (std::abs(times[k] - static_cast<double>(k) * dt) > kNodeTol * std::max(1.0, times[k])) {
            throw ValidationError("grid is not uniform at node " + std::to_string(k));
        }
    }
    TimeGrid g;
    g.dt_ = dt;
    g.steps_ = times.size() - 1;
    return g;
}

std::vector<double> TimeGrid::times() const
{
    std::vector<double> out(size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = time(k);
    }
    return out;
}

bool TimeGrid::has_node(double t) const
{
    const double r = t / dt_;
    const double k = std::round(r);
    return k >= 0.0 && k <= static_cast<double>(steps_) && std::abs(r - k) <= kNodeTol * std::max(1.0, r);
}

std::size_t TimeGrid::index_of(double t) const
{
    if (!has_node(t)) {
        throw ValidationError("time " + std::to_string(t) + " is not a grid node");
    }
    return static_cast<std::size_t>(std::round(t / dt_));
}

TimeGrid TimeGrid::refined(std::size_t factor) const
{
    if (factor == 0) {
        throw ValidationError("refinement factor must be positive");
    }
    TimeGrid g;
    g.dt_ = dt_ / static_cast<double>(factor);
    g.steps_ = steps_ * factor;
    return g;
}

std::size_t TimeGrid::refinement_of(const TimeGrid& coarse) const
{
    const double r = coarse.dt_ / dt_;
    const double k = std::round(r);
    if (k < 1.0 || std::abs(r - k) > kNodeTol * r) {
        throw ValidationError("grid step does not refine the coarse grid step");
    }
    const auto factor = static_cast<std::size_t>(k);
    if (coarse.steps_ * factor > steps_) {
        throw ValidationError("fine grid does not cover the coarse grid horizon");
    }
    return factor;
}

bool TimeGrid::operator==(const TimeGrid& other) const
{
    return steps_ == other.steps_ && dt_ == other.dt_;
}

} // namespace nmepi
