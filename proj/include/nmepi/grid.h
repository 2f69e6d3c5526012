#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nmepi {

/// Uniform time grid t_k = k * dt for k = 0..steps.
class TimeGrid {
public:
    TimeGrid() = default;
    /// Throws ValidationError unless dt > 0, horizon >= dt and dt divides horizon.
    TimeGrid(double horizon, double dt);

    /// Accepts explicit node times; rejects anything that is not uniform from 0.
    static TimeGrid from_times(std::span<const double> times);

    double dt() const { return dt_; }
    std::size_t steps() const { return steps_; }
    std::size_t size() const { return steps_ + 1; }
    double horizon() const { return static_cast<double>(steps_) * dt_; }
    double time(std::size_t k) const { return static_cast<double>(k) * dt_; }
    std::vector<double> times() const;

    bool has_node(double t) const;
    /// Index of the node at t; throws ValidationError when t is not a node.
    std::size_t index_of(double t) const;

    /// Grid with dt / factor over the same horizon.
    TimeGrid refined(std::size_t factor) const;
    /// Integer r with other.dt == r * dt and other.horizon <= horizon; throws otherwise.
    std::size_t refinement_of(const TimeGrid& coarse) const;

    bool operator==(const TimeGrid& other) const;

private:
    double dt_ = 1.0;
    std::size_t steps_ = 0;
};

} // namespace nmepi
