#pragma once

#include <span>
#include <string>
#include <vector>

namespace rte {

/// Right-continuous piecewise-constant function stored at its jump times.
class StepCurve {
public:
    StepCurve() = default;
    explicit StepCurve(double initial) : initial_(initial) {}
    /// `times` must be strictly increasing and the same length as `values`.
    StepCurve(std::vector<double> times, std::vector<double> values, double initial);

    /// Value at the last jump <= t, or the initial value.
    double at(double t) const;
    /// Limit from the left, i.e. the value at the last jump < t.
    double left_limit(double t) const;
    double jump_at(double t) const { return at(t) - left_limit(t); }

    std::span<const double> times() const noexcept { return times_; }
    std::span<const double> values() const noexcept { return values_; }
    double initial() const noexcept { return initial_; }
    bool empty() const noexcept { return times_.empty(); }

    /// Two whitespace-separated columns, `time value`, starting at time 0.
    std::string to_text() const;

private:
    std::vector<double> times_;
    std::vector<double> values_;
    double initial_ = 0.0;
};

}  // namespace rte
