#include "rte/step_curve.hpp"

#include <algorithm>
#include <sstream>

#include "rte/errors.hpp"

namespace rte {

StepCurve::StepCurve(std::vector<double> times, std::vector<double> values, double initial)
    : times_(std::move(times)), values_(std::move(values)), initial_(initial) {
    if (times_.size() != values_.size()) throw InvalidParameter("step curve: times and values differ in length");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i - 1] < times_[i])) throw InvalidParameter("step curve: jump times must be strictly increasing");
}

double StepCurve::at(double t) const {
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return initial_;
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double StepCurve::left_limit(double t) const {
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return initial_;
    return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

std::string StepCurve::to_text() const {
    std::ostringstream out;
    out.precision(17);
    out << 0.0 << ' ' << initial_ << '\n';
    for (std::size_t i = 0; i < times_.size(); ++i) out << times_[i] << ' ' << values_[i] << '\n';
    return out.str();
}

}  // namespace rte
