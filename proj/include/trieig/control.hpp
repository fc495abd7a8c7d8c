#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "trieig/errors.hpp"
#include "trieig/linalg.hpp"

namespace trieig {

/// How sampled control values are read between sample points.
enum class Interp { piecewise_constant_left, linear };

/// Control signal alpha(.): constant, theta-periodic sampled, arbitrary
/// sampled, or state feedback alpha(y). Time-based kinds are evaluated with
/// eval(t); the feedback kind is evaluated with eval_state(y) by the
/// integrator.
class ControlSignal {
public:
    enum class Kind { constant, periodic, sampled, feedback };

    static ControlSignal constant(double alpha) {
        ControlSignal c;
        c.kind_ = Kind::constant;
        c.const_value_ = alpha;
        return c;
    }

    /// values sampled at k * theta / values.size() on [0, theta)
    static ControlSignal periodic(std::vector<double> values, double theta,
                                  Interp interp = Interp::piecewise_constant_left) {
        if (!(theta > 0.0)) throw validation_error("ControlSignal: period must be positive");
        if (values.size() < 8)
            throw validation_error("ControlSignal: need >= 8 samples per period");
        ControlSignal c;
        c.kind_ = Kind::periodic;
        c.theta_ = theta;
        c.values_ = std::move(values);
        c.interp_ = interp;
        return c;
    }

    static ControlSignal sampled(std::vector<double> times, std::vector<double> values,
                                 Interp interp = Interp::piecewise_constant_left) {
        if (times.size() != values.size() || times.size() < 2)
            throw validation_error("ControlSignal: sampled needs matching times/values, >= 2");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1]))
                throw validation_error("ControlSignal: sample times must increase");
        ControlSignal c;
        c.kind_ = Kind::sampled;
        c.times_ = std::move(times);
        c.values_ = std::move(values);
        c.interp_ = interp;
        return c;
    }

    static ControlSignal feedback(std::function<double(const Vec3&)> policy) {
        ControlSignal c;
        c.kind_ = Kind::feedback;
        c.policy_ = std::move(policy);
        return c;
    }

    /// Convenience builders for the two perturbation shapes used throughout.
    static ControlSignal sine(double mean, double amplitude, double theta, int samples = 2048) {
        std::vector<double> v(samples);
        for (int i = 0; i < samples; ++i)
            v[i] = mean + amplitude * std::sin(2.0 * 3.14159265358979323846 * i / samples);
        return periodic(std::move(v), theta, Interp::linear);
    }
    static ControlSignal square(double mean, double amplitude, double theta, int samples = 2048) {
        std::vector<double> v(samples);
        for (int i = 0; i < samples; ++i)
            v[i] = mean + (2 * i < samples ? amplitude : -amplitude);
        return periodic(std::move(v), theta, Interp::piecewise_constant_left);
    }

    Kind kind() const { return kind_; }
    bool is_feedback() const { return kind_ == Kind::feedback; }
    double period() const { return theta_; }
    const std::vector<double>& samples() const { return values_; }

    double eval(double t) const {
        switch (kind_) {
        case Kind::constant:
            return const_value_;
        case Kind::periodic: {
            const std::size_t n = values_.size();
            double s = std::fmod(t, theta_);
            if (s < 0.0) s += theta_;
            const double x = s / theta_ * static_cast<double>(n);
            const std::size_t i = std::min(static_cast<std::size_t>(x), n - 1);
            if (interp_ == Interp::piecewise_constant_left) return values_[i];
            const double f = x - static_cast<double>(i);
            const double next = values_[(i + 1) % n];
            return values_[i] + f * (next - values_[i]);
        }
        case Kind::sampled: {
            if (t <= times_.front()) return values_.front();
            if (t >= times_.back()) return values_.back();
            std::size_t lo = 0, hi = times_.size() - 1;
            while (hi - lo > 1) {
                std::size_t mid = (lo + hi) / 2;
                (times_[mid] <= t ? lo : hi) = mid;
            }
            if (interp_ == Interp::piecewise_constant_left) return values_[lo];
            const double f = (t - times_[lo]) / (times_[hi] - times_[lo]);
            return values_[lo] + f * (values_[hi] - values_[lo]);
        }
        case Kind::feedback:
            throw validation_error("ControlSignal: feedback control has no time evaluation");
        }
        return const_value_;
    }

    double eval_state(const Vec3& y) const {
        if (kind_ != Kind::feedback)
            throw validation_error("ControlSignal: eval_state on a time-based control");
        return policy_(y);
    }

    /// All sampled values within [lo - slack, hi + slack]?
    bool within_bounds(double lo, double hi, double slack = 0.0) const {
        if (kind_ == Kind::constant)
            return const_value_ >= lo - slack && const_value_ <= hi + slack;
        if (kind_ == Kind::feedback) return true; // policy output checked by the integrator
        for (double v : values_)
            if (v < lo - slack || v > hi + slack) return false;
        return true;
    }

private:
    Kind kind_ = Kind::constant;
    double const_value_ = 0.0;
    double theta_ = 0.0;
    std::vector<double> times_;
    std::vector<double> values_;
    Interp interp_ = Interp::piecewise_constant_left;
    std::function<double(const Vec3&)> policy_;
};

} // namespace trieig
