#pragma once

// Legitimate mobility kernels. Each model advances one UE by one-minute
// ticks and owns its RNG substream, so UEs can be simulated in any order or
// in parallel with identical results.
//
// advance(t) must be called with t = 0, 1, 2, ... and returns the position
// at minute t.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "mobsim/rng.hpp"
#include "mobsim/topology.hpp"

namespace mobsim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double dist(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

class MobilityModel {
public:
    virtual ~MobilityModel() = default;
    virtual Vec2 advance(std::int64_t t_min) = 0;
    // Hard cap on displacement per minute; used by plausibility checks.
    virtual double max_speed_m_per_min() const = 0;
};

// --- Commuter (periodic home/office pattern) --------------------------------

struct WpParams {
    double commute_speed_m_per_min = 500.0;
    double depart_home_lo_min = 420.0;   // 07:00
    double depart_home_hi_min = 540.0;   // 09:00
    double depart_office_lo_min = 960.0;  // 16:00
    double depart_office_hi_min = 1140.0; // 19:00
};

class WpModel final : public MobilityModel {
public:
    WpModel(const WpParams& params, Bounds bounds, Rng rng)
        : p_(params), bounds_(bounds), rng_(rng) {
        if (p_.commute_speed_m_per_min <= 0.0)
            throw std::invalid_argument("commute speed must be positive");
        if (!(p_.depart_home_lo_min <= p_.depart_home_hi_min &&
              p_.depart_office_lo_min <= p_.depart_office_hi_min))
            throw std::invalid_argument("departure windows are inverted");
        const double worst_commute = bounds_.diagonal() / p_.commute_speed_m_per_min;
        if (p_.depart_home_hi_min + worst_commute > p_.depart_office_lo_min)
            throw std::invalid_argument("morning commute can overrun office departure");
        if (p_.depart_office_hi_min + worst_commute > 1440.0)
            throw std::invalid_argument("evening commute can cross midnight");
        home_.x = rng_.uniform(bounds_.min_x, bounds_.max_x);
        home_.y = rng_.uniform(bounds_.min_y, bounds_.max_y);
        office_.x = rng_.uniform(bounds_.min_x, bounds_.max_x);
        office_.y = rng_.uniform(bounds_.min_y, bounds_.max_y);
    }

    Vec2 advance(std::int64_t t_min) override {
        const std::int64_t day = t_min / 1440;
        const double tod = static_cast<double>(t_min % 1440);
        while (static_cast<std::int64_t>(day_times_.size()) <= day) {
            std::array<double, 2> times;
            times[0] = rng_.uniform(p_.depart_home_lo_min, p_.depart_home_hi_min);
            times[1] = rng_.uniform(p_.depart_office_lo_min, p_.depart_office_hi_min);
            day_times_.push_back(times);
        }
        const auto& [depart_home, depart_office] = day_times_[static_cast<std::size_t>(day)];
        if (tod < depart_home) return home_;
        if (tod < depart_office)
            return along(home_, office_, (tod - depart_home) * p_.commute_speed_m_per_min);
        return along(office_, home_, (tod - depart_office) * p_.commute_speed_m_per_min);
    }

    double max_speed_m_per_min() const override { return p_.commute_speed_m_per_min; }

    const Vec2& home() const { return home_; }
    const Vec2& office() const { return office_; }

private:
    static Vec2 along(const Vec2& from, const Vec2& to, double travelled) {
        const double d = dist(from, to);
        if (travelled >= d || d == 0.0) return to;
        const double f = travelled / d;
        return {from.x + f * (to.x - from.x), from.y + f * (to.y - from.y)};
    }

    WpParams p_;
    Bounds bounds_;
    Rng rng_;
    Vec2 home_;
    Vec2 office_;
    std::vector<std::array<double, 2>> day_times_;
};

// --- Random waypoint ----------------------------------------------------------

struct RwpParams {
    double move_probability = 0.001;  // per paused minute
    double speed_lo_m_per_min = 200.0;
    double speed_hi_m_per_min = 700.0;
};

class RwpModel final : public MobilityModel {
public:
    RwpModel(const RwpParams& params, Bounds bounds, Rng rng)
        : p_(params), bounds_(bounds), rng_(rng) {
        if (!(p_.move_probability >= 0.0 && p_.move_probability <= 1.0))
            throw std::invalid_argument("move probability outside [0, 1]");
        if (!(0.0 < p_.speed_lo_m_per_min && p_.speed_lo_m_per_min <= p_.speed_hi_m_per_min))
            throw std::invalid_argument("speed range is invalid");
        pos_.x = rng_.uniform(bounds_.min_x, bounds_.max_x);
        pos_.y = rng_.uniform(bounds_.min_y, bounds_.max_y);
    }

    Vec2 advance(std::int64_t t_min) override {
        if (t_min == 0) return pos_;
        if (!moving_) {
            if (rng_.bernoulli(p_.move_probability)) {
                dest_.x = rng_.uniform(bounds_.min_x, bounds_.max_x);
                dest_.y = rng_.uniform(bounds_.min_y, bounds_.max_y);
                speed_ = rng_.uniform(p_.speed_lo_m_per_min, p_.speed_hi_m_per_min);
                moving_ = true;
            }
            if (!moving_) return pos_;
        }
        const double d = dist(pos_, dest_);
        if (d <= speed_) {
            pos_ = dest_;
            moving_ = false;
        } else {
            const double f = speed_ / d;
            pos_.x += f * (dest_.x - pos_.x);
            pos_.y += f * (dest_.y - pos_.y);
        }
        return pos_;
    }

    double max_speed_m_per_min() const override { return p_.speed_hi_m_per_min; }

private:
    RwpParams p_;
    Bounds bounds_;
    Rng rng_;
    Vec2 pos_;
    Vec2 dest_;
    double speed_ = 0.0;
    bool moving_ = false;
};

// --- Gauss-Markov ------------------------------------------------------------

struct GmParams {
    double mean_speed_m_per_min = 80.0;
    double speed_stddev = 15.0;
    double direction_stddev = 0.5;  // radians
    double alpha = 0.8;             // memory, 0 = white noise, 1 = constant
    double max_speed_m_per_min = 140.0;
};

class GmModel final : public MobilityModel {
public:
    GmModel(const GmParams& params, Bounds bounds, Rng rng)
        : p_(params), bounds_(bounds), rng_(rng) {
        if (!(p_.alpha >= 0.0 && p_.alpha <= 1.0))
            throw std::invalid_argument("alpha outside [0, 1]");
        if (p_.mean_speed_m_per_min < 0.0 || p_.speed_stddev < 0.0 ||
            p_.direction_stddev < 0.0)
            throw std::invalid_argument("negative speed or stddev");
        if (p_.max_speed_m_per_min < p_.mean_speed_m_per_min)
            throw std::invalid_argument("max speed below mean speed");
        pos_.x = rng_.uniform(bounds_.min_x, bounds_.max_x);
        pos_.y = rng_.uniform(bounds_.min_y, bounds_.max_y);
        mean_dir_ = rng_.uniform(0.0, 6.283185307179586476925286766559);
        speed_ = p_.mean_speed_m_per_min;
        dir_ = mean_dir_;
    }

    Vec2 advance(std::int64_t t_min) override {
        if (t_min == 0) return pos_;
        const double noise = std::sqrt(1.0 - p_.alpha * p_.alpha);
        speed_ = p_.alpha * speed_ + (1.0 - p_.alpha) * p_.mean_speed_m_per_min +
                 noise * p_.speed_stddev * rng_.normal();
        speed_ = std::clamp(speed_, 0.0, p_.max_speed_m_per_min);
        dir_ = p_.alpha * dir_ + (1.0 - p_.alpha) * mean_dir_ +
               noise * p_.direction_stddev * rng_.normal();
        double nx = pos_.x + speed_ * std::cos(dir_);
        double ny = pos_.y + speed_ * std::sin(dir_);
        if (nx < bounds_.min_x || nx > bounds_.max_x) {
            nx = nx < bounds_.min_x ? 2.0 * bounds_.min_x - nx : 2.0 * bounds_.max_x - nx;
            dir_ = 3.14159265358979323846 - dir_;
            mean_dir_ = 3.14159265358979323846 - mean_dir_;
        }
        if (ny < bounds_.min_y || ny > bounds_.max_y) {
            ny = ny < bounds_.min_y ? 2.0 * bounds_.min_y - ny : 2.0 * bounds_.max_y - ny;
            dir_ = -dir_;
            mean_dir_ = -mean_dir_;
        }
        pos_.x = bounds_.clamp_x(nx);
        pos_.y = bounds_.clamp_y(ny);
        normalize(dir_);
        normalize(mean_dir_);
        return pos_;
    }

    double max_speed_m_per_min() const override { return p_.max_speed_m_per_min; }

private:
    static void normalize(double& angle) {
        constexpr double two_pi = 6.283185307179586476925286766559;
        while (angle <= -3.14159265358979323846) angle += two_pi;
        while (angle > 3.14159265358979323846) angle -= two_pi;
    }

    GmParams p_;
    Bounds bounds_;
    Rng rng_;
    Vec2 pos_;
    double mean_dir_ = 0.0;
    double speed_ = 0.0;
    double dir_ = 0.0;
};

}  // namespace mobsim
