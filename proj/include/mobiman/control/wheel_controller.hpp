#pragma once

#include <stdexcept>

namespace mobiman::control {

struct WheelSpeeds {
  double left = 0.0;   // rad/s
  double right = 0.0;  // rad/s
};

// Velocity-level base tracking: feed-forward wheel speeds from the inverse
// differential-drive model plus an integral correction on the measured base
// velocity error, which absorbs wheel slip. The integrators are clamped
// (anti-windup) so a persistent blockage cannot store unbounded commands.
class WheelController {
 public:
  struct Config {
    double wheel_radius = 0.1;  // m
    double track_width = 0.5;   // m
    double ki_linear = 2.0;     // 1/s
    double ki_angular = 2.0;    // 1/s
    double integral_limit_linear = 0.3;   // m/s
    double integral_limit_angular = 0.5;  // rad/s

    // Throws std::runtime_error on nonpositive geometry or limits.
    void validate() const {
      if (!(wheel_radius > 0.0) || !(track_width > 0.0))
        throw std::runtime_error("wheel controller geometry must be positive");
      if (integral_limit_linear < 0.0 || integral_limit_angular < 0.0)
        throw std::runtime_error("wheel controller integral limits must be >= 0");
    }
  };

  explicit WheelController(const Config& config) : config_(config) {
    config.validate();
  }

  // One control tick: desired and measured base twist, elapsed time.
  WheelSpeeds update(double v_desired, double omega_desired, double v_measured,
                     double omega_measured, double dt);

  void reset() {
    integral_v_ = 0.0;
    integral_omega_ = 0.0;
  }

  double integral_linear() const { return integral_v_; }
  double integral_angular() const { return integral_omega_; }

 private:
  Config config_;
  double integral_v_ = 0.0;
  double integral_omega_ = 0.0;
};

// Inverse differential-drive model: base twist to wheel speeds.
inline WheelSpeeds base_velocity_to_wheels(double v, double omega, double wheel_radius,
                                           double track_width) {
  return {(v - 0.5 * track_width * omega) / wheel_radius,
          (v + 0.5 * track_width * omega) / wheel_radius};
}

}  // namespace mobiman::control
