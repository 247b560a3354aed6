#include "mobiman/control/wheel_controller.hpp"

#include <algorithm>

namespace mobiman::control {

WheelSpeeds WheelController::update(double v_desired, double omega_desired,
                                    double v_measured, double omega_measured,
                                    double dt) {
  integral_v_ += config_.ki_linear * (v_desired - v_measured) * dt;
  integral_v_ = std::clamp(integral_v_, -config_.integral_limit_linear,
                           config_.integral_limit_linear);
  integral_omega_ += config_.ki_angular * (omega_desired - omega_measured) * dt;
  integral_omega_ = std::clamp(integral_omega_, -config_.integral_limit_angular,
                               config_.integral_limit_angular);
  return base_velocity_to_wheels(v_desired + integral_v_,
                                 omega_desired + integral_omega_,
                                 config_.wheel_radius, config_.track_width);
}

}  // namespace mobiman::control
