#pragma once

#include <stdexcept>

namespace feddro {

// Smoothness / Lipschitz / variance / heterogeneity constants declared by a
// problem.  They feed the theory-derived hyperparameter schedules.
struct LipschitzConstants {
  double L_f = 0.0;  // smoothness of the outer map
  double L_h = 0.0;  // smoothness of the non-compositional part
  double L_g = 0.0;  // smoothness of the inner map
  double B_f = 0.0;  // Lipschitz constant of the outer map
  double B_g = 0.0;  // mean-squared Lipschitz constant of the inner map
  double sigma_h = 0.0;
  double sigma_g = 0.0;
  double delta_h = 0.0;
  double delta_g = 0.0;

  void validate() const {
    if (L_f < 0 || L_h < 0 || L_g < 0 || B_f < 0 || B_g < 0 || sigma_h < 0 ||
        sigma_g < 0 || delta_h < 0 || delta_g < 0)
      throw std::invalid_argument("LipschitzConstants: negative entry");
  }
};

}  // namespace feddro
