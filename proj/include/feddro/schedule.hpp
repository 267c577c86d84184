#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "feddro/constants.hpp"

namespace feddro {

// Smoothness constant of the composed objective: L_h + B_f L_g + B_g^2 L_f.
inline double compute_L_phi(const LipschitzConstants& c) {
  c.validate();
  return c.L_h + c.B_f * c.L_g + c.B_g * c.B_g * c.L_f;
}

// eta = sqrt(|b| K / T)
inline double derive_stepsize(int b, int K, int T) {
  if (b < 1 || K < 1 || T < 1) throw std::invalid_argument("derive_stepsize: nonpositive input");
  return std::sqrt(static_cast<double>(b) * K / T);
}

struct BetaResult {
  double beta = 1.0;
  bool clamped = false;
};

// beta = 4 B_g^4 L_f^2 eta, clamped into [0, 1].  The clamp flag is surfaced so
// schedules can report it (the raw formula exceeds 1 for large constants).
inline BetaResult derive_beta(const LipschitzConstants& c, double eta) {
  if (eta <= 0.0) throw std::invalid_argument("derive_beta: nonpositive eta");
  const double b4 = c.B_g * c.B_g * c.B_g * c.B_g;
  const double raw = 4.0 * b4 * c.L_f * c.L_f * eta;
  if (raw > 1.0) return {1.0, true};
  return {raw, false};
}

// Burn-in horizon below which the theory step-size bound is not guaranteed.
inline double compute_T_threshold(const LipschitzConstants& c, int b, int K, int I) {
  if (b < 1 || K < 1 || I < 1) throw std::invalid_argument("compute_T_threshold: nonpositive input");
  const double bK = static_cast<double>(b) * K;
  const double L_phi = compute_L_phi(c);
  const double Bg2 = c.B_g * c.B_g;
  const double Bg4 = Bg2 * Bg2;
  const double Lh2 = c.L_h * c.L_h;
  const double BfLg2 = c.B_f * c.B_f * c.L_g * c.L_g;
  const double Lf2 = c.L_f * c.L_f;

  const double term1 = 4.0 * std::pow(L_phi * bK + 8.0 * Bg2, 2) / bK;
  const double denom = Lh2 + 2.0 * BfLg2 + 4.0 * Bg4 * Lf2;
  if (denom == 0.0) throw std::invalid_argument("compute_T_threshold: degenerate constants");
  const double term2 = Bg4 * std::pow(96.0 * Lh2 + 96.0 * BfLg2, 2) / (bK * denom * denom);
  const double term3 = (216.0 * Lh2 + 216.0 * BfLg2) * I * I * bK;
  return std::max({term1, term2, term3});
}

// I_max = max(1, floor(T^{1/4} / (bK)^{3/4}))
inline int max_local_updates(int T, int b, int K) {
  if (b < 1 || K < 1 || T < 1) throw std::invalid_argument("max_local_updates: nonpositive input");
  const double raw = std::pow(static_cast<double>(T), 0.25) /
                     std::pow(static_cast<double>(b) * K, 0.75);
  return std::max(1, static_cast<int>(std::floor(raw)));
}

struct TheoryConstants {
  double L_bar_fg = 0.0;      // 10 L_h^2 + B_f^2 L_g^2 + 40 B_g^4 L_f^2 (as printed)
  double L_bar_fg_alt = 0.0;  // variant with 20 B_f^2 L_g^2 (see note below)
  double c_beta = 0.0;        // 4 B_g^4 L_f^2
  double C_sigma_h = 0.0;
  double C_sigma_g = 0.0;
  double C_delta_h = 0.0;
  double C_delta_g = 0.0;
  // The printed L_bar definition disagrees with the 20 B_f^2 L_g^2 pattern in
  // the surrounding bounds; both values are exposed, the printed one is used.
  bool l_bar_discrepancy = false;
};

inline TheoryConstants compute_theory_constants(const LipschitzConstants& c,
                                                bool use_alt_l_bar = false) {
  c.validate();
  TheoryConstants tc;
  const double Lh2 = c.L_h * c.L_h;
  const double BfLg2 = c.B_f * c.B_f * c.L_g * c.L_g;
  const double Bg2 = c.B_g * c.B_g;
  const double Bg4 = Bg2 * Bg2;
  const double Bf2 = c.B_f * c.B_f;
  const double L_phi = compute_L_phi(c);

  tc.L_bar_fg = 10.0 * Lh2 + BfLg2 + 40.0 * Bg4 * c.L_f * c.L_f;
  tc.L_bar_fg_alt = 10.0 * Lh2 + 20.0 * BfLg2 + 40.0 * Bg4 * c.L_f * c.L_f;
  tc.l_bar_discrepancy = (tc.L_bar_fg != tc.L_bar_fg_alt);
  const double lbar = use_alt_l_bar ? tc.L_bar_fg_alt : tc.L_bar_fg;
  tc.c_beta = 4.0 * Bg4 * c.L_f * c.L_f;
  tc.C_sigma_h = 2.0 * lbar + 4.0 * L_phi + 8.0 * Bg2;
  tc.C_sigma_g = 2.0 * Bf2 * lbar + 4.0 * L_phi * Bf2 + 4.0 * tc.c_beta * tc.c_beta +
                 8.0 * Bf2 * Bg2;
  tc.C_delta_h = 6.0 * lbar + 96.0 * Bg2;
  tc.C_delta_g = 6.0 * Bf2 * lbar + 96.0 * Bf2 * Bg2;
  return tc;
}

// Full schedule bundle consumed by runs configured in "theory" mode.
struct TheorySchedule {
  double eta = 0.0;
  double beta = 0.0;
  bool beta_clamped = false;
  double T_th = 0.0;
  int I_max = 1;
  TheoryConstants constants;
};

inline TheorySchedule derive_theory_schedule(const LipschitzConstants& c, int b, int K, int T,
                                             int I) {
  TheorySchedule s;
  s.eta = derive_stepsize(b, K, T);
  const BetaResult br = derive_beta(c, s.eta);
  s.beta = br.beta;
  s.beta_clamped = br.clamped;
  s.T_th = compute_T_threshold(c, b, K, I);
  s.I_max = max_local_updates(T, b, K);
  s.constants = compute_theory_constants(c);
  return s;
}

}  // namespace feddro
