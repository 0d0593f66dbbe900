#pragma once

#include <cstdint>
#include <vector>

#include "shearless/dynamics.hpp"

namespace shearless {

/// Active particles of N mean-field coupled non-twist maps plus the mean-field
/// amplitude b and phase theta.
struct MeanFieldState {
  std::vector<Vec2> active;
  double b = 0.125;
  double theta = 0.0;
  std::vector<double> gammas;
  double a = 0.08;

  /// Throws InvalidInput unless len(active) == len(gammas) and b >= 0.
  void validate() const;
};

/// Mean-field parameters seen by a passive particle: step n of the passive map
/// uses b[n + 1] and theta[n]. Both vectors hold n_steps + 1 entries.
struct MeanFieldSchedule {
  double a = 0.08;
  std::vector<double> b;
  std::vector<double> theta;

  long steps() const { return static_cast<long>(b.size()) - 1; }
};

struct MeanFieldRun {
  MeanFieldState state;
  MeanFieldSchedule schedule;
};

/// Advance the active ensemble and (b, theta) jointly for n_steps iterations:
///   eta_n     = sum_i gamma_i sin(2 pi x_n^i - theta_n)
///   b_{n+1}   = sqrt(b_n^2 + eta_n^2) + eta_n
///   theta_{n+1} = theta_n + (d eta_n / d theta_n) / b_{n+1}
/// The sum runs over all N active particles. Throws NumericalBlowup when b
/// becomes non-finite.
MeanFieldRun mean_field_evolve(MeanFieldState state, long n_steps);

/// n active particles drawn (seeded) from Gaussian clouds around the two
/// elliptic period-one islands of the SNTM at (0, -1) and (1/2, 1).
MeanFieldState island_ensemble(std::size_t n, double gamma, double a, double b0, double theta0,
                               std::uint64_t seed, double spread = 0.05);

/// Passive-particle map driven by a precomputed mean-field schedule.
DynamicalSystem passive_sntm(MeanFieldSchedule schedule);

}  // namespace shearless
