#include "shearless/mean_field.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "shearless/errors.hpp"
#include "shearless/systems.hpp"

namespace shearless {

void MeanFieldState::validate() const {
  if (active.size() != gammas.size()) throw InvalidInput("mean field: one coupling constant per active particle");
  if (!(b >= 0.0)) throw InvalidInput("mean field: b must be non-negative");
}

MeanFieldRun mean_field_evolve(MeanFieldState state, long n_steps) {
  state.validate();
  if (n_steps < 0) throw InvalidInput("mean field: n_steps must be non-negative");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  MeanFieldSchedule schedule;
  schedule.a = state.a;
  schedule.b.reserve(static_cast<std::size_t>(n_steps) + 1);
  schedule.theta.reserve(static_cast<std::size_t>(n_steps) + 1);
  schedule.b.push_back(state.b);
  schedule.theta.push_back(state.theta);
  for (long n = 0; n < n_steps; ++n) {
    double eta = 0.0;
    double deta_dtheta = 0.0;
    for (std::size_t i = 0; i < state.active.size(); ++i) {
      const double phase = two_pi * state.active[i].x - state.theta;
      eta += state.gammas[i] * std::sin(phase);
      deta_dtheta -= state.gammas[i] * std::cos(phase);
    }
    const double b_next = std::sqrt(state.b * state.b + eta * eta) + eta;
    if (!std::isfinite(b_next)) throw NumericalBlowup("mean field: b became non-finite at step " + std::to_string(n + 1));
    for (auto& p : state.active) p = sntm_step(p, state.a, b_next, state.theta);
    const double theta_next = state.theta + deta_dtheta / b_next;
    if (!std::isfinite(theta_next))
      throw NumericalBlowup("mean field: theta became non-finite at step " + std::to_string(n + 1));
    state.b = b_next;
    state.theta = theta_next;
    schedule.b.push_back(state.b);
    schedule.theta.push_back(state.theta);
  }
  return {std::move(state), std::move(schedule)};
}

MeanFieldState island_ensemble(std::size_t n, double gamma, double a, double b0, double theta0,
                               std::uint64_t seed, double spread) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, spread);
  MeanFieldState s;
  s.a = a;
  s.b = b0;
  s.theta = theta0;
  s.active.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 center = (k % 2 == 0) ? Vec2{0.0, -1.0} : Vec2{0.5, 1.0};
    const double dx = jitter(rng);
    const double dy = jitter(rng);
    s.active.push_back(center + Vec2{dx, dy});
  }
  s.gammas.assign(n, gamma);
  return s;
}

DynamicalSystem passive_sntm(MeanFieldSchedule schedule) {
  if (schedule.b.size() != schedule.theta.size() || schedule.b.empty())
    throw InvalidInput("passive map: schedule b/theta lengths differ or are empty");
  const double a = schedule.a;
  return DynamicalSystem::discrete(
      "sntm-passive",
      [a, schedule = std::move(schedule)](const Vec2& p, long n) {
        if (n < 0 || n + 1 >= static_cast<long>(schedule.b.size()))
          throw InvalidInput("passive map: step " + std::to_string(n) + " beyond the mean-field schedule");
        return sntm_step(p, a, schedule.b[static_cast<std::size_t>(n + 1)],
                         schedule.theta[static_cast<std::size_t>(n)]);
      },
      Rect{-0.5, 0.5, -2.0, 2.0}, 1.0);
}

}  // namespace shearless
