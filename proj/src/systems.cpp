#include "shearless/systems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "shearless/errors.hpp"

namespace shearless {

DynamicalSystem canonical_shear_flow() {
  return DynamicalSystem::continuous(
      "canonical-shear", [](const Vec2& p, double) { return Vec2{1.0 - p.y * p.y, 0.0}; },
      Rect{-1.0, 1.0, -1.0, 1.0}, 2.0);
}

DynamicalSystem ftle_counterexample_flow(Rect domain) {
  return DynamicalSystem::continuous(
      "ftle-counterexample",
      [](const Vec2& p, double) {
        const double y2 = p.y * p.y;
        return Vec2{p.x * (1.0 + 3.0 * y2), -p.y - p.y * y2};
      },
      domain);
}

DynamicalSystem rigid_rotation_flow(Rect domain) {
  return DynamicalSystem::continuous(
      "rigid-rotation", [](const Vec2& p, double) { return Vec2{-p.y, p.x}; }, domain);
}

DynamicalSystem uniform_flow(Vec2 velocity, Rect domain) {
  return DynamicalSystem::continuous(
      "uniform", [velocity](const Vec2&, double) { return velocity; }, domain);
}

Vec2 sntm_step(const Vec2& p, double a, double b, double theta) {
  const double y = p.y - b * std::sin(2.0 * std::numbers::pi * p.x - theta);
  const double x = p.x + a * (1.0 - y * y);
  return {x, y};
}

DynamicalSystem standard_nontwist_map(double a, double b) {
  std::ostringstream id;
  id << "sntm(a=" << a << ",b=" << b << ")";
  return DynamicalSystem::discrete(
      id.str(), [a, b](const Vec2& p, long) { return sntm_step(p, a, b, 0.0); },
      Rect{-0.5, 0.5, -2.0, 2.0}, 1.0);
}

std::array<Vec2, 2> sntm_indicator_points(double a) {
  const double x = a / 2.0 + 0.25;
  return {Vec2{x, 0.0}, Vec2{x - 0.5, 0.0}};
}

// ---------------------------------------------------------------------------

SampledSignal::SampledSignal(std::vector<double> t, std::vector<double> value)
    : t_(std::move(t)), value_(std::move(value)) {
  if (t_.empty() || t_.size() != value_.size())
    throw FormatError("signal needs matching, non-empty time and value columns");
  for (std::size_t i = 1; i < t_.size(); ++i)
    if (!(t_[i] > t_[i - 1])) throw FormatError("signal times must be strictly increasing");
}

double SampledSignal::operator()(double t) const {
  if (t_.empty()) throw SignalOutOfRange("empty signal");
  const double tol = 1e-12 * std::max(1.0, std::abs(t_.back()));
  if (t < t_.front() - tol || t > t_.back() + tol) {
    std::ostringstream msg;
    msg << "signal queried at t=" << t << " outside [" << t_.front() << ", " << t_.back() << "]";
    throw SignalOutOfRange(msg.str());
  }
  if (t_.size() == 1) return value_.front();
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = static_cast<std::size_t>(std::distance(t_.begin(), it));
  i = std::clamp<std::size_t>(i, 1, t_.size() - 1);
  const double w = (t - t_[i - 1]) / (t_[i] - t_[i - 1]);
  return (1.0 - w) * value_[i - 1] + w * value_[i];
}

SampledSignal SampledSignal::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open signal file " + path.string());
  std::vector<double> t, v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a = 0.0, b = 0.0;
    if (!(row >> a >> b)) {
      if (t.empty() && line_no == 1) continue;  // header
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 't,value'");
    }
    t.push_back(a);
    v.push_back(b);
  }
  return SampledSignal(std::move(t), std::move(v));
}

void SampledSignal::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write signal file " + path.string());
  out.precision(17);
  out << "t,value\n";
  for (std::size_t i = 0; i < t_.size(); ++i) out << t_[i] << ',' << value_[i] << '\n';
}

SampledSignal duffing_signal(std::uint64_t seed, double t_begin, double t_end, std::size_t n_samples,
                             double mean, double rel_amplitude, double time_scale) {
  if (n_samples < 2 || !(t_end > t_begin) || !(time_scale > 0.0))
    throw InvalidInput("duffing_signal: need n_samples >= 2, t_end > t_begin, time_scale > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  double x = 1.0 + jitter(rng);
  double v = jitter(rng);
  auto accel = [](double xx, double vv, double tau) {
    return -0.3 * vv + xx - xx * xx * xx + 0.5 * std::cos(1.2 * tau);
  };
  // Spin up past the transient before sampling.
  constexpr double dtau = 0.01;
  double tau = 0.0;
  auto advance = [&](double until) {
    while (tau < until - 1e-12) {
      const double h = std::min(dtau, until - tau);
      const double k1x = v, k1v = accel(x, v, tau);
      const double k2x = v + 0.5 * h * k1v, k2v = accel(x + 0.5 * h * k1x, v + 0.5 * h * k1v, tau + 0.5 * h);
      const double k3x = v + 0.5 * h * k2v, k3v = accel(x + 0.5 * h * k2x, v + 0.5 * h * k2v, tau + 0.5 * h);
      const double k4x = v + h * k3v, k4v = accel(x + h * k3x, v + h * k3v, tau + h);
      x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
      v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
      tau += h;
    }
  };
  advance(50.0);
  const double tau0 = tau;
  std::vector<double> ts(n_samples), vs(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double t = t_begin + (t_end - t_begin) * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    advance(tau0 + (t - t_begin) / time_scale);
    ts[i] = t;
    vs[i] = mean * (1.0 + rel_amplitude * x / 1.5);
  }
  return SampledSignal(std::move(ts), std::move(vs));
}

double BickleyConfig::period_x() const { return std::numbers::pi * r0; }

void BickleyConfig::validate() const {
  if (!(U > 0.0) || !(L > 0.0) || !(r0 > 0.0)) throw InvalidInput("Bickley: U, L and r0 must be positive");
  if (!(y_half_width > 0.0)) throw InvalidInput("Bickley: y_half_width must be positive");
}

namespace {

// Returns the three real forcing terms eps_n(t) cos(k_n (x - c_n t)) and their x-derivatives.
struct Perturbation {
  double sum = 0.0;
  double dsum_dx = 0.0;
};

Perturbation perturbation(const BickleyConfig& cfg, double x, double t) {
  std::array<double, 3> eps{};
  if (const auto* q = std::get_if<QuasiperiodicForcing>(&cfg.forcing)) {
    eps = q->eps;
  } else {
    const auto& c = std::get<ChaoticForcing>(cfg.forcing);
    eps = {c.eps1(t), c.eps2(t), c.eps3};
  }
  Perturbation p;
  for (int n = 1; n <= 3; ++n) {
    const double k = cfg.wavenumber(n);
    const double phase = k * (x - cfg.c[n - 1] * t);
    p.sum += eps[n - 1] * std::cos(phase);
    p.dsum_dx -= eps[n - 1] * k * std::sin(phase);
  }
  return p;
}

}  // namespace

double bickley_streamfunction(const BickleyConfig& cfg, double x, double y, double t) {
  const double s = 1.0 / std::cosh(y / cfg.L);
  return -cfg.U * cfg.L * std::tanh(y / cfg.L) + cfg.U * cfg.L * s * s * perturbation(cfg, x, t).sum;
}

Vec2 bickley_velocity(const BickleyConfig& cfg, double x, double y, double t) {
  const double s = 1.0 / std::cosh(y / cfg.L);
  const double sech2 = s * s;
  const double th = std::tanh(y / cfg.L);
  const Perturbation p = perturbation(cfg, x, t);
  // psi0 = -U L tanh(y/L)          -> -d/dy = U sech^2
  // psi1 = U L sech^2(y/L) sum     -> -d/dy = 2 U sech^2 tanh sum,  d/dx = U L sech^2 dsum/dx
  const double u = cfg.U * sech2 + 2.0 * cfg.U * sech2 * th * p.sum;
  const double v = cfg.U * cfg.L * sech2 * p.dsum_dx;
  return {u, v};
}

DynamicalSystem bickley_jet(BickleyConfig cfg) {
  cfg.validate();
  const double period = cfg.period_x();
  const Rect domain{0.0, period, -cfg.y_half_width, cfg.y_half_width};
  const bool chaotic = std::holds_alternative<ChaoticForcing>(cfg.forcing);
  return DynamicalSystem::continuous(
      chaotic ? "bickley-chaotic" : "bickley-quasiperiodic",
      [cfg = std::move(cfg)](const Vec2& p, double t) { return bickley_velocity(cfg, p.x, p.y, t); },
      domain, period);
}

}  // namespace shearless
