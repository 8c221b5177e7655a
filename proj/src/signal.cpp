#include "rwi/signal.hpp"

#include <unsupported/Eigen/FFT>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "rwi/errors.hpp"

namespace rwi {

namespace {

constexpr double kPi = std::numbers::pi;

long half_count(double half_width, double dt) { return static_cast<long>(std::floor(half_width / dt + 1e-9)); }

template <typename Fn>
SampledSignal sample_even(Fn&& fn, double dt, double half_width) {
  if (!(dt > 0.0)) throw InvalidArgument("sampling step must be positive");
  if (!(half_width >= 0.0)) throw InvalidArgument("half width must be nonnegative");
  const long L = half_count(half_width, dt);
  SampledSignal s;
  s.dt = dt;
  s.t0 = -static_cast<double>(L) * dt;
  s.values.resize(2 * L + 1);
  for (long l = 0; l <= L; ++l) {
    const double v = fn(static_cast<double>(l) * dt);
    s.values[L + l] = v;
    s.values[L - l] = v;
  }
  return s;
}

// Spectrum of the probing pulse; F^ = f^^2.
double pulse_f_hat(const PulseSpec& spec, double omega) {
  const double B = spec.bandwidth;
  const double a = std::exp(-(omega - spec.omega_c) * (omega - spec.omega_c) / (2 * B * B));
  const double b = std::exp(-(omega + spec.omega_c) * (omega + spec.omega_c) / (2 * B * B));
  return (2 * kPi / std::numbers::sqrt2) * (std::sqrt(2 * kPi) / B) * 0.5 * (a + b);
}

}  // namespace

double PulseSpec::t_F() const { return 2.0 * std::sqrt(3.0) / bandwidth; }

void PulseSpec::validate() const {
  if (!(omega_c > 0.0)) throw InvalidArgument("central frequency must be positive");
  if (!(bandwidth > 0.0)) throw InvalidArgument("pulse bandwidth must be positive");
}

long SampledSignal::first_step() const { return std::lround(t0 / dt); }

double SampledSignal::at_step(long step) const {
  const long k = step - first_step();
  if (k < 0 || k >= static_cast<long>(values.size())) return 0.0;
  return values[static_cast<std::size_t>(k)];
}

double pulse_f(const PulseSpec& spec, double t) {
  const double B = spec.bandwidth;
  return (2 * kPi / std::numbers::sqrt2) * std::exp(-B * B * t * t / 2) * std::cos(spec.omega_c * std::abs(t));
}

double pulse_F(const PulseSpec& spec, double t) {
  const double B = spec.bandwidth;
  const double tail = std::exp(-spec.omega_c * spec.omega_c / (B * B));
  return std::pow(kPi, 2.5) / B * std::exp(-B * B * t * t / 4) * (std::cos(spec.omega_c * std::abs(t)) + tail);
}

SampledSignal sample_pulse_f(const PulseSpec& spec, double dt, double half_width) {
  spec.validate();
  return sample_even([&](double t) { return pulse_f(spec, t); }, dt, half_width);
}

SampledSignal sample_pulse_F(const PulseSpec& spec, double dt, double half_width) {
  spec.validate();
  return sample_even([&](double t) { return pulse_F(spec, t); }, dt, half_width);
}

SampledSignal pulse_frak(const PulseSpec& spec, double dt, double half_width) {
  spec.validate();
  // F decays like exp(-B^2 t^2 / 4); at 8 sqrt(3) / B the window edge sits at exp(-48).
  const double window = 8.0 * std::sqrt(3.0) / spec.bandwidth;
  return pulse_frak(sample_pulse_F(spec, dt, std::max(window, half_width)), half_width);
}

SampledSignal pulse_frak(const SampledSignal& compressed, double half_width) {
  const double dt = compressed.dt;
  const long N = static_cast<long>(compressed.size());
  if (N % 2 == 0 || compressed.first_step() != -(N - 1) / 2)
    throw InvalidArgument("compressed pulse must be sampled symmetrically about t = 0");
  const long L = (N - 1) / 2;

  std::vector<std::complex<double>> x(N), spectrum;
  for (long l = -L; l <= L; ++l) x[(l + N) % N] = compressed.values[l + L];
  Eigen::FFT<double> fft;
  fft.fwd(spectrum, x);

  std::vector<double> power(N);
  double peak = 0.0;
  for (long q = 0; q < N; ++q) {
    power[q] = dt * spectrum[q].real();
    peak = std::max(peak, power[q]);
  }
  if (!(peak > 0.0)) throw SpectralValidityError("compressed pulse has no positive spectral content");
  std::vector<std::complex<double>> root(N);
  for (long q = 0; q < N; ++q) {
    double p = power[q];
    if (p < -1e-6 * peak)
      throw SpectralValidityError(fmt::format("compressed pulse spectrum is negative ({:.3e} of peak)", p / peak));
    if (p < 0.0) p = 0.0;  // rounding noise
    root[q] = std::sqrt(p);
  }
  std::vector<std::complex<double>> y;
  fft.inv(y, root);

  const long keep = std::min(L, half_count(half_width, dt));
  SampledSignal out;
  out.dt = dt;
  out.t0 = -static_cast<double>(keep) * dt;
  out.values.resize(2 * keep + 1);
  for (long l = 0; l <= keep; ++l) {
    const double v = 0.5 * (y[l % N].real() + y[(N - l) % N].real()) / dt;
    out.values[keep + l] = v;
    out.values[keep - l] = v;
  }
  return out;
}

SampledSignal derivative(const SampledSignal& sig) {
  const std::size_t n = sig.size();
  if (n < 3) throw InvalidArgument("derivative needs at least three samples");
  SampledSignal d = sig;
  const double dt = sig.dt;
  d.values[0] = (sig.values[1] - sig.values[0]) / dt;
  d.values[n - 1] = (sig.values[n - 1] - sig.values[n - 2]) / dt;
  for (std::size_t k = 1; k + 1 < n; ++k) d.values[k] = (sig.values[k + 1] - sig.values[k - 1]) / (2 * dt);
  return d;
}

SampledSignal pad(const SampledSignal& sig, std::size_t count) {
  SampledSignal out;
  out.dt = sig.dt;
  out.t0 = sig.t0 - static_cast<double>(count) * sig.dt;
  out.values.assign(sig.size() + 2 * count, 0.0);
  std::copy(sig.values.begin(), sig.values.end(), out.values.begin() + static_cast<long>(count));
  return out;
}

double nyquist_tau(const PulseSpec& spec, double drop_db) {
  spec.validate();
  if (!(drop_db > 0.0)) throw InvalidArgument("drop must be positive");
  const double level = std::pow(10.0, -drop_db / 10.0);
  auto ratio = [&](double w) {
    const double peak = pulse_f_hat(spec, spec.omega_c);
    const double v = pulse_f_hat(spec, w);
    return (v * v) / (peak * peak);
  };
  double lo = spec.omega_c;
  double hi = spec.omega_c + spec.bandwidth;
  while (ratio(hi) > level) hi += spec.bandwidth;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ratio(mid) > level ? lo : hi) = mid;
  }
  return kPi / (0.5 * (lo + hi));
}

}  // namespace rwi
