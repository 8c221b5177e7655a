#pragma once

#include <vector>

namespace rwi {

/// Gaussian probing pulse modulated at omega_c, with bandwidth parameter B.
struct PulseSpec {
  double omega_c = 0.0;
  double bandwidth = 0.0;

  static PulseSpec gaussian(double omega_c, double bandwidth_ratio = 0.25) {
    return {omega_c, bandwidth_ratio * omega_c};
  }
  /// Half-width beyond which the compressed pulse is negligible: 2 sqrt(3) / B.
  double t_F() const;
  void validate() const;
};

/// Uniformly sampled signal; sample k sits at t0 + k dt.
struct SampledSignal {
  double dt = 0.0;
  double t0 = 0.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
  /// Integer step index of the first sample (t0 / dt, rounded).
  long first_step() const;
  /// Value at fine-grid step `step`; zero outside the stored range.
  double at_step(long step) const;
};

double pulse_f(const PulseSpec& spec, double t);
double pulse_F(const PulseSpec& spec, double t);

/// Samples the probing pulse on l dt, |l dt| <= half_width; exactly even sample-wise.
SampledSignal sample_pulse_f(const PulseSpec& spec, double dt, double half_width);
SampledSignal sample_pulse_F(const PulseSpec& spec, double dt, double half_width);

/// Square-root pulse whose spectrum is sqrt(F^), from the analytic compressed pulse, truncated to half_width.
SampledSignal pulse_frak(const PulseSpec& spec, double dt, double half_width);

/// Same from an even sampled compressed pulse (centred at t = 0).
SampledSignal pulse_frak(const SampledSignal& compressed, double half_width);

/// Centred difference, one-sided at the ends.
SampledSignal derivative(const SampledSignal& sig);

/// Zero-pads `count` samples on both ends.
SampledSignal pad(const SampledSignal& sig, std::size_t count);

/// Sampling step close to Nyquist for the band where F^ stays within `drop_db` of its peak.
double nyquist_tau(const PulseSpec& spec, double drop_db = 6.0);

}  // namespace rwi
