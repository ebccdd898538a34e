#pragma once

// Teleportation-based eavesdropping with lossy fiber between Eve's stations.
//
// The covariance-matrix pipeline in build_state() is the single source of
// truth. Every attack parameter is solved against it: the channel
// transmittance through t, the channel noise through (eta, V_phi), and the
// minimal entanglement by bisection on the noise that the pipeline produces.
//
// Signal path:   A' -T1-> S_g(., H1) -T3-> B_t(., E30) -T2-> Bob (B5)
// Entanglement:  rho_E = (H1, H3), H3 -T4-> [NLA] -> B_eta(., E20) -> E30
// Noise source:  phi_E = (E20, E1)
// Eve stores E1, E2, E3. The idler E0 of S_g and the fiber environments
// F1..F4 are outside her control.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cvqkd/channel.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/gaussian.hpp"

namespace cvqkd {

/// Two-mode squeezed source parameterised by gamma = tanh(r).
class EprSource {
 public:
  static EprSource from_squeezing(double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("squeezing parameter must lie in [0, 1)");
    const double g2 = gamma * gamma;
    return EprSource(gamma, (1.0 + g2) / (1.0 - g2));
  }
  static EprSource from_variance(double variance) {
    if (!(variance >= 1.0) || !std::isfinite(variance)) throw DomainError("EPR variance must be finite and >= 1");
    return EprSource(std::sqrt((variance - 1.0) / (variance + 1.0)), variance);
  }

  double squeezing() const { return gamma_; }
  double variance() const { return variance_; }

 private:
  EprSource(double gamma, double variance) : gamma_(gamma), variance_(variance) {}
  double gamma_;
  double variance_;
};

/// Full parameterisation of Eve's apparatus. `v_rho` is the source prepared at
/// station I, before any distillation at station II. Setting `distilled_v_rho`
/// instead fixes the source as seen after the NLA; `v_rho` is then ignored.
struct AttackConfig {
  double g = 1.0;
  double t = 1.0;
  double eta = 1.0;
  double v_rho = 1.0;
  double v_phi = 1.0;
  LinkGeometry geometry = LinkGeometry::lossless();
  double nla_gain = 1.0;
  std::optional<double> distilled_v_rho;
};

// ---------------------------------------------------------------------------
// Noiseless linear amplification

struct NlaEquivalent {
  EprSource source;
  double t4;
};

/// Heralded NLA on the lossy arm of an EPR pair, replaced by the equivalent
/// stronger source sent through a better channel.
inline NlaEquivalent nla_equivalent(const EprSource& source, double t4, double gain) {
  if (!(gain >= 1.0)) throw DomainError("NLA gain must be >= 1");
  if (!(t4 >= 0.0 && t4 <= 1.0)) throw DomainError("distribution transmittance must lie in [0, 1]");
  if (gain == 1.0) return {source, t4};
  const double stretch = 1.0 + (gain * gain - 1.0) * t4;
  const double gamma_g = source.squeezing() * std::sqrt(stretch);
  if (gamma_g >= 1.0) throw GainTooLargeError("NLA gain drives the equivalent squeezing to >= 1");
  return {EprSource::from_squeezing(gamma_g), gain * gain * t4 / stretch};
}

/// Gain at which the equivalent squeezing reaches 1.
inline double max_gain(const EprSource& source, double t4) {
  const double gamma = source.squeezing();
  if (!(gamma < 1.0)) throw DomainError("squeezing must be < 1");
  if (gamma == 0.0 || t4 == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(1.0 + (1.0 / (gamma * gamma) - 1.0) / t4);
}

/// Gain that distils `source` to `distilled_variance`.
inline double gain_for_distilled(const EprSource& source, double t4, double distilled_variance) {
  const double ratio = EprSource::from_variance(distilled_variance).squeezing() / source.squeezing();
  if (!(ratio >= 1.0)) throw DomainError("distilled source must be stronger than the prepared one");
  if (t4 <= 0.0) throw DomainError("distribution transmittance must be positive");
  return std::sqrt(1.0 + (ratio * ratio - 1.0) / t4);
}

/// Source to prepare at station I so that after the NLA it is equivalent to
/// `distilled_variance`.
inline EprSource source_for_distilled(double distilled_variance, double t4, double gain) {
  const auto target = EprSource::from_variance(distilled_variance);
  if (gain == 1.0) return target;
  return EprSource::from_squeezing(target.squeezing() / std::sqrt(1.0 + (gain * gain - 1.0) * t4));
}

/// Source and distribution transmittance seen by station II after the NLA.
inline NlaEquivalent effective_source(const AttackConfig& config) {
  const double t4 = config.geometry.t4();
  if (config.distilled_v_rho) {
    const double g2 = config.nla_gain * config.nla_gain;
    if (!(config.nla_gain >= 1.0)) throw DomainError("NLA gain must be >= 1");
    return {EprSource::from_variance(*config.distilled_v_rho), g2 * t4 / (1.0 + (g2 - 1.0) * t4)};
  }
  return nla_equivalent(EprSource::from_variance(config.v_rho), t4, config.nla_gain);
}

/// Source variance to prepare at station I for the configured attack.
inline double prepared_variance(const AttackConfig& config) {
  if (!config.distilled_v_rho) return config.v_rho;
  return source_for_distilled(*config.distilled_v_rho, config.geometry.t4(), config.nla_gain).variance();
}

// ---------------------------------------------------------------------------
// Covariance pipeline

/// Labels of the full output state, in order.
inline const std::vector<std::string>& attack_mode_labels() {
  static const std::vector<std::string> labels{"A", "B5", "E1", "E2", "E3", "E0", "F1", "F2", "F3", "F4"};
  return labels;
}

struct AttackStateBundle {
  CovarianceMatrix state;
  std::vector<std::string> eve_modes{"E1", "E2", "E3"};
  std::string alice_mode = "A";
  std::string bob_mode = "B5";

  CovarianceMatrix alice_bob() const { return partial_trace(state, {alice_mode, bob_mode}); }
  CovarianceMatrix eve() const { return partial_trace(state, eve_modes); }
};

namespace detail {

struct PipelineInputs {
  double t1, t2, t3, t4;  // t4 after distillation
  double g, t, eta;
  double v_rho;           // after distillation
  double v_phi;
};

inline PipelineInputs pipeline_inputs(const AttackConfig& c) {
  const auto eff = effective_source(c);
  return {c.geometry.t1(), c.geometry.t2(), c.geometry.t3(), eff.t4, c.g, c.t, c.eta,
          eff.source.variance(), c.v_phi};
}

// Register layout while the pipeline runs.
enum Reg : std::size_t { kA, kS, kF1, kH1, kH3, kF4, kF3, kE20, kE1, kF2, kRegCount };

inline CovarianceMatrix run_pipeline(double v_alice, const PipelineInputs& in) {
  auto gamma = tensor(tensor(tensor(epr_state(v_alice, "A", "S"), vacuum("F1")),
                             tensor(epr_state(in.v_rho, "H1", "H3"), vacuum("F4"))),
                      tensor(tensor(vacuum("F3"), epr_state(in.v_phi, "E20", "E1")), vacuum("F2")));
  Matrix m = gamma.matrix();
  const auto step = [&](const SymplecticTransform& s, std::size_t a, std::size_t b) {
    const std::size_t targets[] = {a, b};
    apply_local(m, s.matrix(), targets);
  };
  step(beamsplitter(in.t1), kS, kF1);   // Alice -> station I
  step(beamsplitter(in.t4), kH3, kF4);  // EPR distribution to station II
  step(two_mode_squeezer(in.g), kS, kH1);
  step(beamsplitter(in.t3), kS, kF3);   // station I -> station II
  step(beamsplitter(in.eta), kH3, kE20);
  // Second output port carries sqrt(t) S - sqrt(1-t) E30 to Bob.
  step(beamsplitter(in.t), kH3, kS);
  step(beamsplitter(in.t2), kS, kF2);   // station II -> Bob

  gamma = CovarianceMatrix(std::move(m), gamma.labels()).relabeled({"A", "B5", "F1", "E0", "E3", "F4", "F3", "E2", "E1", "F2"});
  return partial_trace(gamma, attack_mode_labels());
}

}  // namespace detail

/// Runs the full symplectic pipeline with Alice's EPR variance V = V_A + 1.
inline AttackStateBundle build_state(const AttackConfig& config, double v_a) {
  if (!(v_a >= 0.0)) throw DomainError("modulation variance must be non-negative");
  return {detail::run_pipeline(v_a + 1.0, detail::pipeline_inputs(config))};
}

/// Overall transmittance g t T1 T2 T3 of the simulated channel.
inline double simulated_transmittance(const AttackConfig& c) {
  return c.g * c.t * c.geometry.t1() * c.geometry.t2() * c.geometry.t3();
}

/// Output-referred noise chi of the simulated channel, read off the pipeline
/// with Alice's input in vacuum.
inline double simulated_noise(const AttackConfig& c) {
  const auto gamma = detail::run_pipeline(1.0, detail::pipeline_inputs(c));
  return gamma.matrix()(2, 2) - simulated_transmittance(c);
}

/// The same noise from the constraint equation, with the station-I -> II
/// fiber playing the role of the amplified-signal channel.
inline double simulated_noise_closed_form(const AttackConfig& c) {
  const auto eff = effective_source(c);
  const double t1 = c.geometry.t1(), t2 = c.geometry.t2(), t3 = c.geometry.t3(), t4 = eff.t4;
  const double v = eff.source.variance();
  const double a = v;
  const double b = c.eta * (t4 * v + 1.0 - t4) + (1.0 - c.eta) * c.v_phi;
  const double corr = std::sqrt(c.eta * t4 * (v - 1.0) * (v + 1.0));
  const double inner = c.t * (t3 * (c.g * (1.0 - t1) + (c.g - 1.0) * a) + (1.0 - t3)) + (1.0 - c.t) * b -
                       2.0 * std::sqrt(c.t * (1.0 - c.t) * (c.g - 1.0) * t3) * corr;
  return t2 * inner + 1.0 - t2;
}

// ---------------------------------------------------------------------------
// Parameter solvers

/// t = T_equ / (g T1 T2 T3).
inline double solve_t(const GaussianChannelTarget& target, double g, const LinkGeometry& geometry) {
  if (!(g >= 1.0)) throw DomainError("two-mode squeezing gain must be >= 1");
  const double t = target.transmittance() / (g * geometry.t1() * geometry.t2() * geometry.t3());
  if (t > 1.0 + 1e-12) throw InfeasibleError("gain too small for target transmittance");
  return std::min(t, 1.0);
}

/// Noise as a function of u = sqrt(eta) and V_phi with everything else fixed:
///   chi(u, V_phi) = c0 - c1 u + c2 u^2 + slope (1 - u^2)(V_phi - 1).
/// Coefficients are sampled from the pipeline; the form is exact.
struct NoiseProfile {
  double c0 = 0, c1 = 0, c2 = 0, slope = 0;

  double at(double u) const { return c0 - c1 * u + c2 * u * u; }

  double v_phi(double u, double chi_target) const {
    const double s = slope * (1.0 - u * u);
    if (s <= 0.0) return 1.0;
    return std::max(1.0, 1.0 + (chi_target - at(u)) / s);
  }

  /// Minimum over u in [0, 1].
  double min_value() const {
    double u = c2 > 0.0 ? std::clamp(0.5 * c1 / c2, 0.0, 1.0) : (c1 > 0.0 ? 1.0 : 0.0);
    return std::min({at(u), at(0.0), at(1.0)});
  }

  /// [u_lo, u_hi] on which V_phi >= 1 solves the noise constraint.
  std::optional<std::array<double, 2>> feasible_interval(double chi_target) const {
    const double tol = 1e-12 * std::max(1.0, std::abs(c0) + std::abs(c1) + std::abs(c2));
    const double k = c0 - chi_target - tol;  // c2 u^2 - c1 u + k <= 0
    double lo, hi;
    if (c2 > 1e-300) {
      const double disc = c1 * c1 - 4.0 * c2 * k;
      if (disc < 0.0) return std::nullopt;
      const double sq = std::sqrt(disc);
      // Stable roots of c2 u^2 - c1 u + k.
      const double q = 0.5 * (c1 + std::copysign(sq, c1));
      double r1 = q / c2;
      double r2 = q != 0.0 ? k / q : r1;
      lo = std::min(r1, r2);
      hi = std::max(r1, r2);
    } else if (c1 > 0.0) {
      lo = k / c1;
      hi = std::numeric_limits<double>::infinity();
    } else {
      if (k > 0.0) return std::nullopt;
      lo = -std::numeric_limits<double>::infinity();
      hi = std::numeric_limits<double>::infinity();
    }
    lo = std::max(lo, 0.0);
    hi = std::min(hi, 1.0);
    if (lo > hi) return std::nullopt;
    return std::array<double, 2>{lo, hi};
  }
};

namespace detail {

inline NoiseProfile noise_profile(PipelineInputs in) {
  const double tt = in.g * in.t * in.t1 * in.t2 * in.t3;
  const auto chi_at = [&](double u, double v_phi) {
    in.eta = u * u;
    in.v_phi = v_phi;
    return run_pipeline(1.0, in).matrix()(2, 2) - tt;
  };
  const double f0 = chi_at(0.0, 1.0);
  const double fh = chi_at(0.5, 1.0);
  const double f1 = chi_at(1.0, 1.0);
  NoiseProfile p;
  p.c0 = f0;
  p.c2 = 2.0 * f1 + 2.0 * f0 - 4.0 * fh;
  p.c1 = p.c2 - (f1 - f0);
  p.slope = chi_at(0.0, 2.0) - f0;
  return p;
}

}  // namespace detail

inline NoiseProfile noise_profile(const AttackConfig& c) { return detail::noise_profile(detail::pipeline_inputs(c)); }

struct EtaVphi {
  double eta;
  double v_phi;
};

/// Chooses (eta, V_phi) reproducing the target noise. The constraint leaves
/// one degree of freedom; it is spent maximising `eve_information` by
/// golden-section search on sqrt(eta) over the feasible interval.
template <class Objective>
EtaVphi solve_eta_vphi(const GaussianChannelTarget& target, const AttackConfig& partial, Objective&& eve_information) {
  const auto profile = noise_profile(partial);
  const double chi = target.chi();
  const auto interval = profile.feasible_interval(chi);
  if (!interval) throw InfeasibleError("no (eta, V_phi) with V_phi >= 1 reproduces the channel noise");

  auto candidate = partial;
  const auto score = [&](double u) {
    candidate.eta = u * u;
    candidate.v_phi = profile.v_phi(u, chi);
    return eve_information(static_cast<const AttackConfig&>(candidate));
  };

  double lo = (*interval)[0], hi = (*interval)[1];
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double s1 = score(x1), s2 = score(x2);
  while (hi - lo > 1e-10) {
    if (s1 < s2) {
      lo = x1;
      x1 = x2;
      s1 = s2;
      x2 = lo + inv_phi * (hi - lo);
      s2 = score(x2);
    } else {
      hi = x2;
      x2 = x1;
      s2 = s1;
      x1 = hi - inv_phi * (hi - lo);
      s1 = score(x1);
    }
  }
  const double u = 0.5 * (lo + hi);
  return {u * u, profile.v_phi(u, chi)};
}

/// Smallest squeezing of the source reaching station II (after any NLA) for
/// which some (eta, V_phi) reproduces the channel; bisection on the pipeline.
/// Only g, t, geometry and nla_gain of `partial` are used.
inline EprSource min_epr_variance(const GaussianChannelTarget& target, const AttackConfig& partial,
                                  double v_rho_cap = 1e6) {
  auto c = partial;
  const auto feasible = [&](double gamma) {
    c.distilled_v_rho = EprSource::from_squeezing(gamma).variance();
    return noise_profile(c).feasible_interval(target.chi()).has_value();
  };
  if (feasible(0.0)) return EprSource::from_squeezing(0.0);
  const double cap = EprSource::from_variance(v_rho_cap).squeezing();
  if (!feasible(cap)) throw InfeasibleError("no source variance up to the cap reproduces the channel");
  double lo = 0.0, hi = cap;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return EprSource::from_squeezing(hi);
}

/// Minimal squeezing from the noise constraint at eta = 1 solved as a
/// quadratic in gamma, for finite g.
inline double min_squeezing_closed_form(const GaussianChannelTarget& target, double g, double t,
                                        double t1, double t2, double t3, double t4) {
  const double p = t2 * t * (g - 1.0) * t3;
  const double q = t2 * (1.0 - t) * t4;
  const double r = 2.0 * std::sqrt(p * q);
  const double k = t2 * (t * (t3 * g * (1.0 - t1) + 1.0 - t3)) + 1.0 - t2 + t2 * (1.0 - t) * (1.0 - t4);
  const double chi = target.chi();
  const double d = p + q + chi - k;
  const double e = -2.0 * r;
  const double f = p + q - chi + k;
  return (-e - std::sqrt(e * e - 4.0 * d * f)) / (2.0 * d);
}

/// Minimal post-distillation squeezing in the g -> infinity limit.
inline double min_squeezing_nla_limit(const GaussianChannelTarget& target, double t1, double t2, double t4g) {
  const double tt = target.transmittance();
  const double noise = (target.chi() - (1.0 - t2)) / t2;
  const double d = tt / t2 + 2.0 * t4g - 1.0 + noise;
  const double e = -4.0 * std::sqrt(tt / (t1 * t2) * t4g);
  const double f = 2.0 * tt / (t1 * t2) - tt / t2 + 1.0 - noise;
  return (-e - std::sqrt(e * e - 4.0 * d * f)) / (2.0 * d);
}

// ---------------------------------------------------------------------------
// Merged-station special case

/// Fiber loss outside Eve's reach, before and after a single tapping station.
struct TrustedLoss {
  double before = 1.0;
  double after = 1.0;
};

/// Entangling cloner at one station: trusted loss, then a beamsplitter tap
/// injecting one arm of an EPR pair, then trusted loss. The tap transmittance
/// is T_equ / (before * after). Eve holds E1 (kept EPR arm) and E3 (tap port).
inline AttackStateBundle entangling_cloner_state(const GaussianChannelTarget& target, TrustedLoss loss, double v_a) {
  if (!(loss.before > 0.0 && loss.before <= 1.0 && loss.after > 0.0 && loss.after <= 1.0)) {
    throw DomainError("trusted transmittances must lie in (0, 1]");
  }
  const double tap = target.transmittance() / (loss.before * loss.after);
  if (tap > 1.0 + 1e-12) throw InfeasibleError("trusted loss exceeds the channel loss");
  const double tc = std::min(tap, 1.0);
  // Bob: after * [tc (before V + 1 - before) + (1 - tc) N] + 1 - after = T V + chi.
  double n = 1.0;
  if (tc >= 1.0 && std::abs(target.chi() - (1.0 - target.transmittance())) > 1e-12) {
    throw InfeasibleError("no tap is left to inject the channel noise");
  }
  if (tc < 1.0) {
    n = (target.chi() - loss.after * tc * (1.0 - loss.before) - (1.0 - loss.after)) / (loss.after * (1.0 - tc));
    if (n < 1.0 - 1e-12) throw InfeasibleError("trusted loss alone already exceeds the channel noise");
    n = std::max(n, 1.0);
  }
  enum : std::size_t { A, B, F1, E20, E1, F2, Count };
  auto gamma = tensor(tensor(epr_state(v_a + 1.0, "A", "B"), vacuum("F1")),
                      tensor(epr_state(n, "E20", "E1"), vacuum("F2")));
  gamma = apply(embed(beamsplitter(loss.before), {B, F1}, Count), gamma);
  gamma = apply(embed(beamsplitter(tc), {E20, B}, Count), gamma);
  gamma = apply(embed(beamsplitter(loss.after), {B, F2}, Count), gamma);
  gamma = gamma.relabeled({"A", "B5", "F1", "E3", "E1", "F2"});
  AttackStateBundle bundle{partial_trace(gamma, std::vector<std::string>{"A", "B5", "E1", "E3", "F1", "F2"})};
  bundle.eve_modes = {"E1", "E3"};
  return bundle;
}

}  // namespace cvqkd
