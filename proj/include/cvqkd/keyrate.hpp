#pragma once

// Mutual information, Holevo bound and secret key rate, plus the two
// reference attacks.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cvqkd/attack.hpp"
#include "cvqkd/channel.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/gaussian.hpp"

namespace cvqkd {

enum class Detection { homodyne, heterodyne };
enum class Direction { reverse, direct };
enum class Conditioning { alice, bob };

inline const char* to_string(Detection d) { return d == Detection::homodyne ? "hom" : "het"; }
inline const char* to_string(Direction d) { return d == Direction::reverse ? "rr" : "dr"; }

struct RateSettings {
  double v_a = 4.0;
  double beta = 0.96;
  Detection detection = Detection::homodyne;
  Direction direction = Direction::reverse;
};

struct KeyRateReport {
  double mutual_information = 0.0;
  double holevo = 0.0;
  double rate_raw = 0.0;
  double rate = 0.0;  // max(rate_raw, 0)
  double beta = 0.96;
  Detection detection = Detection::homodyne;
  Direction direction = Direction::reverse;
  std::optional<AttackConfig> solved_config;
  std::optional<double> gamma_g;  // squeezing reaching station II
  std::optional<double> t4_g;     // distribution transmittance after the NLA
  std::optional<bool> converged;  // set when a limit ladder was used
};

/// I(a:b) from the reduced Alice-Bob state. Alice heterodynes her EPR arm;
/// Bob homodynes x or heterodynes.
inline double mutual_information(const AttackStateBundle& bundle, Detection detection) {
  const auto ab = bundle.alice_bob();
  const auto b_given_a = condition_on_heterodyne(ab, 0);
  const Mat2 vb = ab.block(1, 1);
  const Mat2 vc = b_given_a.block(0, 0);
  if (vc(0, 0) <= 0.0 || vc(1, 1) <= 0.0) throw PhysicalityError("non-positive conditional variance");
  if (detection == Detection::homodyne) return 0.5 * std::log2(vb(0, 0) / vc(0, 0));
  return 0.5 * std::log2((vb(0, 0) + 1.0) / (vc(0, 0) + 1.0)) + 0.5 * std::log2((vb(1, 1) + 1.0) / (vc(1, 1) + 1.0));
}

/// S(E) - S(E|x), where x is Bob's outcome (reverse) or Alice's heterodyne
/// outcome (direct). Trusted modes never enter Eve's state.
inline double holevo_bound(const AttackStateBundle& bundle, Conditioning conditioning, Detection detection) {
  const double s_e = von_neumann_entropy(bundle.eve());
  auto joint_labels = bundle.eve_modes;
  joint_labels.push_back(conditioning == Conditioning::bob ? bundle.bob_mode : bundle.alice_mode);
  const auto joint = partial_trace(bundle.state, joint_labels);
  const auto measured = joint.modes() - 1;
  const auto conditional = (conditioning == Conditioning::bob && detection == Detection::homodyne)
                               ? condition_on_homodyne(joint, measured, Quadrature::x)
                               : condition_on_heterodyne(joint, measured);
  return s_e - von_neumann_entropy(conditional);
}

inline double holevo_bound(const AttackStateBundle& bundle, const RateSettings& settings) {
  return holevo_bound(bundle, settings.direction == Direction::reverse ? Conditioning::bob : Conditioning::alice,
                      settings.detection);
}

inline KeyRateReport secret_key_rate(const AttackStateBundle& bundle, const RateSettings& settings) {
  if (!(settings.beta > 0.0 && settings.beta <= 1.0)) throw DomainError("reconciliation efficiency must lie in (0, 1]");
  KeyRateReport r;
  r.mutual_information = mutual_information(bundle, settings.detection);
  r.holevo = holevo_bound(bundle, settings);
  r.rate_raw = settings.beta * r.mutual_information - r.holevo;
  r.rate = std::max(r.rate_raw, 0.0);
  r.beta = settings.beta;
  r.detection = settings.detection;
  r.direction = settings.direction;
  return r;
}

// ---------------------------------------------------------------------------
// Teleportation attack

/// Numerical stand-in for the g -> infinity and V_rho -> infinity limits.
/// Rung x sets g = x and, when the source is not fixed, the distilled V_rho = x.
/// The finite-x error is a power series in 1/x, so the Holevo bound is
/// extrapolated to 1/x = 0 by a polynomial through the last rungs (degree up
/// to 2). Converged means the two highest-degree estimates agree within
/// `tolerance`. The ladder stays low because roundoff grows with g * V_rho.
struct LimitPolicy {
  std::vector<double> ladder{1e2, std::pow(10.0, 2.5), 1e3};
  double tolerance = 1e-4;  // bits
  bool extrapolate = true;

  double finest() const { return ladder.back(); }
};

namespace detail {

/// Value at h = 0 of the polynomial through (h_i, y_i) (Neville).
inline double extrapolate_to_zero(std::vector<double> h, std::vector<double> y) {
  for (std::size_t level = 1; level < y.size(); ++level) {
    for (std::size_t i = y.size() - 1; i >= level; --i) {
      y[i] = (h[i - level] * y[i] - h[i] * y[i - 1]) / (h[i - level] - h[i]);
      if (i == level) break;
    }
  }
  return y.back();
}

}  // namespace detail

/// Solves t and (eta, V_phi) for a configuration whose g, geometry, gain and
/// source are fixed, then evaluates the key rate.
inline KeyRateReport attack_rate(const GaussianChannelTarget& target, const AttackConfig& partial,
                                 const RateSettings& settings) {
  auto config = partial;
  config.t = solve_t(target, config.g, config.geometry);
  const auto eff = effective_source(config);
  const auto solved = solve_eta_vphi(target, config, [&](const AttackConfig& c) {
    return holevo_bound(build_state(c, settings.v_a), settings);
  });
  config.eta = solved.eta;
  config.v_phi = solved.v_phi;
  auto report = secret_key_rate(build_state(config, settings.v_a), settings);
  report.solved_config = config;
  report.gamma_g = eff.source.squeezing();
  report.t4_g = eff.t4;
  return report;
}

/// Runs `rung(x)` over the ladder and takes the Holevo bound to x -> infinity.
/// The returned report carries the finest rung's solved configuration.
template <class Rung>
KeyRateReport limit_ladder(const LimitPolicy& policy, const RateSettings& settings, Rung&& rung) {
  const auto& xs = policy.ladder;
  if (xs.empty()) throw DomainError("limit ladder is empty");
  std::vector<double> h, holevo;
  KeyRateReport report;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0 && !(xs[i] > xs[i - 1])) throw DomainError("limit ladder must be increasing");
    report = rung(xs[i]);
    h.push_back(1.0 / xs[i]);
    holevo.push_back(report.holevo);
  }
  const std::size_t n = holevo.size();
  double estimate = holevo.back(), previous = n > 1 ? holevo[n - 2] : estimate;
  if (policy.extrapolate && n > 1) {
    const auto tail = [&](std::size_t k) {
      return detail::extrapolate_to_zero({h.end() - static_cast<std::ptrdiff_t>(k), h.end()},
                                         {holevo.end() - static_cast<std::ptrdiff_t>(k), holevo.end()});
    };
    const std::size_t k = std::min<std::size_t>(n, 3);
    estimate = tail(k);
    previous = k > 2 ? tail(2) : holevo.back();
  }
  report.converged = n == 1 || std::abs(estimate - previous) < policy.tolerance;
  report.holevo = estimate;
  report.rate_raw = settings.beta * report.mutual_information - report.holevo;
  report.rate = std::max(report.rate_raw, 0.0);
  return report;
}

/// Converged limit of a strong distilled source (g and V_rho after the NLA
/// both large).
inline KeyRateReport attack_rate_limit(const GaussianChannelTarget& target, const LinkGeometry& geometry,
                                       double nla_gain, const RateSettings& settings,
                                       const LimitPolicy& policy = {}) {
  return limit_ladder(policy, settings, [&](double x) {
    AttackConfig partial;
    partial.g = x;
    partial.geometry = geometry;
    partial.nla_gain = nla_gain;
    partial.distilled_v_rho = x;
    return attack_rate(target, partial, settings);
  });
}

/// Large-g limit for a fixed prepared source.
inline KeyRateReport attack_rate_large_g(const GaussianChannelTarget& target, const AttackConfig& partial,
                                         const RateSettings& settings, const LimitPolicy& policy = {}) {
  return limit_ladder(policy, settings, [&](double x) {
    auto c = partial;
    c.g = x;
    return attack_rate(target, c, settings);
  });
}

/// Minimal EPR variance in the large-g limit, extrapolated over the ladder
/// like the rates. No finite rung needs more entanglement than this.
inline double min_epr_variance_limit(const GaussianChannelTarget& target, const LinkGeometry& geometry,
                                     const LimitPolicy& policy = {}) {
  const auto& xs = policy.ladder;
  if (xs.empty()) throw DomainError("limit ladder is empty");
  const auto at = [&](double g) {
    AttackConfig partial;
    partial.g = g;
    partial.geometry = geometry;
    partial.t = solve_t(target, g, geometry);
    return min_epr_variance(target, partial).variance();
  };
  const double finest = at(xs.back());
  if (xs.size() == 1 || !policy.extrapolate) return finest;
  std::vector<double> h, v;
  for (std::size_t i = xs.size() - std::min<std::size_t>(xs.size(), 3); i < xs.size(); ++i) {
    h.push_back(1.0 / xs[i]);
    v.push_back(i + 1 == xs.size() ? finest : at(xs[i]));
  }
  return std::max(finest, detail::extrapolate_to_zero(h, v));
}

/// Attack with the least entanglement that still reproduces the channel.
inline KeyRateReport attack_rate_at_min_entanglement(const GaussianChannelTarget& target, const AttackConfig& partial,
                                                     const RateSettings& settings) {
  auto config = partial;
  config.t = solve_t(target, config.g, config.geometry);
  config.distilled_v_rho = min_epr_variance(target, config).variance();
  return attack_rate(target, config, settings);
}

// ---------------------------------------------------------------------------
// Reference attacks

/// Entangling cloner holding the full purification of the channel.
inline KeyRateReport optimal_collective_baseline(const GaussianChannelTarget& target, const RateSettings& settings) {
  return secret_key_rate(entangling_cloner_state(target, {}, settings.v_a), settings);
}

/// Teleportation attack with lossless stations at the minimal entanglement,
/// in the large-g limit.
inline KeyRateReport individual_attack_baseline(const GaussianChannelTarget& target, const RateSettings& settings,
                                                const LimitPolicy& policy = {}) {
  return limit_ladder(policy, settings, [&](double x) {
    AttackConfig partial;
    partial.g = x;
    partial.geometry = LinkGeometry::lossless();
    return attack_rate_at_min_entanglement(target, partial, settings);
  });
}

}  // namespace cvqkd
