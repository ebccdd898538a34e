#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

namespace cvqkd {
namespace {

using testing::max_abs_diff;

GaussianChannelTarget deployed_50km() { return target_from_system(0.275, 50.0, 0.04); }

AttackConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AttackConfig c;
  c.g = 1.0 + 20.0 * unit(rng);
  c.t = unit(rng);
  c.eta = unit(rng);
  c.v_rho = 1.0 + 30.0 * unit(rng);
  c.v_phi = 1.0 + 10.0 * unit(rng);
  const double l1 = 20.0 * unit(rng);
  const double l2 = l1 + 30.0 * unit(rng);
  c.geometry = LinkGeometry(l1, l2, l2 + 20.0 * unit(rng), fibers::g652());
  return c;
}

TEST(Attack, EprSourceConversions) {
  const auto s = EprSource::from_variance(5.0);
  EXPECT_NEAR(s.squeezing(), std::sqrt(4.0 / 6.0), 1e-15);
  EXPECT_NEAR(EprSource::from_squeezing(s.squeezing()).variance(), 5.0, 1e-12);
  EXPECT_DOUBLE_EQ(EprSource::from_squeezing(0.0).variance(), 1.0);
  EXPECT_THROW(EprSource::from_squeezing(1.0), DomainError);
  EXPECT_THROW(EprSource::from_variance(0.5), DomainError);
}

TEST(Attack, NlaEquivalentValues) {
  const auto eq = nla_equivalent(EprSource::from_squeezing(0.5), 0.25, 2.0);
  EXPECT_NEAR(eq.source.squeezing(), 0.5 * std::sqrt(1.75), 1e-15);
  EXPECT_NEAR(eq.source.squeezing(), 0.6614378, 1e-7);
  EXPECT_NEAR(eq.t4, 1.0 / 1.75, 1e-15);
  EXPECT_NEAR(max_gain(EprSource::from_squeezing(0.5), 1.0), 2.0, 1e-15);
}

TEST(Attack, NlaAtUnitGainIsIdentity) {
  for (double v : {1.0, 1.3, 7.0, 1e4}) {
    for (double t4 : {0.0, 0.2, 1.0}) {
      const auto src = EprSource::from_variance(v);
      const auto eq = nla_equivalent(src, t4, 1.0);
      EXPECT_EQ(eq.source.squeezing(), src.squeezing());
      EXPECT_EQ(eq.source.variance(), src.variance());
      EXPECT_EQ(eq.t4, t4);
    }
  }
}

TEST(Attack, NlaGainLimits) {
  const auto src = EprSource::from_variance(1.5);
  const double gmax = max_gain(src, 0.3);
  EXPECT_NO_THROW(nla_equivalent(src, 0.3, 0.999 * gmax));
  EXPECT_THROW(nla_equivalent(src, 0.3, 1.001 * gmax), GainTooLargeError);
  EXPECT_THROW(nla_equivalent(src, 0.3, 0.9), DomainError);
  EXPECT_TRUE(std::isinf(max_gain(EprSource::from_variance(1.0), 0.3)));
}

TEST(Attack, DistillationRoundTrip) {
  const auto src = EprSource::from_variance(1.2);
  const double t4 = 0.4;
  const double g = gain_for_distilled(src, t4, 50.0);
  EXPECT_NEAR(nla_equivalent(src, t4, g).source.variance(), 50.0, 1e-8);
  EXPECT_NEAR(source_for_distilled(50.0, t4, g).variance(), 1.2, 1e-12);
  EXPECT_THROW(gain_for_distilled(src, t4, 1.1), DomainError);
}

TEST(Attack, DistilledSourceOverridesPrepared) {
  AttackConfig c;
  c.geometry = LinkGeometry(0.0, 20.0, 50.0, fibers::g652());
  c.nla_gain = 3.0;
  c.distilled_v_rho = 40.0;
  c.v_rho = 999.0;
  const auto eff = effective_source(c);
  EXPECT_DOUBLE_EQ(eff.source.variance(), 40.0);
  const auto again = nla_equivalent(EprSource::from_variance(prepared_variance(c)), c.geometry.t4(), 3.0);
  EXPECT_NEAR(again.source.variance(), 40.0, 1e-9);
  EXPECT_NEAR(again.t4, eff.t4, 1e-15);
}

TEST(Attack, SolveTransmittance) {
  const GaussianChannelTarget target(0.25, 0.0);
  EXPECT_NEAR(solve_t(target, 1.0, LinkGeometry::lossless()), 0.25, 1e-15);
  EXPECT_NEAR(solve_t(target, 2.0, LinkGeometry::from_transmittances(1.0, 0.5, 1.0)), 0.25, 1e-15);
  EXPECT_THROW(solve_t(target, 1.0, LinkGeometry::from_transmittances(0.2, 1.0, 1.0)), InfeasibleError);
  EXPECT_THROW(solve_t(target, 0.5, LinkGeometry::lossless()), DomainError);
}

TEST(Attack, StateLayoutAndPhysicality) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 30; ++k) {
    const auto c = random_config(rng);
    const auto bundle = build_state(c, 4.0);
    EXPECT_EQ(bundle.state.labels(), attack_mode_labels());
    EXPECT_TRUE(is_physical(bundle.state));
    // The whole register is pure.
    EXPECT_LT(von_neumann_entropy(bundle.state), 1e-6);
  }
}

TEST(Attack, PipelineTransmittanceAndCorrelation) {
  std::mt19937_64 rng(22);
  for (int k = 0; k < 30; ++k) {
    const auto c = random_config(rng);
    const double v = 5.0;
    const auto ab = build_state(c, v - 1.0).alice_bob().matrix();
    const double tt = simulated_transmittance(c);
    EXPECT_NEAR(ab(0, 2), std::sqrt(tt * (v * v - 1.0)), 1e-9 * (1.0 + ab(0, 2)));
    EXPECT_NEAR(ab(1, 3), -std::sqrt(tt * (v * v - 1.0)), 1e-9 * (1.0 + ab(0, 2)));
    EXPECT_NEAR(ab(2, 2), tt * v + simulated_noise(c), 1e-9 * ab(2, 2));
  }
}

TEST(Attack, ClosedFormNoiseMatchesPipeline) {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 100; ++k) {
    auto c = random_config(rng);
    if (k % 3 == 0) c.nla_gain = 1.0 + 0.5 * (k % 5);
    double chi;
    try {
      chi = simulated_noise(c);
    } catch (const GainTooLargeError&) {
      continue;
    }
    EXPECT_NEAR(chi, simulated_noise_closed_form(c), 1e-9 * std::max(1.0, chi));
  }
}

TEST(Attack, NoiseProfileIsExact) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    auto c = random_config(rng);
    const auto profile = noise_profile(c);
    const double u = unit(rng);
    c.eta = u * u;
    c.v_phi = 1.0 + 5.0 * unit(rng);
    const double predicted = profile.at(u) + profile.slope * (1.0 - u * u) * (c.v_phi - 1.0);
    const double chi = simulated_noise(c);
    EXPECT_NEAR(predicted, chi, 1e-8 * std::max(1.0, chi));
  }
}

TEST(Attack, LosslessStationsReduceToIdealTeleportation) {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    AttackConfig c;
    c.g = 1.0 + 50.0 * unit(rng);
    c.t = unit(rng);
    c.eta = unit(rng);
    c.v_rho = 1.0 + 30.0 * unit(rng);
    c.v_phi = 1.0 + 10.0 * unit(rng);
    const double v = 1.0 + 10.0 * unit(rng);
    const auto ab = build_state(c, v - 1.0).alice_bob().matrix();

    const double a = c.v_rho;
    const double b = c.eta * c.v_rho + (1.0 - c.eta) * c.v_phi;
    const double corr = std::sqrt(c.eta * (c.v_rho * c.v_rho - 1.0));
    const double tt = c.g * c.t;
    const double chi = c.t * (c.g - 1.0) * a + (1.0 - c.t) * b - 2.0 * std::sqrt(c.t * (1.0 - c.t) * (c.g - 1.0)) * corr;
    Matrix ideal(4, 4);
    const double x = std::sqrt(tt * (v * v - 1.0));
    ideal << v * identity2(), x * pauli_z(), x * pauli_z(), (tt * v + chi) * identity2();
    EXPECT_LT(max_abs_diff(ab, ideal), 1e-9 * std::max(1.0, ideal.cwiseAbs().maxCoeff()));
  }
}

TEST(Attack, SolvedConfigReproducesChannel) {
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const RateSettings settings;
  int solved = 0;
  for (int k = 0; k < 40; ++k) {
    const auto target = target_from_system(0.2 + 0.1 * unit(rng), 20.0 + 60.0 * unit(rng), 0.01 + 0.08 * unit(rng));
    const double lt = 50.0;
    const double l1 = 10.0 * unit(rng);
    const double l2 = l1 + (lt - l1) * unit(rng);
    AttackConfig partial;
    partial.g = 30.0;
    partial.geometry = LinkGeometry(l1, l2, lt, fibers::hollowcore());
    partial.distilled_v_rho = 500.0;
    KeyRateReport report;
    try {
      report = attack_rate(target, partial, settings);
    } catch (const InfeasibleError&) {
      continue;
    }
    ++solved;
    const auto ab = build_state(*report.solved_config, settings.v_a).alice_bob().matrix();
    const Matrix ref = testing::channel_output_ab(settings.v_a + 1.0, target.transmittance(), target.chi());
    EXPECT_LT(max_abs_diff(ab, ref), 1e-6);
  }
  EXPECT_GE(solved, 20);
}

TEST(Attack, EtaVphiSolverFindsGridMaximum) {
  const auto target = deployed_50km();
  const RateSettings settings;
  AttackConfig partial;
  partial.g = 20.0;
  partial.geometry = LinkGeometry(0.0, 20.0, 50.0, fibers::g652());
  partial.distilled_v_rho = 30.0;
  partial.t = solve_t(target, partial.g, partial.geometry);
  const auto objective = [&](const AttackConfig& c) { return holevo_bound(build_state(c, settings.v_a), settings); };
  const auto best = solve_eta_vphi(target, partial, objective);
  auto c = partial;
  c.eta = best.eta;
  c.v_phi = best.v_phi;
  const double found = objective(c);

  const auto profile = noise_profile(partial);
  const auto interval = *profile.feasible_interval(target.chi());
  double grid_best = -1e9;
  for (int i = 0; i <= 2000; ++i) {
    const double u = interval[0] + (interval[1] - interval[0]) * i / 2000.0;
    c.eta = u * u;
    c.v_phi = profile.v_phi(u, target.chi());
    grid_best = std::max(grid_best, objective(c));
  }
  EXPECT_GE(found, grid_best - 1e-9);
}

TEST(Attack, InfeasibleSourceIsReported) {
  const auto target = deployed_50km();
  AttackConfig partial;
  partial.g = 100.0;
  partial.v_rho = 1.0001;
  partial.geometry = LinkGeometry::lossless(50.0);
  EXPECT_THROW(attack_rate(target, partial, {}), InfeasibleError);
}

TEST(Attack, MinimalSqueezingMatchesClosedForm) {
  const auto target = deployed_50km();
  std::mt19937_64 rng(27);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    AttackConfig partial;
    partial.g = 2.0 + 200.0 * unit(rng);
    const double l1 = 5.0 * unit(rng);
    const double l2 = l1 + 40.0 * unit(rng);
    partial.geometry = LinkGeometry(l1, l2, 50.0, fibers::hollowcore());
    partial.t = solve_t(target, partial.g, partial.geometry);
    const auto& geo = partial.geometry;
    const double bisected = min_epr_variance(target, partial).squeezing();
    const double closed = min_squeezing_closed_form(target, partial.g, partial.t, geo.t1(), geo.t2(), geo.t3(), geo.t4());
    EXPECT_NEAR(bisected, closed, 1e-9);
  }
}

TEST(Attack, MinimalSqueezingApproachesLargeGainForm) {
  const auto target = deployed_50km();
  AttackConfig partial;
  partial.geometry = LinkGeometry(0.0, 25.0, 50.0, fibers::hollowcore());
  partial.nla_gain = 2.0;
  const double t4g = effective_source([&] {
                       auto c = partial;
                       c.distilled_v_rho = 2.0;
                       return c;
                     }())
                         .t4;
  const auto& geo = partial.geometry;
  const double limit = min_squeezing_nla_limit(target, geo.t1(), geo.t2(), t4g);
  double previous = 1.0;
  for (double g : {1e2, 1e3, 1e4}) {
    partial.g = g;
    partial.t = solve_t(target, g, geo);
    const double gamma = min_epr_variance(target, partial).squeezing();
    EXPECT_LT(std::abs(gamma - limit), previous);
    previous = std::abs(gamma - limit);
  }
  EXPECT_LT(previous, 1e-3);
}

TEST(Attack, ClonerWithoutTrustedLossMatchesChannel) {
  const auto target = deployed_50km();
  const auto bundle = entangling_cloner_state(target, {}, 4.0);
  const Matrix ref = testing::channel_output_ab(5.0, target.transmittance(), target.chi());
  EXPECT_LT(max_abs_diff(bundle.alice_bob().matrix(), ref), 1e-12);
  EXPECT_LT(von_neumann_entropy(bundle.state), 1e-9);
  EXPECT_THROW(entangling_cloner_state(target, {0.01, 1.0}, 4.0), InfeasibleError);
}

}  // namespace
}  // namespace cvqkd
