#pragma once

// Scenario grids, the NLA gain threshold and cutoff distances.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cvqkd/attack.hpp"
#include "cvqkd/channel.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/keyrate.hpp"

namespace cvqkd {

enum class Scenario { fig1b, stations, distance_fibers, nla_stations, nla_gain_map, fixed_variance, threshold };

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::fig1b: return "fig1b";
    case Scenario::stations: return "stations";
    case Scenario::distance_fibers: return "distance_fibers";
    case Scenario::nla_stations: return "nla_stations";
    case Scenario::nla_gain_map: return "nla_gain_map";
    case Scenario::fixed_variance: return "fixed_variance";
    case Scenario::threshold: return "threshold";
  }
  return "?";
}

inline Scenario parse_scenario(const std::string& text) {
  for (auto s : {Scenario::fig1b, Scenario::stations, Scenario::distance_fibers, Scenario::nla_stations,
                 Scenario::nla_gain_map, Scenario::fixed_variance, Scenario::threshold}) {
    if (text == to_string(s)) return s;
  }
  throw DomainError("unknown scenario '" + text + "'");
}

enum class AttackClass { collective, individual, teleport };

inline const char* to_string(AttackClass a) {
  switch (a) {
    case AttackClass::collective: return "collective";
    case AttackClass::individual: return "individual";
    case AttackClass::teleport: return "teleport";
  }
  return "?";
}

inline AttackClass parse_attack(const std::string& text) {
  for (auto a : {AttackClass::collective, AttackClass::individual, AttackClass::teleport}) {
    if (text == to_string(a)) return a;
  }
  throw DomainError("unknown attack class '" + text + "'");
}

/// Names a sweep axis may bind.
inline const std::vector<std::string>& axis_names() {
  static const std::vector<std::string> names{"V_rho", "L1", "L2", "L_total", "G", "epsilon", "alpha_eve"};
  return names;
}

struct Axis {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  int steps = 2;
  bool log = false;

  std::vector<double> values() const {
    if (steps == 1) return {min};
    std::vector<double> v(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
      const double f = static_cast<double>(i) / (steps - 1);
      v[static_cast<std::size_t>(i)] =
          log ? std::exp(std::log(min) + f * (std::log(max) - std::log(min))) : min + f * (max - min);
    }
    v.back() = max;
    return v;
  }
};

/// Physical parameters of one evaluation.
struct Parameters {
  RateSettings rate;
  double epsilon = 0.04;
  double alpha_system = 0.275;
  FiberSpec eve_fiber = fibers::hollowcore();
  double l_total = 50.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double gain = 1.0;
  std::optional<double> v_rho;  // prepared source; unset means the converged strong-source limit
  AttackClass attack = AttackClass::teleport;
  LimitPolicy limit;

  GaussianChannelTarget target() const { return target_from_system(alpha_system, l_total, epsilon); }
  LinkGeometry geometry() const { return LinkGeometry(l1, l2, l_total, eve_fiber); }

  void set(const std::string& name, double value) {
    if (name == "V_rho") v_rho = value;
    else if (name == "L1") l1 = value;
    else if (name == "L2") l2 = value;
    else if (name == "L_total") l_total = value;
    else if (name == "G") gain = value;
    else if (name == "epsilon") epsilon = value;
    else if (name == "alpha_eve") eve_fiber = custom_fiber(value);
    else throw DomainError("unknown axis '" + name + "'");
  }
};

struct SweepSpec {
  Scenario scenario = Scenario::fig1b;
  std::vector<Axis> axes;
  Parameters fixed;
};

enum class PointFlag { ok, infeasible, nonpositive };

inline const char* to_string(PointFlag f) {
  switch (f) {
    case PointFlag::ok: return "ok";
    case PointFlag::infeasible: return "infeasible";
    case PointFlag::nonpositive: return "nonpositive";
  }
  return "?";
}

struct SweepPoint {
  std::vector<double> coordinates;
  std::optional<KeyRateReport> report;
  PointFlag flag = PointFlag::infeasible;
  std::string message;
  std::vector<double> extras;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<std::string> extra_columns;
  std::vector<SweepPoint> points;  // row-major, last axis fastest
};

/// Key rate of one parameter set under its attack class.
inline KeyRateReport evaluate(const Parameters& p) {
  const auto target = p.target();
  switch (p.attack) {
    case AttackClass::collective: return optimal_collective_baseline(target, p.rate);
    case AttackClass::individual: return individual_attack_baseline(target, p.rate, p.limit);
    case AttackClass::teleport: break;
  }
  const auto geometry = p.geometry();
  if (!p.v_rho) return attack_rate_limit(target, geometry, p.gain, p.rate, p.limit);
  AttackConfig partial;
  partial.geometry = geometry;
  partial.nla_gain = p.gain;
  partial.v_rho = *p.v_rho;
  return attack_rate_large_g(target, partial, p.rate, p.limit);
}

inline SweepPoint evaluate_point(const Parameters& p, std::vector<double> coordinates) {
  SweepPoint point;
  point.coordinates = std::move(coordinates);
  try {
    point.report = evaluate(p);
    point.flag = point.report->rate_raw > 0.0 ? PointFlag::ok : PointFlag::nonpositive;
  } catch (const Error& e) {
    point.flag = PointFlag::infeasible;
    point.message = std::string(e.name()) + ": " + e.what();
  }
  return point;
}

inline unsigned sweep_threads() {
  if (const char* env = std::getenv("CVQKD_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs `task(i)` for i in [0, count) on a worker pool.
template <class Task>
void parallel_for(std::size_t count, Task&& task) {
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(sweep_threads(), std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  const auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) task(i);
  };
  if (workers <= 1) {
    run();
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Gain threshold and fixed-variance region

struct ThresholdResult {
  double gain;
  double rate_colocated;  // L2 = 0
  double rate_receiver;   // L2 = L_total
  double bracket_lo;
  double bracket_hi;
};

/// Gain at which the worst station-II position moves from Alice's side
/// (L2 = 0) to Bob's side (L2 = L_total). Station I sits at Alice.
inline ThresholdResult find_threshold_gain(const Parameters& base, double g_lo, double g_hi, double tol) {
  if (!(g_lo >= 1.0 && g_hi > g_lo && tol > 0.0)) throw DomainError("invalid gain interval or tolerance");
  auto colocated = base;
  colocated.attack = AttackClass::teleport;
  colocated.l1 = colocated.l2 = 0.0;
  colocated.v_rho.reset();
  auto receiver = colocated;
  receiver.l2 = base.l_total;

  const auto diff = [&](double g) {
    colocated.gain = receiver.gain = g;
    const double a = evaluate(colocated).rate_raw;
    const double b = evaluate(receiver).rate_raw;
    return std::pair{a - b, std::pair{a, b}};
  };
  auto lo = diff(g_lo);
  auto hi = diff(g_hi);
  if ((lo.first < 0.0) == (hi.first < 0.0)) {
    throw NoThresholdError("worst-case station placement does not flip on the gain interval");
  }
  double a = g_lo, b = g_hi;
  while (b - a > tol) {
    const double m = 0.5 * (a + b);
    const auto mid = diff(m);
    if ((mid.first < 0.0) == (lo.first < 0.0)) {
      a = m;
      lo = mid;
    } else {
      b = m;
      hi = mid;
    }
  }
  const double g = 0.5 * (a + b);
  const auto at = diff(g);
  return {g, at.second.first, at.second.second, a, b};
}

struct GainInterval {
  double l2;
  double g_min = std::numeric_limits<double>::quiet_NaN();
  double g_max = std::numeric_limits<double>::quiet_NaN();
  std::optional<KeyRateReport> left;   // least entanglement that still reproduces the channel
  std::optional<KeyRateReport> right;  // distilled squeezing at its upper bound
  PointFlag flag = PointFlag::infeasible;
};

/// Admissible NLA gains for a fixed prepared source at each L2, with the key
/// rate on both boundaries. Station I sits at Alice.
inline std::vector<GainInterval> feasible_gain_region(const Parameters& base, const std::vector<double>& l2_values) {
  if (!base.v_rho) throw DomainError("the fixed-variance region needs a prepared source variance");
  const auto target = base.target();
  const auto source = EprSource::from_variance(*base.v_rho);
  std::vector<GainInterval> out(l2_values.size());
  parallel_for(l2_values.size(), [&](std::size_t i) {
    GainInterval& row = out[i];
    row.l2 = l2_values[i];
    try {
      const LinkGeometry geometry(0.0, row.l2, base.l_total, base.eve_fiber);
      AttackConfig partial;
      partial.g = base.limit.finest();
      partial.geometry = geometry;
      partial.v_rho = *base.v_rho;
      partial.t = solve_t(target, partial.g, geometry);
      row.g_max = max_gain(source, geometry.t4());
      const auto feasible = [&](double g) {
        auto c = partial;
        c.nla_gain = g;
        try {
          return noise_profile(c).feasible_interval(target.chi()).has_value();
        } catch (const GainTooLargeError&) {
          return false;
        }
      };
      // Cap the search where the distilled variance reaches the top of the
      // limit ladder; beyond it the pipeline loses precision.
      double hi = gain_for_distilled(source, geometry.t4(), base.limit.ladder.back());
      if (!feasible(hi)) return;
      double lo = 1.0;
      if (feasible(lo)) {
        row.g_min = 1.0;
      } else {
        for (int k = 0; k < 200 && hi - lo > 1e-12 * hi; ++k) {
          const double m = 0.5 * (lo + hi);
          (feasible(m) ? hi : lo) = m;
        }
        row.g_min = hi;
      }
      partial.nla_gain = row.g_min;
      row.left = attack_rate(target, partial, base.rate);
      if (std::isfinite(row.g_max)) {
        row.right = attack_rate_limit(target, geometry, row.g_max, base.rate, base.limit);
      }
      row.flag = row.left->rate_raw > 0.0 ? PointFlag::ok : PointFlag::nonpositive;
    } catch (const Error&) {
      row.flag = PointFlag::infeasible;
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Cutoff distance

/// Distance of the first zero crossing of the raw rate of `p.attack`. For
/// the teleportation attack the stations sit at Alice, so Eve's fiber spans
/// the whole link. A coarse scan brackets the first crossing, bisection
/// refines it; the far tail, where the rate is below roundoff, is never
/// consulted. Returns nullopt when the rate stays positive up to `max_km`.
inline std::optional<double> cutoff_distance(Parameters p, double tol, double max_km = 500.0,
                                             double scan_step = 5.0) {
  if (!(tol > 0.0 && scan_step > 0.0)) throw DomainError("tolerance and scan step must be positive");
  p.l1 = p.l2 = 0.0;
  const auto rate_at = [&](double km) {
    p.l_total = km;
    return evaluate(p).rate_raw;
  };
  double lo = 1.0;
  if (!(rate_at(lo) > 0.0)) throw DomainError("key rate is not positive at the start of the link");
  double hi = lo;
  while (true) {
    if (hi >= max_km) return std::nullopt;
    hi = std::min(lo + scan_step, max_km);
    if (!(rate_at(hi) > 0.0)) break;
    lo = hi;
  }
  while (hi - lo > tol) {
    const double m = 0.5 * (lo + hi);
    (rate_at(m) > 0.0 ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Grid engine

inline SweepResult run_sweep(const SweepSpec& spec) {
  for (const auto& axis : spec.axes) {
    if (std::find(axis_names().begin(), axis_names().end(), axis.name) == axis_names().end()) {
      throw DomainError("unknown axis '" + axis.name + "'");
    }
    if (axis.steps < 1) throw DomainError("axis '" + axis.name + "' needs at least one step");
    if (axis.log && !(axis.min > 0.0 && axis.max > 0.0)) throw DomainError("log axis needs positive bounds");
  }
  std::vector<std::vector<double>> values;
  std::size_t total = 1;
  for (const auto& axis : spec.axes) {
    values.push_back(axis.values());
    total *= values.back().size();
  }

  SweepResult result;
  result.spec = spec;
  if (spec.scenario == Scenario::threshold) {
    result.extra_columns = {"G_th", "rate_colocated", "rate_receiver"};
  }
  result.points.resize(total);
  parallel_for(total, [&](std::size_t index) {
    auto p = spec.fixed;
    std::vector<double> coords(values.size());
    std::size_t rest = index;
    for (std::size_t a = values.size(); a-- > 0;) {
      coords[a] = values[a][rest % values[a].size()];
      rest /= values[a].size();
    }
    try {
      for (std::size_t a = 0; a < coords.size(); ++a) p.set(spec.axes[a].name, coords[a]);
    } catch (const Error& e) {
      result.points[index].coordinates = coords;
      result.points[index].message = e.what();
      return;
    }
    if (spec.scenario != Scenario::threshold) {
      result.points[index] = evaluate_point(p, std::move(coords));
      return;
    }
    SweepPoint point;
    point.coordinates = std::move(coords);
    point.extras.assign(3, std::numeric_limits<double>::quiet_NaN());
    try {
      const auto th = find_threshold_gain(p, 1.0, 100.0, 1e-3);
      point.extras = {th.gain, th.rate_colocated, th.rate_receiver};
      p.gain = th.gain;
      p.l1 = p.l2 = 0.0;
      p.v_rho.reset();
      point.report = evaluate(p);
      point.flag = PointFlag::ok;
    } catch (const Error& e) {
      point.flag = PointFlag::infeasible;
      point.message = std::string(e.name()) + ": " + e.what();
    }
    result.points[index] = std::move(point);
  });
  return result;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_csv(std::ostream& out, const SweepResult& result) {
  for (const auto& axis : result.spec.axes) out << axis.name << ',';
  out << "I_ab,holevo,rate_raw,rate,flag,t,eta,V_phi,gamma_G,T4_G";
  for (const auto& c : result.extra_columns) out << ',' << c;
  out << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : result.points) {
    for (double c : p.coordinates) out << format_number(c) << ',';
    const auto& r = p.report;
    const auto& cfg = r ? r->solved_config : std::nullopt;
    out << format_number(r ? r->mutual_information : nan) << ',' << format_number(r ? r->holevo : nan) << ','
        << format_number(r ? r->rate_raw : nan) << ',' << format_number(r ? r->rate : nan) << ',' << to_string(p.flag)
        << ',' << format_number(cfg ? cfg->t : nan) << ',' << format_number(cfg ? cfg->eta : nan) << ','
        << format_number(cfg ? cfg->v_phi : nan) << ',' << format_number(r && r->gamma_g ? *r->gamma_g : nan) << ','
        << format_number(r && r->t4_g ? *r->t4_g : nan);
    for (double e : p.extras) out << ',' << format_number(e);
    out << '\n';
  }
}

}  // namespace cvqkd
