#pragma once

// Default scenario grids and figure reproduction: CSV tables plus gnuplot
// scripts, returned as (file name, content) pairs.

#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cvqkd/keyrate.hpp"
#include "cvqkd/sweep.hpp"

namespace cvqkd {

struct Artifact {
  std::string name;
  std::string content;
};

inline const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig1b", "fig3", "fig4", "fig5", "fig6", "fig7"};
  return ids;
}

/// Grid used for a scenario when the caller gives no axes.
inline SweepSpec default_spec(Scenario scenario, Parameters p) {
  SweepSpec spec;
  spec.scenario = scenario;
  const double lt = p.l_total;
  switch (scenario) {
    case Scenario::fig1b: {
      p.eve_fiber = fibers::lossless();
      p.gain = 1.0;
      const double v_min = min_epr_variance_limit(p.target(), p.geometry(), p.limit);
      spec.axes = {{"V_rho", v_min, 1e4, 51, true}};
      break;
    }
    case Scenario::stations:
    case Scenario::nla_stations:
      spec.axes = {{"L1", 0.0, lt, 41}, {"L2", 0.0, lt, 41}};
      break;
    case Scenario::distance_fibers:
      spec.axes = {{"L_total", 1.0, 200.0, 51}};
      break;
    case Scenario::nla_gain_map:
      p.l1 = 0.0;
      spec.axes = {{"L2", 0.0, lt, 41}, {"G", 1.0, 30.0, 41, true}};
      break;
    case Scenario::fixed_variance:
      p.l1 = 0.0;
      if (!p.v_rho) p.v_rho = 1.02;
      spec.axes = {{"L2", 0.0, lt, 41}, {"G", 1.0, 30.0, 41, true}};
      break;
    case Scenario::threshold:
      spec.axes = {{"alpha_eve", 0.1, 0.275, 8}};
      break;
  }
  if (scenario != Scenario::fixed_variance && scenario != Scenario::fig1b) p.v_rho.reset();
  p.attack = AttackClass::teleport;
  spec.fixed = p;
  return spec;
}

namespace detail {

inline std::string csv(const SweepResult& r) {
  std::ostringstream out;
  write_csv(out, r);
  return out.str();
}

inline std::string map_script(const std::string& csv_name, const std::string& x, const std::string& y,
                              int x_col, int y_col, int rate_col, const std::string& title) {
  std::ostringstream s;
  s << "set datafile separator ','\n"
    << "set datafile missing 'nan'\n"
    << "set title '" << title << "'\n"
    << "set xlabel '" << x << "'\nset ylabel '" << y << "'\n"
    << "set view map\nset pm3d map\n"
    << "splot '" << csv_name << "' skip 1 using " << x_col << ':' << y_col << ':' << rate_col << " with pm3d notitle\n";
  return s.str();
}

inline std::string line_script(const std::string& csv_name, const std::string& x, const std::vector<std::string>& series,
                               const std::string& title, bool logx = false) {
  std::ostringstream s;
  s << "set datafile separator ','\n"
    << "set datafile missing 'nan'\n"
    << "set title '" << title << "'\n"
    << "set xlabel '" << x << "'\nset ylabel 'secret key rate (bits/use)'\n";
  if (logx) s << "set logscale x\n";
  s << "plot ";
  for (std::size_t i = 0; i < series.size(); ++i) {
    s << (i ? ", \\\n     " : "") << "'" << csv_name << "' skip 1 using 1:" << i + 2 << " with lines title '"
      << series[i] << "'";
  }
  s << '\n';
  return s.str();
}

inline double rate_or_nan(const SweepPoint& p) {
  return p.report ? p.report->rate : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

inline std::vector<Artifact> figure_fig1b(const Parameters& base) {
  auto spec = default_spec(Scenario::fig1b, base);
  spec.fixed.eve_fiber = fibers::lossless();
  const auto teleport = run_sweep(spec);
  const auto target = spec.fixed.target();
  const double individual = individual_attack_baseline(target, spec.fixed.rate, spec.fixed.limit).rate;
  const double collective = optimal_collective_baseline(target, spec.fixed.rate).rate;
  std::ostringstream out;
  out << "V_rho,rate_teleport,rate_individual,rate_collective\n";
  for (const auto& p : teleport.points) {
    out << format_number(p.coordinates[0]) << ',' << format_number(detail::rate_or_nan(p)) << ','
        << format_number(individual) << ',' << format_number(collective) << '\n';
  }
  return {{"fig1b.csv", out.str()},
          {"fig1b.gp", detail::line_script("fig1b.csv", "V_rho", {"teleportation", "individual", "collective"},
                                          "key rate vs EPR variance", true)}};
}

inline std::vector<Artifact> figure_fig3(const Parameters& base) {
  std::vector<Artifact> out;
  const std::pair<const char*, double> panels[] = {{"fig3a", 50.0}, {"fig3b", 100.0}};
  for (const auto& [name, lt] : panels) {
    auto p = base;
    p.l_total = lt;
    const auto result = run_sweep(default_spec(Scenario::stations, p));
    out.push_back({std::string(name) + ".csv", detail::csv(result)});
    out.push_back({std::string(name) + ".gp",
                   detail::map_script(std::string(name) + ".csv", "L1 (km)", "L2 (km)", 1, 2, 6,
                                      "station placement, L_total = " + format_number(lt) + " km")});
  }
  return out;
}

inline std::vector<Artifact> figure_fig4(const Parameters& base) {
  std::vector<Artifact> out;
  const std::pair<const char*, double> panels[] = {{"fig4a", 0.04}, {"fig4b", 0.1}};
  const FiberSpec fibers_used[] = {fibers::g652(), fibers::lowloss(), fibers::hollowcore()};
  for (const auto& [name, eps] : panels) {
    auto p = base;
    p.epsilon = eps;
    auto spec = default_spec(Scenario::distance_fibers, p);
    std::vector<SweepResult> series;
    auto coll = spec;
    coll.fixed.attack = AttackClass::collective;
    series.push_back(run_sweep(coll));
    for (const auto& f : fibers_used) {
      auto s = spec;
      s.fixed.eve_fiber = f;
      series.push_back(run_sweep(s));
    }
    std::ostringstream csv;
    csv << "L_total,collective";
    for (const auto& f : fibers_used) csv << ',' << f.name;
    csv << '\n';
    for (std::size_t i = 0; i < series[0].points.size(); ++i) {
      csv << format_number(series[0].points[i].coordinates[0]);
      for (const auto& s : series) csv << ',' << format_number(detail::rate_or_nan(s.points[i]));
      csv << '\n';
    }
    out.push_back({std::string(name) + ".csv", csv.str()});
    out.push_back({std::string(name) + ".gp",
                   detail::line_script(std::string(name) + ".csv", "L_total (km)",
                                       {"collective", "g652", "lowloss", "hollowcore"},
                                       "key rate vs distance, eps = " + format_number(eps))});
  }
  return out;
}

inline std::vector<Artifact> figure_fig5(const Parameters& base) {
  std::vector<Artifact> out;
  auto p = base;
  p.eve_fiber = fibers::hollowcore();
  const std::pair<const char*, double> panels[] = {{"fig5a", 2.0}, {"fig5b", 10.0}, {"fig5b_g20", 20.0}};
  for (const auto& [name, gain] : panels) {
    auto q = p;
    q.gain = gain;
    const auto result = run_sweep(default_spec(Scenario::nla_stations, q));
    out.push_back({std::string(name) + ".csv", detail::csv(result)});
    out.push_back({std::string(name) + ".gp", detail::map_script(std::string(name) + ".csv", "L1 (km)", "L2 (km)", 1, 2,
                                                                 6, "station placement, G = " + format_number(gain))});
  }
  const auto map = run_sweep(default_spec(Scenario::nla_gain_map, p));
  out.push_back({"fig5c.csv", detail::csv(map)});
  out.push_back({"fig5c.gp", detail::map_script("fig5c.csv", "L2 (km)", "G", 1, 2, 6, "station II vs NLA gain")});
  return out;
}

inline std::vector<Artifact> figure_fig6(const Parameters& base) {
  std::vector<Artifact> out;
  const std::pair<const char*, FiberSpec> panels[] = {
      {"fig6a", fibers::lowloss()}, {"fig6b", fibers::g652()}, {"fig6c", fibers::deployed()}};
  for (const auto& [name, fiber] : panels) {
    auto p = base;
    p.eve_fiber = fiber;
    const auto map = run_sweep(default_spec(Scenario::nla_gain_map, p));
    out.push_back({std::string(name) + ".csv", detail::csv(map)});
    out.push_back({std::string(name) + ".gp", detail::map_script(std::string(name) + ".csv", "L2 (km)", "G", 1, 2, 6,
                                                                 "station II vs NLA gain, " + fiber.name)});
  }
  return out;
}

inline std::vector<Artifact> figure_fig7(const Parameters& base) {
  std::vector<Artifact> out;
  auto spec = default_spec(Scenario::fixed_variance, base);
  const auto map = run_sweep(spec);
  out.push_back({"fig7a.csv", detail::csv(map)});
  out.push_back({"fig7a.gp", detail::map_script("fig7a.csv", "L2 (km)", "G", 1, 2, 6,
                                                "fixed V_rho = " + format_number(*spec.fixed.v_rho))});

  const auto l2_values = Axis{"L2", 0.0, spec.fixed.l_total, 41}.values();
  const auto region = feasible_gain_region(spec.fixed, l2_values);
  const auto target = spec.fixed.target();
  const double individual = individual_attack_baseline(target, spec.fixed.rate, spec.fixed.limit).rate;
  const double collective = optimal_collective_baseline(target, spec.fixed.rate).rate;
  std::ostringstream b;
  b << "L2,G_min,G_max,rate_left,rate_right,rate_individual,rate_collective,flag\n";
  for (const auto& row : region) {
    b << format_number(row.l2) << ',' << format_number(row.g_min) << ',' << format_number(row.g_max) << ','
      << format_number(row.left ? row.left->rate : NAN) << ',' << format_number(row.right ? row.right->rate : NAN)
      << ',' << format_number(individual) << ',' << format_number(collective) << ',' << to_string(row.flag) << '\n';
  }
  out.push_back({"fig7_boundaries.csv", b.str()});

  // Rate against gain with station II at Bob.
  auto line = spec;
  line.fixed.l2 = spec.fixed.l_total;
  line.axes = {{"G", 1.0, 30.0, 51, true}};
  const auto vs_gain = run_sweep(line);
  std::ostringstream c;
  c << "G,rate,rate_individual,rate_collective\n";
  for (const auto& p : vs_gain.points) {
    c << format_number(p.coordinates[0]) << ',' << format_number(detail::rate_or_nan(p)) << ','
      << format_number(individual) << ',' << format_number(collective) << '\n';
  }
  out.push_back({"fig7b.csv", c.str()});
  out.push_back({"fig7b.gp", detail::line_script("fig7b.csv", "G", {"fixed V_rho", "individual", "collective"},
                                                "key rate vs NLA gain", true)});
  return out;
}

inline std::vector<Artifact> make_figure(const std::string& id, const Parameters& base) {
  if (id == "fig1b") return figure_fig1b(base);
  if (id == "fig3") return figure_fig3(base);
  if (id == "fig4") return figure_fig4(base);
  if (id == "fig5") return figure_fig5(base);
  if (id == "fig6") return figure_fig6(base);
  if (id == "fig7") return figure_fig7(base);
  throw DomainError("unknown figure '" + id + "'");
}

}  // namespace cvqkd
