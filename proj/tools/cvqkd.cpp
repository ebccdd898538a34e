// Command-line front end.
//
// Exit codes: 0 success, 1 internal error, 2 usage or parameter error,
// 3 infeasible attack, 4 no gain threshold on the interval.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cvqkd/cvqkd.hpp"

namespace {

using namespace cvqkd;

constexpr int kUsage = 2;
constexpr int kInfeasible = 3;
constexpr int kNoThreshold = 4;

struct Flags {
  std::string config;
  std::map<std::string, std::string> values;
};

void add_common_flags(CLI::App& app, Flags& flags) {
  app.add_option("--config", flags.config, "key=value configuration file")->check(CLI::ExistingFile);
  const std::map<std::string, std::string> help{
      {"scenario", "sweep scenario"},
      {"attack", "collective | individual | teleport"},
      {"epsilon", "channel excess noise (SNU, input referred)"},
      {"va", "modulation variance V_A"},
      {"beta", "reconciliation efficiency"},
      {"alpha-system", "attenuation of the legitimate link (dB/km)"},
      {"eve-fiber", "deployed | g652 | lowloss | hollowcore | lossless | <dB/km>"},
      {"l-total", "link length (km)"},
      {"l1", "Alice to station I (km)"},
      {"l2", "Alice to station II (km)"},
      {"gain", "NLA gain G"},
      {"v-rho", "prepared EPR variance, or 'limit'"},
      {"detection", "hom | het"},
      {"direction", "rr | dr"},
      {"out", "output path"},
      {"tol", "bisection tolerance"},
      {"g-min", "lower end of the gain interval"},
      {"g-max", "upper end of the gain interval"},
      {"limit-ladder", "comma-separated rungs x (g = V_rho = x) of the strong-source limit"},
      {"limit-tol", "convergence tolerance of the limit ladder (bits)"},
  };
  for (const auto& key : config_keys()) {
    app.add_option("--" + key, flags.values[key], help.at(key));
  }
}

RunConfig resolve(const CLI::App& app, const Flags& flags, RunConfig cfg) {
  if (!flags.config.empty()) {
    std::ifstream in(flags.config);
    cfg = parse_config(in, std::move(cfg));
  }
  for (const auto& [key, value] : flags.values) {
    if (app.count("--" + key) > 0) apply_setting(cfg, key, value);
  }
  return cfg;
}

std::string fmt(double v) { return format_number(v); }

void print_report(const KeyRateReport& r, const Parameters& p) {
  std::cout << "attack=" << to_string(p.attack) << '\n'
            << "I_ab=" << fmt(r.mutual_information) << '\n'
            << "holevo=" << fmt(r.holevo) << '\n'
            << "rate_raw=" << fmt(r.rate_raw) << '\n'
            << "rate=" << fmt(r.rate) << '\n'
            << "beta=" << fmt(r.beta) << '\n'
            << "detection=" << to_string(r.detection) << '\n'
            << "direction=" << to_string(r.direction) << '\n';
  if (r.solved_config) {
    const auto& c = *r.solved_config;
    std::cout << "g=" << fmt(c.g) << '\n'
              << "t=" << fmt(c.t) << '\n'
              << "eta=" << fmt(c.eta) << '\n'
              << "V_phi=" << fmt(c.v_phi) << '\n'
              << "V_rho=" << fmt(prepared_variance(c)) << '\n'
              << "G=" << fmt(c.nla_gain) << '\n'
              << "T1=" << fmt(c.geometry.t1()) << '\n'
              << "T2=" << fmt(c.geometry.t2()) << '\n'
              << "T3=" << fmt(c.geometry.t3()) << '\n';
  }
  if (r.gamma_g) std::cout << "gamma_G=" << fmt(*r.gamma_g) << '\n';
  if (r.t4_g) std::cout << "T4_G=" << fmt(*r.t4_g) << '\n';
  if (r.converged) std::cout << "converged=" << (*r.converged ? "true" : "false") << '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Key rates of continuous-variable QKD under a two-station teleportation attack"};
  app.require_subcommand(1);

  Flags keyrate_flags, figure_flags, sweep_flags, threshold_flags, cutoff_flags;
  auto* keyrate = app.add_subcommand("keyrate", "key rate of a single scenario");
  add_common_flags(*keyrate, keyrate_flags);

  auto* figure = app.add_subcommand("figure", "write the CSV tables and gnuplot scripts of a figure");
  std::string figure_id;
  figure->add_option("id", figure_id, "fig1b | fig3 | fig4 | fig5 | fig6 | fig7")
      ->required()
      ->check(CLI::IsMember(figure_ids()));
  add_common_flags(*figure, figure_flags);

  auto* sweep = app.add_subcommand("sweep", "evaluate a scenario grid and write CSV");
  add_common_flags(*sweep, sweep_flags);

  auto* threshold = app.add_subcommand("threshold", "NLA gain where the worst station-II position flips");
  add_common_flags(*threshold, threshold_flags);

  auto* cutoff = app.add_subcommand("cutoff", "distance where the key rate reaches zero");
  add_common_flags(*cutoff, cutoff_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    std::cerr << app.help();
    return kUsage;
  }

  try {
    if (keyrate->parsed()) {
      RunConfig base;
      base.params.attack = AttackClass::collective;
      const auto cfg = resolve(*keyrate, keyrate_flags, base);
      print_report(evaluate(cfg.params), cfg.params);
    } else if (figure->parsed()) {
      const auto cfg = resolve(*figure, figure_flags, {});
      const std::filesystem::path dir = cfg.out.empty() ? "." : cfg.out;
      for (const auto& a : make_figure(figure_id, cfg.params)) {
        write_text(dir / a.name, a.content);
        std::cout << (dir / a.name).string() << '\n';
      }
    } else if (sweep->parsed()) {
      const auto cfg = resolve(*sweep, sweep_flags, {});
      if (!cfg.scenario) throw ConfigError("sweep needs --scenario or a 'scenario' key");
      auto spec = default_spec(*cfg.scenario, cfg.params);
      if (!cfg.axes.empty()) {
        spec.axes = cfg.axes;
        spec.fixed = cfg.params;
      }
      const auto result = run_sweep(spec);
      std::ostringstream csv;
      write_csv(csv, result);
      if (cfg.out.empty()) std::cout << csv.str();
      else write_text(cfg.out, csv.str());
    } else if (threshold->parsed()) {
      const auto cfg = resolve(*threshold, threshold_flags, {});
      const auto r = find_threshold_gain(cfg.params, cfg.g_min, cfg.g_max, cfg.tol);
      std::cout << "G_th=" << fmt(r.gain) << '\n'
                << "bracket_lo=" << fmt(r.bracket_lo) << '\n'
                << "bracket_hi=" << fmt(r.bracket_hi) << '\n'
                << "rate_L2_0=" << fmt(r.rate_colocated) << '\n'
                << "rate_L2_total=" << fmt(r.rate_receiver) << '\n';
    } else if (cutoff->parsed()) {
      RunConfig base;
      base.params.attack = AttackClass::collective;
      const auto cfg = resolve(*cutoff, cutoff_flags, base);
      const auto km = cutoff_distance(cfg.params, cfg.tol);
      std::cout << "attack=" << to_string(cfg.params.attack) << '\n'
                << "cutoff_km=" << (km ? fmt(*km) : std::string(">500")) << '\n';
    }
  } catch (const NoThresholdError& e) {
    std::cerr << e.name() << ": " << e.what() << '\n';
    return kNoThreshold;
  } catch (const InfeasibleError& e) {
    std::cerr << e.name() << ": " << e.what() << '\n';
    return kInfeasible;
  } catch (const GainTooLargeError& e) {
    std::cerr << e.name() << ": " << e.what() << '\n';
    return kInfeasible;
  } catch (const Error& e) {
    std::cerr << e.name() << ": " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
