#pragma once

// Command-line front end: spectrum, dos, bands, eigenfunctions, kesten,
// classify and graph subcommands writing JSON, CSV or DOT.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spinal/io.hpp"

namespace spinal::cli {

/// Exit codes: 0 ok, 1 internal failure, 2 invalid parameters, 3 budget exceeded.
inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_invalid = 2;
inline constexpr int exit_budget = 3;

struct RunConfig {
  std::string command;
  int d = 2;
  int m = 1;
  std::string omega;
  std::string genset;
  std::string xi;
  std::optional<int> level;
  std::optional<int> depth;
  int radius = 6;
  int kmax = 12;
  int birth = 1;
  std::optional<int> bins;
  int samples = 4097;
  std::uint64_t seed = 0;
  bool oracle = false;
  std::string format;
  std::string output;
  // presets
  bool grigorchuk = false;
  bool fabrykowski_gupta = false;
  std::optional<int> sunic_gm;
  bool erschler = false;
  bool overgroup = false;
};

/// Parameters after preset expansion; omega and T only when available.
struct Resolved {
  int d = 2;
  int m = 1;
  std::optional<SpinalParams> params;
  std::optional<GeneratingSubset> genset;
};

inline Resolved resolve(const RunConfig& c) {
  std::optional<SpinalParams> preset;
  std::string preset_genset;
  int presets_given = 0;
  auto take = [&](bool on, SpinalParams p, std::string t) {
    if (!on) return;
    ++presets_given;
    preset = std::move(p);
    preset_genset = std::move(t);
  };
  take(c.grigorchuk, presets::grigorchuk(), "S");
  take(c.fabrykowski_gupta, presets::fabrykowski_gupta(), "");
  if (c.sunic_gm) take(true, presets::sunic_gm(*c.sunic_gm), GeneratingSubset::units(2, *c.sunic_gm).to_string());
  take(c.erschler, presets::erschler(), GeneratingSubset::units(2, 2).to_string());
  take(c.overgroup, presets::overgroup(), GeneratingSubset::units(2, 3).to_string());
  if (presets_given > 1) throw std::invalid_argument("at most one preset may be given");
  if (preset && !c.omega.empty()) throw std::invalid_argument("a preset and --omega are mutually exclusive");

  Resolved r;
  if (preset) {
    r.d = preset->d;
    r.m = preset->m;
    r.params = preset;
  } else {
    r.d = c.d;
    r.m = c.m;
    if (r.d < 2 || r.d > 10) throw std::invalid_argument("d must be in 2..10");
    if (r.m < 1) throw std::invalid_argument("m must be >= 1");
    if (!c.omega.empty()) r.params = SpinalParams(r.d, r.m, OmegaSequence::parse(c.omega, r.d));
  }
  if (r.params) r.params->validate();
  const std::string t = !c.genset.empty() ? c.genset : !preset_genset.empty() ? preset_genset : "S";
  if (r.d == 2) r.genset = GeneratingSubset::parse(t, r.d, r.m);
  return r;
}

namespace detail {

inline const SpinalParams& need_params(const Resolved& r) {
  if (!r.params) throw std::invalid_argument("this command needs --omega or a preset");
  return *r.params;
}

inline void need_binary(const Resolved& r, const char* what) {
  if (r.d != 2) throw std::invalid_argument(std::string(what) + " is defined for d = 2 only");
}

inline std::string format_or(const RunConfig& c, const std::string& fallback,
                             std::initializer_list<const char*> allowed) {
  const std::string f = c.format.empty() ? fallback : c.format;
  if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return f == a; }))
    throw std::invalid_argument("format '" + f + "' not supported by " + c.command);
  return f;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace detail

inline std::string cmd_spectrum(const RunConfig& c, std::ostream& err) {
  const auto r = resolve(c);
  const int n = c.level.value_or(1);
  const auto sp = level_spectrum(r.d, r.m, n);
  const auto fmt = detail::format_or(c, "json", {"json", "csv"});
  Json j = to_json(sp);
  if (c.oracle) {
    const auto g = build_level_graph(detail::need_params(r), n);
    const auto ev = symmetric_eigenvalues(markov_dense(g));
    const auto cf = sp.expanded();
    double dev = 0;
    for (std::size_t i = 0; i < ev.size(); ++i) dev = std::max(dev, std::abs(ev[i] - cf[i]));
    j["oracle_eigenvalues"] = ev;
    j["max_deviation"] = dev;
    err << "max_deviation," << format_double(dev) << "\n";
  }
  return fmt == "json" ? detail::dump(j) : spectrum_csv(sp);
}

inline std::string cmd_dos(const RunConfig& c) {
  const auto r = resolve(c);
  const auto fmt = detail::format_or(c, "csv", {"json", "csv"});
  if (r.d == 2) {
    const auto meas = binary_dos(r.m);
    if (fmt == "json") return detail::dump(to_json(meas));
    const int n = c.level.value_or(14);
    const int bins = c.bins.value_or(200);
    const auto h = histogram(level_spectrum(2, r.m, n).expanded(), -1.0, 1.0, bins);
    std::string out = "lo,hi,density,g\n";
    const double w = 2.0 / bins;
    for (int i = 0; i < bins; ++i) {
      const double lo = -1.0 + w * i, hi = lo + w, mid = 0.5 * (lo + hi);
      const bool inside = std::any_of(meas.support.begin(), meas.support.end(),
                                      [&](const Interval& iv) { return mid > iv.lo && mid < iv.hi; });
      out += fmt::format("{},{},{},{}\n", format_double(lo), format_double(hi),
                         format_double(h.density[static_cast<std::size_t>(i)]),
                         format_double(inside ? meas.density(mid) : 0.0));
    }
    return out;
  }
  const auto meas = density_of_states(r.d, r.m, c.depth.value_or(10));
  if (fmt == "json") return detail::dump(to_json(meas));
  std::string out = "location,weight\n";
  for (const auto& a : meas.atoms) out += format_double(a.location) + "," + format_double(a.weight) + "\n";
  return out;
}

inline std::string cmd_bands(const RunConfig& c) {
  const auto r = resolve(c);
  detail::need_binary(r, "bands");
  const auto& p = detail::need_params(r);
  const auto fmt = detail::format_or(c, "json", {"json", "csv"});
  const auto walk = periodic_line_walk(*r.genset, p.omega);
  if (!walk) throw std::invalid_argument("q-numbers differ over the period: the spectrum is a Cantor set, not bands");
  if (fmt == "csv") return dispersion_csv(dispersion(*walk, c.samples));
  return detail::dump(to_json(bloch_bands(*walk, c.samples)));
}

inline std::string cmd_classify(const RunConfig& c) {
  const auto r = resolve(c);
  detail::need_binary(r, "classify");
  const auto& p = detail::need_params(r);
  const auto fmt = detail::format_or(c, "text", {"text", "json"});
  const auto type = classify_spectrum_type(*r.genset, p.omega);
  const auto q = q_numbers(*r.genset, p.omega);
  if (fmt == "json") {
    Json table = Json::object();
    for (const auto& [pi, n] : q) table[pi.coeffs().digits()] = n;
    return detail::dump({{"type", to_string(type)}, {"genset", r.genset->to_string()}, {"q", table}});
  }
  std::string out = to_string(type) + "\npi,q\n";
  for (const auto& [pi, n] : q) out += pi.coeffs().digits() + "," + std::to_string(n) + "\n";
  return out;
}

inline std::string cmd_eigenfunctions(const RunConfig& c) {
  const auto r = resolve(c);
  const auto& p = detail::need_params(r);
  detail::format_or(c, "json", {"json"});
  if (c.birth < 1) throw std::invalid_argument("--birth must be >= 1");
  const int n = c.level.value_or(c.birth);
  if (n < c.birth) throw std::invalid_argument("--level must be at least --birth");
  std::optional<BoundaryPoint> xi;
  if (!c.xi.empty()) xi = BoundaryPoint::parse(c.xi, r.d);
  std::optional<BoundaryBall> ball;
  if (xi) ball = build_copy_ball(p, *xi, n);
  Json out = Json::array();
  for (int N = 1; N <= c.birth; ++N)
    for (const auto& tag : birth_tags(r.d, r.m, N)) {
      const auto basis = propagate_to(base_eigenbasis(p, tag, c.seed), n);
      const auto recs = xi ? to_json(basis, extend_to_ball(basis, *xi, *ball), *ball) : to_json(basis);
      for (const auto& rec : recs) out.push_back(rec);
    }
  return detail::dump(out);
}

inline std::string cmd_kesten(const RunConfig& c) {
  const auto r = resolve(c);
  const auto& p = detail::need_params(r);
  const auto fmt = detail::format_or(c, "json", {"json", "csv"});
  if (c.xi.empty()) throw std::invalid_argument("kesten needs --xi");
  const auto xi = BoundaryPoint::parse(c.xi, r.d);
  const auto moments = kesten_moments_exact(build_boundary_ball(p, xi, c.radius), c.kmax);
  std::optional<SpectralMeasure> ref;
  std::string ref_name;
  if (r.d == 2) {
    const auto spine = BoundaryPoint::constant(2, 1);
    if (xi == spine) {
      ref = binary_kesten_spine(r.m);
      ref_name = "h";
    } else if (!xi.cofinal_with(spine)) {
      ref = binary_dos(r.m);
      ref_name = "g";
    }
  }
  std::vector<double> expected;
  if (ref)
    for (int k = 0; k <= c.kmax; ++k) expected.push_back(measure_moment(*ref, k));
  if (fmt == "csv") {
    std::string out = ref ? "k,moment," + ref_name + "\n" : "k,moment\n";
    for (std::size_t k = 0; k < moments.size(); ++k)
      out += std::to_string(k) + "," + format_double(moments[k]) + (ref ? "," + format_double(expected[k]) : "") + "\n";
    return out;
  }
  Json j{{"xi", xi.to_string()}, {"radius", c.radius}, {"moments", moments}};
  if (ref) j["reference"] = {{"density", ref_name}, {"moments", expected}};
  return detail::dump(j);
}

inline std::string cmd_graph(const RunConfig& c) {
  const auto r = resolve(c);
  const auto& p = detail::need_params(r);
  const auto fmt = detail::format_or(c, "csv", {"csv", "dot"});
  if (!c.xi.empty()) {
    const auto ball = build_boundary_ball(p, BoundaryPoint::parse(c.xi, r.d), c.radius);
    return fmt == "csv" ? edge_list_csv(ball) : to_dot(ball);
  }
  const auto g = build_level_graph(p, c.level.value_or(3));
  return fmt == "csv" ? edge_list_csv(g) : to_dot(g);
}

inline std::string dispatch(const RunConfig& c, std::ostream& err) {
  if (c.command == "spectrum") return cmd_spectrum(c, err);
  if (c.command == "dos") return cmd_dos(c);
  if (c.command == "bands") return cmd_bands(c);
  if (c.command == "classify") return cmd_classify(c);
  if (c.command == "eigenfunctions") return cmd_eigenfunctions(c);
  if (c.command == "kesten") return cmd_kesten(c);
  if (c.command == "graph") return cmd_graph(c);
  throw std::invalid_argument("unknown command '" + c.command + "'");
}

inline void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("--d", c.d, "tree arity");
  sub->add_option("--m", c.m, "rank of B");
  sub->add_option("--omega", c.omega, "omega as pre:<v;...>|per:<v;...>");
  sub->add_option("--genset", c.genset, "generating subset, e.g. a,b,c or S");
  sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
  sub->add_option("--format", c.format, "json, csv, dot or text");
  sub->add_option("-o,--output", c.output, "output file (default stdout)");
  sub->add_flag("--grigorchuk", c.grigorchuk, "first Grigorchuk group");
  sub->add_flag("--fabrykowski-gupta", c.fabrykowski_gupta, "Fabrykowski-Gupta group");
  sub->add_option("--sunic-gm", c.sunic_gm, "Sunic group G_m");
  sub->add_flag("--erschler", c.erschler, "Grigorchuk-Erschler group G_2");
  sub->add_flag("--overgroup", c.overgroup, "Grigorchuk overgroup G_3");
}

/// Parses argv, runs one command and returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Spectra of Schreier graphs of spinal groups"};
  app.require_subcommand(1);
  RunConfig c;
  struct Spec {
    const char* name;
    const char* help;
  };
  for (const auto& s : {Spec{"spectrum", "finite-level spectrum with multiplicities"},
                        Spec{"dos", "density of states"},
                        Spec{"bands", "Floquet-Bloch bands of a periodic line walk (d = 2)"},
                        Spec{"eigenfunctions", "finitely supported eigenfunctions (d >= 3)"},
                        Spec{"kesten", "return probabilities at a boundary point"},
                        Spec{"classify", "Cantor or intervals from q-numbers (d = 2)"},
                        Spec{"graph", "edge list or DOT of a level graph or a ball"}}) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, c);
    sub->callback([&c, name = std::string(s.name)] { c.command = name; });
  }
  auto* spectrum = app.get_subcommand("spectrum");
  spectrum->add_option("--level", c.level, "level n");
  spectrum->add_flag("--oracle", c.oracle, "also eigensolve the assembled graph");
  auto* dos = app.get_subcommand("dos");
  dos->add_option("--level", c.level, "level of the eigenvalue histogram (d = 2)");
  dos->add_option("--bins", c.bins, "histogram bins (d = 2)");
  dos->add_option("--depth", c.depth, "preimage depth of the atoms (d >= 3)");
  app.get_subcommand("bands")->add_option("--samples", c.samples, "k grid size")->capture_default_str();
  auto* ef = app.get_subcommand("eigenfunctions");
  ef->add_option("--birth", c.birth, "largest birth level")->capture_default_str();
  ef->add_option("--level", c.level, "propagation level");
  ef->add_option("--xi", c.xi, "plant on the copy ball of this boundary point");
  auto* kesten = app.get_subcommand("kesten");
  kesten->add_option("--xi", c.xi, "boundary point, e.g. |(1)")->required();
  kesten->add_option("--radius", c.radius, "ball radius")->capture_default_str();
  kesten->add_option("--kmax", c.kmax, "largest moment")->capture_default_str();
  auto* graph = app.get_subcommand("graph");
  graph->add_option("--level", c.level, "level n");
  graph->add_option("--xi", c.xi, "ball center instead of a level graph");
  graph->add_option("--radius", c.radius, "ball radius")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_invalid;
  }
  try {
    const auto text = dispatch(c, err);
    if (c.output.empty())
      out << text;
    else
      write_text(c.output, text);
    return exit_ok;
  } catch (const budget_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_budget;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return exit_invalid;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_invalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_failure;
  }
}

}  // namespace spinal::cli
