#pragma once

// JSON, CSV and DOT exports of spectra, measures, bands, eigenfunctions and
// graphs. JSON doubles use the shortest representation that round-trips;
// CSV doubles use 17 significant digits. Neither depends on the locale.

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "json.hpp"
#include "spinal/action.hpp"
#include "spinal/bloch.hpp"
#include "spinal/closed_form.hpp"
#include "spinal/eigenfunctions.hpp"
#include "spinal/graph.hpp"
#include "spinal/measures.hpp"

namespace spinal {

using Json = nlohmann::json;

inline std::string format_double(double x) { return fmt::format("{:.17g}", x); }

// spectra

inline Json to_json(const LevelSpectrum& sp) {
  Json entries = Json::array();
  for (const auto& e : sp.entries)
    entries.push_back({{"eigenvalue", e.value}, {"multiplicity", e.multiplicity}, {"tag", e.tag.to_string()}});
  return {{"d", sp.d}, {"m", sp.m}, {"n", sp.n}, {"entries", entries}};
}

inline LevelSpectrum spectrum_from_json(const Json& j) {
  LevelSpectrum sp;
  sp.d = j.at("d").get<int>();
  sp.m = j.at("m").get<int>();
  sp.n = j.at("n").get<int>();
  for (const auto& e : j.at("entries"))
    sp.entries.push_back({e.at("eigenvalue").get<double>(), e.at("multiplicity").get<std::uint64_t>(),
                          EigenTag::parse(e.at("tag").get<std::string>())});
  return sp;
}

inline std::string spectrum_csv(const LevelSpectrum& sp) {
  std::string out = "eigenvalue,multiplicity,tag\n";
  for (const auto& e : sp.entries) out += fmt::format("{},{},{}\n", format_double(e.value), e.multiplicity, e.tag.to_string());
  return out;
}

// measures

/// Atoms, tail mass and `samples_per_band` interior density samples per support interval.
inline Json to_json(const SpectralMeasure& meas, int samples_per_band = 200) {
  Json atoms = Json::array();
  for (const auto& a : meas.atoms) atoms.push_back({{"location", a.location}, {"weight", a.weight}});
  Json support = Json::array(), samples = Json::array();
  for (const auto& iv : meas.support) {
    support.push_back({iv.lo, iv.hi});
    for (int j = 1; j <= samples_per_band; ++j) {
      const double x = iv.lo + iv.length() * j / (samples_per_band + 1.0);
      samples.push_back({x, meas.density(x)});
    }
  }
  return {{"atoms", atoms}, {"tail_mass", meas.tail_mass}, {"ac", {{"support", support}, {"samples", samples}}}};
}

inline std::string histogram_csv(const Histogram& h) {
  std::string out = "lo,hi,density\n";
  const double w = (h.hi - h.lo) / static_cast<double>(h.density.size());
  for (std::size_t i = 0; i < h.density.size(); ++i)
    out += fmt::format("{},{},{}\n", format_double(h.lo + w * static_cast<double>(i)),
                       format_double(h.lo + w * static_cast<double>(i + 1)), format_double(h.density[i]));
  return out;
}

// bands

inline Json to_json(const BandStructure& b) {
  Json out = Json::array();
  for (const auto& iv : b.bands) out.push_back({iv.lo, iv.hi});
  return out;
}

inline BandStructure bands_from_json(const Json& j) {
  BandStructure b;
  for (const auto& iv : j) b.bands.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
  return b;
}

inline std::string dispersion_csv(const Dispersion& disp) {
  std::string out = "k";
  const std::size_t l = disp.values.empty() ? 0 : disp.values.front().size();
  for (std::size_t j = 0; j < l; ++j) out += fmt::format(",x{}", j + 1);
  out += '\n';
  for (std::size_t i = 0; i < disp.k.size(); ++i) {
    out += format_double(disp.k[i]);
    for (double x : disp.values[i]) out += "," + format_double(x);
    out += '\n';
  }
  return out;
}

// eigenfunctions

/// One record per function: {lambda, birth_level, class, level, support: [[word, value], ...]}.
inline Json to_json(const LevelEigenbasis& basis) {
  Json out = Json::array();
  for (auto c : {EigenClass::A, EigenClass::B, EigenClass::C, EigenClass::D})
    for (const auto& f : basis.of(c)) {
      Json support = Json::array();
      for (const auto& [v, x] : f.entries)
        support.push_back({word_string(index_word(v, basis.params.d, basis.level)), x});
      out.push_back({{"lambda", basis.lambda},
                     {"birth_level", basis.birth_level},
                     {"class", class_name(c)},
                     {"level", basis.level},
                     {"support", support}});
    }
  return out;
}

/// Planted functions on a ball, vertices written as boundary points.
inline Json to_json(const LevelEigenbasis& basis, const std::vector<PlantedFunction>& planted, const BoundaryBall& ball) {
  Json out = Json::array();
  for (const auto& p : planted) {
    Json support = Json::array();
    for (const auto& [v, x] : p.f.entries) support.push_back({ball.vertex(v).to_string(), x});
    out.push_back({{"lambda", basis.lambda},
                   {"birth_level", basis.birth_level},
                   {"class", class_name(p.cls)},
                   {"center", ball.center().to_string()},
                   {"support", support}});
  }
  return out;
}

// graphs

inline std::string edge_list_csv(const SchreierLevelGraph& g) {
  std::string out = "src,dst,label\n";
  const int d = g.params().d, n = g.level();
  for (const auto& e : g.edges())
    out += fmt::format("{},{},{}\n", word_string(index_word(e.src, d, n)), word_string(index_word(e.dst, d, n)),
                       label(g.generators()[e.generator]));
  return out;
}

inline std::string edge_list_csv(const BoundaryBall& ball) {
  std::string out = "src,dst,label\n";
  for (const auto& e : ball.edges())
    out += fmt::format("{},{},{}\n", ball.vertex(e.src).to_string(), ball.vertex(e.dst).to_string(),
                       label(ball.generators()[e.generator]));
  return out;
}

inline std::string to_dot(const SchreierLevelGraph& g) {
  const int d = g.params().d, n = g.level();
  std::string out = "digraph schreier {\n";
  for (std::uint64_t v = 0; v < g.vertex_count(); ++v)
    out += fmt::format("  \"{}\";\n", word_string(index_word(v, d, n)));
  for (const auto& e : g.edges())
    out += fmt::format("  \"{}\" -> \"{}\" [label=\"{}\"];\n", word_string(index_word(e.src, d, n)),
                       word_string(index_word(e.dst, d, n)), label(g.generators()[e.generator]));
  return out + "}\n";
}

inline std::string to_dot(const BoundaryBall& ball) {
  std::string out = "digraph ball {\n";
  for (std::size_t v = 0; v < ball.vertex_count(); ++v)
    out += fmt::format("  \"{}\";\n", ball.vertex(v).to_string());
  for (const auto& e : ball.edges())
    out += fmt::format("  \"{}\" -> \"{}\" [label=\"{}\"];\n", ball.vertex(e.src).to_string(),
                       ball.vertex(e.dst).to_string(), label(ball.generators()[e.generator]));
  return out + "}\n";
}

// files

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace spinal
