#pragma once

/// Parsing helpers for experiment settings: atom lists and the initial
/// condition grammar shared by the evolve, sheetlimit, and reconstruct
/// subcommands.
///
///   constant:VALUE
///   cosine:AMP[,L]                  amp * cos(L * m * theta)
///   indicator:A,B,VALUE             VALUE on [A, B) in the reduced domain
///   mollified_dirac:SHAPE,EPS,I:TH[,I:TH...]
///   from_csv:PATH                   one state value per data row, grid order

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "logspiral/dirac.hpp"
#include "logspiral/field.hpp"
#include "logspiral/params.hpp"
#include "logspiral/sheet_limit.hpp"

namespace logspiral {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline double parse_double(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !std::isfinite(v))
    throw std::invalid_argument(what + ": '" + text + "' is not a finite number");
  return v;
}

inline int parse_int(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0')
    throw std::invalid_argument(what + ": '" + text + "' is not an integer");
  return static_cast<int>(v);
}

/// "I:THETA,I:THETA,..." -> atoms.
inline std::vector<DiracAtom> parse_atoms(const std::string& text) {
  std::vector<DiracAtom> atoms;
  for (const auto& entry : split(text, ',')) {
    const auto parts = split(entry, ':');
    if (parts.size() != 2)
      throw std::invalid_argument("atoms: expected I:THETA, got '" + entry + "'");
    atoms.push_back({parse_double(parts[0], "atom intensity"),
                     parse_double(parts[1], "atom angle")});
  }
  return atoms;
}

inline MollifierShape parse_shape(const std::string& text) {
  if (text == "patch") return MollifierShape::patch;
  if (text == "smooth_bump") return MollifierShape::smooth_bump;
  throw std::invalid_argument("mollifier shape: '" + text + "' (expected patch or smooth_bump)");
}

inline AngularField parse_initial_condition(const std::string& spec, const SpiralParams& p,
                                            int n) {
  const size_t colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);

  if (kind == "constant") {
    const double c = parse_double(rest, "initial condition constant");
    return make_field(p, n, [&](double) { return c; });
  }
  if (kind == "cosine") {
    const auto parts = split(rest, ',');
    if (parts.empty() || parts.size() > 2)
      throw std::invalid_argument("initial condition: cosine takes AMP[,L]");
    const double amp = parse_double(parts[0], "cosine amplitude");
    const int l = parts.size() == 2 ? parse_int(parts[1], "cosine harmonic") : 1;
    if (l < 1) throw std::invalid_argument("cosine harmonic: must be at least 1");
    return make_field(p, n, [&](double th) { return amp * std::cos(l * p.m * th); });
  }
  if (kind == "indicator") {
    const auto parts = split(rest, ',');
    if (parts.size() != 3)
      throw std::invalid_argument("initial condition: indicator takes A,B,VALUE");
    const double a = parse_double(parts[0], "indicator start");
    const double b = parse_double(parts[1], "indicator end");
    const double v = parse_double(parts[2], "indicator value");
    if (!(a < b)) throw std::invalid_argument("indicator: start must precede end");
    return make_field(p, n, [&](double th) { return (th >= a && th < b) ? v : 0.0; });
  }
  if (kind == "mollified_dirac") {
    const auto parts = split(rest, ',');
    if (parts.size() < 3)
      throw std::invalid_argument("initial condition: mollified_dirac takes SHAPE,EPS,I:TH,...");
    MollifierSpec mspec;
    mspec.shape = parse_shape(parts[0]);
    mspec.epsilon = parse_double(parts[1], "mollifier width");
    std::string atom_text = parts[2];
    for (size_t i = 3; i < parts.size(); ++i) atom_text += "," + parts[i];
    const DiracConfig cfg{p, parse_atoms(atom_text)};
    return mollify(cfg, mspec, n);
  }
  if (kind == "from_csv") {
    std::ifstream f(rest);
    if (!f) throw std::invalid_argument("initial condition: cannot open '" + rest + "'");
    std::vector<double> values;
    std::string line;
    while (std::getline(f, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto cells = split(line, ',');
      char* end = nullptr;
      const double v = std::strtod(cells.back().c_str(), &end);
      if (end == cells.back().c_str()) continue;  // header row
      values.push_back(v);
    }
    if (static_cast<int>(values.size()) != n)
      throw std::invalid_argument("initial condition: '" + rest + "' holds " +
                                  std::to_string(values.size()) + " values, grid wants " +
                                  std::to_string(n));
    return make_field(p, std::move(values));
  }
  throw std::invalid_argument("initial condition kind '" + kind + "' not recognized");
}

}  // namespace logspiral
