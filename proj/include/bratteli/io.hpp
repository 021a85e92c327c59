#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bratteli/diagram.hpp"
#include "bratteli/group.hpp"
#include "bratteli/measure.hpp"
#include "bratteli/paths.hpp"

namespace bratteli {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Continuation parse_continuation(const std::string& s) {
  if (s == "truncated") return Continuation::truncated;
  if (s == "stationary") return Continuation::stationary;
  if (s == "polynomial-example") return Continuation::polynomial_example;
  throw ParseError("unknown continuation \"" + s + "\"");
}

/// Diagram file format:
/// { "root_edges": [int...], "matrices": [[[int...]...]...],
///   "continuation": "truncated"|"stationary"|"polynomial-example" }
inline BratteliDiagram parse_diagram_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("diagram JSON: ") + e.what());
  }
  if (!j.contains("root_edges") || !j["root_edges"].is_array())
    throw ParseError("diagram JSON: missing \"root_edges\" array");
  std::vector<long> root = j["root_edges"].get<std::vector<long>>();
  std::vector<IntMatrix> matrices;
  if (j.contains("matrices")) {
    if (!j["matrices"].is_array()) throw ParseError("diagram JSON: \"matrices\" must be an array");
    for (const auto& m : j["matrices"]) matrices.push_back(m.get<IntMatrix>());
  }
  Continuation cont = Continuation::truncated;
  if (j.contains("continuation")) cont = parse_continuation(j["continuation"].get<std::string>());
  try {
    return BratteliDiagram(std::move(root), std::move(matrices), cont);
  } catch (const DiagramError& e) {
    throw ParseError(std::string("diagram JSON: ") + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline BratteliDiagram load_diagram(const std::string& path_or_name) {
  if (path_or_name == "odometer2" || path_or_name == "2-odometer")
    return BratteliDiagram::odometer(2);
  if (path_or_name.rfind("odometer:", 0) == 0)
    return BratteliDiagram::odometer(std::stol(path_or_name.substr(9)));
  if (path_or_name == "allones2") return BratteliDiagram::all_ones2();
  if (path_or_name == "polynomial-example") return BratteliDiagram::polynomial_example();
  return parse_diagram_json(read_file(path_or_name));
}

/// Measure file: { "depth": M, "levels": [[num-or-"p/q"...]...],
///                 "mode": "rational"|"float" }
inline Measure<Rational> parse_measure_rational(const std::string& text,
                                                const BratteliDiagram& d) {
  nlohmann::json j = nlohmann::json::parse(text);
  Measure<Rational> mu;
  mu.diagram = &d;
  mu.depth = j.at("depth").get<int>();
  for (const auto& lvl : j.at("levels")) {
    std::vector<Rational> row;
    for (const auto& x : lvl) {
      if (x.is_string())
        row.push_back(parse_rational(x.get<std::string>()));
      else if (x.is_number_integer())
        row.push_back(Rational(x.get<long>()));
      else
        throw ParseError("rational measure entries must be integers or \"p/q\" strings");
    }
    mu.levels.push_back(std::move(row));
  }
  if (static_cast<int>(mu.levels.size()) != mu.depth)
    throw ParseError("measure file: depth does not match the number of level rows");
  if (mu.invariant_residual() != 0)
    throw ParseError("measure file violates compatibility/normalization");
  return mu;
}

inline Measure<double> parse_measure_float(const std::string& text,
                                           const BratteliDiagram& d,
                                           double tol = 1e-10) {
  nlohmann::json j = nlohmann::json::parse(text);
  Measure<double> mu;
  mu.diagram = &d;
  mu.depth = j.at("depth").get<int>();
  for (const auto& lvl : j.at("levels")) {
    std::vector<double> row;
    for (const auto& x : lvl)
      row.push_back(x.is_string() ? to_double(parse_rational(x.get<std::string>()))
                                  : x.get<double>());
    mu.levels.push_back(std::move(row));
  }
  if (static_cast<int>(mu.levels.size()) != mu.depth)
    throw ParseError("measure file: depth does not match the number of level rows");
  if (mu.invariant_residual() > tol)
    throw ParseError("measure file violates compatibility/normalization beyond tolerance");
  return mu;
}

/// Group-element text format: `level=n; v0:(0 1)(2 3); v1:id; ...`
/// Omitted vertices are identity; cycles are over canonical labels.
inline GroupElement parse_group_element(const std::string& text, PathTable& t) {
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r\n");
    auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  if (parts.empty() || parts[0].rfind("level=", 0) != 0)
    throw ParseError("group element must start with \"level=n\"");
  int n = 0;
  try {
    n = std::stoi(parts[0].substr(6));
  } catch (...) {
    throw ParseError("bad level in group element: " + parts[0]);
  }
  if (n < 1) throw ParseError("group element level must be >= 1");
  GroupElement g = GroupElement::identity(t, n);
  for (std::size_t k = 1; k < parts.size(); ++k) {
    auto colon = parts[k].find(':');
    if (colon == std::string::npos || parts[k][0] != 'v')
      throw ParseError("expected \"v<k>:cycles\", got: " + parts[k]);
    int v = 0;
    try {
      v = std::stoi(parts[k].substr(1, colon - 1));
    } catch (...) {
      throw ParseError("bad vertex in group element: " + parts[k]);
    }
    if (v < 0 || v >= t.diagram().vertex_count(n))
      throw ParseError("vertex v" + std::to_string(v) + " out of range at level " +
                       std::to_string(n));
    std::string cycles = trim(parts[k].substr(colon + 1));
    if (cycles == "id" || cycles.empty()) continue;
    const int h = static_cast<int>(t.paths(n, v).size());
    std::vector<bool> used(static_cast<std::size_t>(h), false);
    std::size_t pos = 0;
    while (pos < cycles.size()) {
      if (cycles[pos] != '(')
        throw ParseError("expected '(' in cycles for v" + std::to_string(v));
      auto close = cycles.find(')', pos);
      if (close == std::string::npos) throw ParseError("unbalanced cycle in group element");
      std::stringstream cs(cycles.substr(pos + 1, close - pos - 1));
      std::vector<int> cyc;
      int x;
      while (cs >> x) {
        if (x < 0 || x >= h)
          throw ParseError("label " + std::to_string(x) + " out of range 0.." +
                           std::to_string(h - 1) + " at v" + std::to_string(v));
        if (used[static_cast<std::size_t>(x)])
          throw ParseError("label " + std::to_string(x) + " appears in two cycles at v" +
                           std::to_string(v));
        used[static_cast<std::size_t>(x)] = true;
        cyc.push_back(x);
      }
      if (cyc.size() < 2) throw ParseError("cycles must have at least 2 labels");
      for (std::size_t i = 0; i < cyc.size(); ++i)
        g.perms[static_cast<std::size_t>(v)][static_cast<std::size_t>(cyc[i])] =
            cyc[(i + 1) % cyc.size()];
      pos = close + 1;
      while (pos < cycles.size() && std::isspace(static_cast<unsigned char>(cycles[pos]))) ++pos;
    }
  }
  return g;
}

inline std::string format_group_element(const GroupElement& g) {
  std::ostringstream out;
  out << "level=" << g.level;
  for (std::size_t v = 0; v < g.perms.size(); ++v) {
    out << "; v" << v << ":";
    const auto& p = g.perms[v];
    std::vector<bool> seen(p.size(), false);
    bool any = false;
    for (std::size_t start = 0; start < p.size(); ++start) {
      if (seen[start] || p[start] == static_cast<int>(start)) continue;
      out << "(";
      std::size_t x = start;
      bool first = true;
      while (!seen[x]) {
        seen[x] = true;
        out << (first ? "" : " ") << x;
        first = false;
        x = static_cast<std::size_t>(p[x]);
      }
      out << ")";
      any = true;
    }
    if (!any) out << "id";
  }
  return out.str();
}

/// Clopen set file/inline format: {"level": n, "labels": [[v,l],...]} or the
/// shorthands "empty@n" / "all@n".
inline ClopenSet parse_clopen_set(const std::string& text, PathTable& t) {
  if (text.rfind("empty@", 0) == 0) return ClopenSet::empty(std::stoi(text.substr(6)));
  if (text.rfind("all@", 0) == 0)
    return ClopenSet::whole_space(t, std::stoi(text.substr(4)));
  nlohmann::json j = nlohmann::json::parse(text);
  ClopenSet a;
  a.level = j.at("level").get<int>();
  for (const auto& pair : j.at("labels")) {
    int v = pair.at(0).get<int>(), l = pair.at(1).get<int>();
    if (v < 0 || v >= t.diagram().vertex_count(a.level))
      throw ParseError("clopen set vertex out of range");
    if (l < 0 || l >= static_cast<int>(t.paths(a.level, v).size()))
      throw ParseError("clopen set label out of range");
    a.labels.insert({v, l});
  }
  return a;
}

}  // namespace bratteli
