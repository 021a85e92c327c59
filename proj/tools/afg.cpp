// afg — explore AF full groups of Bratteli diagrams: path counts, invariant
// measures, characters, ergodic averages, stabilizer sampling, and the
// built-in verification suite. All stochastic commands are pure functions of
// (inputs, seed, workers).

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bratteli/character.hpp"
#include "bratteli/diagram.hpp"
#include "bratteli/group.hpp"
#include "bratteli/hermite.hpp"
#include "bratteli/io.hpp"
#include "bratteli/irs.hpp"
#include "bratteli/measure.hpp"
#include "bratteli/paths.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";

using namespace bratteli;

struct VerificationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt_double(double x) {
  std::ostringstream out;
  out << std::setprecision(17) << x;
  return out.str();
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ParseError("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void trailer(std::uint64_t seed, int workers) {
    stream() << "# seed=" << seed << ", workers=" << workers
             << ", tool-version=" << kToolVersion << "\n";
  }

 private:
  std::ofstream file_;
};

std::vector<int> parse_alpha(const std::string& s) {
  std::vector<int> alpha;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = std::stoi(item);
    if (v < 0) throw ParseError("alpha exponents must be >= 0");
    alpha.push_back(v);
  }
  if (alpha.empty()) throw ParseError("alpha must be nonempty");
  return alpha;
}

std::pair<int, int> parse_range(const std::string& s) {
  auto dots = s.find("..");
  if (dots == std::string::npos) {
    int v = std::stoi(s);
    return {v, v};
  }
  return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
}

std::string read_element_arg(const std::string& arg) {
  if (arg.rfind("level=", 0) == 0) return arg;  // inline
  return read_file(arg);
}

std::string read_set_arg(const std::string& arg) {
  if (arg.rfind("empty@", 0) == 0 || arg.rfind("all@", 0) == 0 ||
      arg.find('{') != std::string::npos)
    return arg;
  return read_file(arg);
}

// Measures needed for a multi-index: exact stationary when the diagram allows
// and k = 1; otherwise the estimated ergodic set in float mode.
struct ResolvedMeasures {
  std::vector<Measure<Rational>> rational;
  std::vector<Measure<double>> floating;
  bool exact = false;
};

ResolvedMeasures resolve_measures(const BratteliDiagram& d, int depth,
                                  std::size_t k_needed, const std::string& mode,
                                  const std::string& measure_file) {
  ResolvedMeasures out;
  if (!measure_file.empty()) {
    if (k_needed > 1) throw ParseError("measure files carry a single measure");
    if (mode == "rational") {
      out.rational = {parse_measure_rational(read_file(measure_file), d)};
      out.exact = true;
    } else {
      out.floating = {parse_measure_float(read_file(measure_file), d)};
    }
    return out;
  }
  if (k_needed <= 1 && mode == "rational") {
    auto mu = exact_stationary_measure(d, depth);
    if (mu) {
      out.rational = {*mu};
      out.exact = true;
      return out;
    }
    throw ParseError(
        "no exact rational measure available for this diagram; use --mode float");
  }
  if (k_needed <= 1 && d.continuation() == Continuation::stationary) {
    out.floating = {stationary_measure(d, depth)};
    return out;
  }
  auto res = approximate_ergodic_set(d, std::max(depth + 2, 10), 1e-6, depth);
  if (res.measures.size() < k_needed)
    throw ParseError("alpha needs " + std::to_string(k_needed) +
                     " ergodic measures, found " + std::to_string(res.measures.size()));
  out.floating = res.measures;
  return out;
}

// --- commands ---

int cmd_info(const std::string& diagram_arg, const std::string& levels_arg,
             int window_max, const std::string& out_path) {
  BratteliDiagram d = load_diagram(diagram_arg);
  auto [lo, hi] = parse_range(levels_arg);
  Output out(out_path);
  out.stream() << "level,vertex,path_count\n";
  for (int n = lo; n <= hi && d.has_level(n); ++n) {
    auto h = d.path_counts(n);
    for (std::size_t v = 0; v < h.size(); ++v)
      out.stream() << n << "," << v << "," << h[v].str() << "\n";
  }
  auto simple = d.has_level(2) ? d.first_simple_window(1, window_max) : std::nullopt;
  auto even = d.has_level(2) ? d.first_even_window(1, window_max) : std::nullopt;
  out.stream() << "# simple window from level 1: "
               << (simple ? "yes at m=" + std::to_string(*simple) : "unknown") << "\n";
  out.stream() << "# even window from level 1: "
               << (even ? "yes at m=" + std::to_string(*even) : "unknown") << "\n";
  return 0;
}

int cmd_measures(const std::string& diagram_arg, int depth, double epsilon,
                 const std::string& mode, const std::string& out_path) {
  BratteliDiagram d = load_diagram(diagram_arg);
  Output out(out_path);
  out.stream() << "measure,level,vertex,q,h_q\n";
  auto emit = [&](int label, int n, int v, const std::string& q, const std::string& hq) {
    out.stream() << label << "," << n << "," << v << "," << q << "," << hq << "\n";
  };
  if (mode == "rational") {
    auto mu = exact_stationary_measure(d, depth);
    if (!mu) throw ParseError("no exact rational measure; use --mode float");
    for (int n = 1; n <= depth; ++n) {
      auto h = d.path_counts(n);
      for (int v = 0; v < d.vertex_count(n); ++v)
        emit(0, n, v, rational_to_string(mu->q(n, v)),
             rational_to_string(Rational(h[static_cast<std::size_t>(v)]) * mu->q(n, v)));
    }
    return 0;
  }
  auto res = approximate_ergodic_set(d, std::max(depth + 2, 10), epsilon, depth);
  for (const auto& mu : res.measures)
    for (int n = 1; n <= mu.depth; ++n) {
      auto h = d.path_counts(n);
      for (int v = 0; v < d.vertex_count(n); ++v)
        emit(mu.label, n, v, fmt_double(mu.q(n, v)),
             fmt_double(h[static_cast<std::size_t>(v)].convert_to<double>() * mu.q(n, v)));
    }
  out.stream() << "# clusters=" << res.diagnostics.cluster_count
               << ", max_intra_spread=" << fmt_double(res.diagnostics.max_intra_spread)
               << ", inter_depth_spread=" << fmt_double(res.diagnostics.inter_depth_spread)
               << ", converged=" << (res.diagnostics.converged ? "yes" : "no") << "\n";
  return 0;
}

int cmd_char(const std::string& diagram_arg, const std::string& alpha_arg,
             const std::string& element_arg, const std::string& mode, int depth,
             const std::string& measure_file, const std::string& out_path) {
  BratteliDiagram d = load_diagram(diagram_arg);
  PathTable t(d);
  std::vector<int> alpha = parse_alpha(alpha_arg);
  GroupElement g = parse_group_element(read_element_arg(element_arg), t);
  int need_depth = std::max(depth, g.level);
  auto ms = resolve_measures(d, need_depth, alpha.size(), mode, measure_file);
  Output out(out_path);
  out.stream() << "quantity,value\n";
  if (ms.exact)
    out.stream() << "chi_alpha,"
                 << rational_to_string(
                        evaluate(CharacterSpec::chi_alpha(alpha), g, ms.rational))
                 << "\n";
  else
    out.stream() << "chi_alpha,"
                 << fmt_double(evaluate(CharacterSpec::chi_alpha(alpha), g, ms.floating))
                 << "\n";
  return 0;
}

int cmd_avg(const std::string& diagram_arg, const std::string& alpha_arg,
            const std::string& set_arg, const std::string& levels_arg,
            const std::string& mode, std::int64_t samples, std::uint64_t seed,
            int workers, const std::string& measure_file, const std::string& out_path) {
  BratteliDiagram d = load_diagram(diagram_arg);
  PathTable t(d);
  std::vector<int> alpha = parse_alpha(alpha_arg);
  ClopenSet a = parse_clopen_set(read_set_arg(set_arg), t);
  auto [lo, hi] = parse_range(levels_arg);
  std::vector<int> levels;
  for (int n = std::max(lo, a.level); n <= hi; ++n) levels.push_back(n);
  auto ms = resolve_measures(d, hi + 1, alpha.size(), mode, measure_file);
  Output out(out_path);
  out.stream() << "level,subgroup_order,exact_or_mc,value,std_err\n";
  auto emit = [&](const auto& rows) {
    for (const auto& r : rows) {
      out.stream() << r.level << "," << r.subgroup_order.str() << ","
                   << (r.exact ? "exact" : "mc") << ",";
      if constexpr (std::is_same_v<std::decay_t<decltype(r.value)>, Rational>)
        out.stream() << rational_to_string(r.value);
      else
        out.stream() << fmt_double(r.value);
      out.stream() << "," << fmt_double(r.std_err) << "\n";
    }
  };
  if (ms.exact)
    emit(average_profile(t, a, alpha, ms.rational, levels, samples, seed, workers));
  else
    emit(average_profile(t, a, alpha, ms.floating, levels, samples, seed, workers));
  out.trailer(seed, workers);
  return 0;
}

int cmd_sample_irs(const std::string& diagram_arg, const std::string& alpha_arg,
                   const std::string& element_arg, const std::string& set_arg,
                   std::int64_t samples, int depth, std::uint64_t seed, int workers,
                   const std::string& mode, const std::string& measure_file,
                   const std::string& out_path) {
  BratteliDiagram d = load_diagram(diagram_arg);
  PathTable t(d);
  std::vector<int> alpha = parse_alpha(alpha_arg);
  GroupElement g = parse_group_element(read_element_arg(element_arg), t);
  int m = depth > 0 ? depth : g.level + 4;
  if (m < g.level) throw ParseError("--depth must be at least the element level");
  auto ms = resolve_measures(d, m, alpha.size(), mode, measure_file);
  Output out(out_path);
  out.stream() << "quantity,estimate,std_err,exact_reference,collision_rate\n";
  auto run = [&](const auto& measures) {
    auto chi = estimate_chi(t, alpha, measures, g, samples, m, seed, workers);
    auto chi_p = estimate_chi_prime(t, alpha, measures, g, samples, m, seed, workers);
    double exact_ref = to_double(evaluate(CharacterSpec::chi_alpha(alpha), g, measures));
    out.stream() << "chi," << fmt_double(chi.estimate) << "," << fmt_double(chi.std_err)
                 << "," << fmt_double(exact_ref) << ","
                 << fmt_double(chi.collision_rate) << "\n";
    out.stream() << "chi_prime," << fmt_double(chi_p.estimate) << ","
                 << fmt_double(chi_p.std_err) << "," << fmt_double(exact_ref) << ","
                 << fmt_double(chi_p.collision_rate) << "\n";
    if (!set_arg.empty()) {
      ClopenSet a = parse_clopen_set(read_set_arg(set_arg), t);
      auto fm = empirical_f_measure(t, alpha, measures, a, samples, m, seed, workers);
      double ref = to_double(product_clopen_measure(measures, alpha, a));
      out.stream() << "f_measure," << fmt_double(fm.estimate) << ","
                   << fmt_double(fm.std_err) << "," << fmt_double(ref) << ","
                   << fmt_double(fm.collision_rate) << "\n";
    }
  };
  if (ms.exact)
    run(ms.rational);
  else
    run(ms.floating);
  out.trailer(seed, workers);
  return 0;
}

// --- verify suite ---

struct Verifier {
  std::ostream& out;
  bool all_passed = true;

  void report(const std::string& check, const std::string& what, bool ok,
              const std::string& detail = "") {
    out << check << "," << what << "," << (ok ? "pass" : "FAIL")
        << (detail.empty() ? "" : "," + detail) << "\n";
    all_passed &= ok;
  }
};

void verify_hermite(Verifier& v) {
  HermiteReport r = verify_hermite_identity(20);
  v.report("hermite", "closed form vs recurrence (n=2..20)", r.passed, r.detail);
}

void verify_monotone(Verifier& v) {
  BratteliDiagram d = BratteliDiagram::odometer(2);
  PathTable t(d);
  std::vector<Measure<Rational>> ms{*exact_stationary_measure(d, 8)};
  auto rows = average_profile(t, ClopenSet::empty(1), {1}, ms, {1, 2, 3, 4, 5, 6});
  bool ok = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ok &= rows[i].exact && rows[i].value == Rational(1, BigInt(1) << (i + 1));
    if (i > 0) ok &= rows[i].value < rows[i - 1].value;
  }
  v.report("monotone", "A=empty alpha=(1): terms 2^{-n} strictly decreasing", ok);

  ClopenSet a{1, {{0, 0}}};
  auto rows2 = average_profile(t, a, {1}, ms, {1, 2, 3, 4, 5, 6});
  bool ok2 = true;
  for (std::size_t i = 0; i < rows2.size(); ++i) {
    ok2 &= rows2[i].value >= Rational(1, 2);
    if (i > 0) ok2 &= rows2[i].value <= rows2[i - 1].value;
  }
  ok2 &= rows2.back().value - Rational(1, 2) <= Rational(1, 32);
  v.report("monotone", "A=level-1 cylinder: non-increasing toward mu(A)=1/2", ok2);
}

void verify_iep_suite(Verifier& v) {
  BratteliDiagram d = BratteliDiagram::odometer(2);
  PathTable t(d);
  std::vector<Measure<Rational>> ms{*exact_stationary_measure(d, 4)};
  for (int p : {1, 2})
    for (std::vector<int> alpha : {std::vector<int>{1}, std::vector<int>{2}}) {
      auto res = verify_iep(t, ms, alpha, 2, p);
      std::ostringstream what;
      what << "n=2 p=" << p << " |alpha|=" << alpha[0];
      v.report("iep", what.str(), res.residual == 0,
               "residual=" + rational_to_string(res.residual));
    }
}

void verify_psd(Verifier& v, std::uint64_t seed) {
  BratteliDiagram d = BratteliDiagram::odometer(2);
  PathTable t(d);
  std::vector<Measure<Rational>> ms{*exact_stationary_measure(d, 6)};
  Rng rng(seed);
  YoungSubgroup full = pointwise_stabilizer(t, ClopenSet::empty(2), 2);
  std::vector<GroupElement> els;
  for (int i = 0; i < 10; ++i) els.push_back(random_element(t, full, rng));
  for (const auto& [name, spec] :
       {std::pair<std::string, CharacterSpec>{"chi_(1)", CharacterSpec::chi_alpha({1})},
        {"chi_(2)", CharacterSpec::chi_alpha({2})},
        {"chi_reg", CharacterSpec::chi_reg()}}) {
    double lmin = check_psd(t, spec, els, ms);
    v.report("psd", name + " Gram of 10 random elements", lmin >= -1e-9,
             "lambda_min=" + fmt_double(lmin));
  }
}

void verify_generation(Verifier& v) {
  BratteliDiagram d = BratteliDiagram::odometer(2);
  PathTable t(d);
  ClopenSet c{2, {{0, 0}, {0, 1}}};
  ClopenSet dd{2, {{0, 1}, {0, 2}}};
  auto gens = young_generators(t, local_subgroup(t, c, 2));
  auto gd = young_generators(t, local_subgroup(t, dd, 2));
  gens.insert(gens.end(), gd.begin(), gd.end());
  BigInt got = generated_subgroup_order(t, gens, 2);
  BigInt expect = local_subgroup(t, clopen_union(t, c, dd), 2).order();
  v.report("generation", "<L(C),L(D)> = L(C u D) on 2-odometer n=2", got == expect,
           "order=" + got.str());
}

void verify_chi(Verifier& v, std::uint64_t seed, std::int64_t samples) {
  BratteliDiagram d = BratteliDiagram::odometer(2);
  PathTable t(d);
  std::vector<Measure<Rational>> ms{*exact_stationary_measure(d, 8)};
  GroupElement g = transposition(t, 2, 0, 0, 1);
  for (int a : {1, 2, 3}) {
    auto est = estimate_chi(t, {a}, ms, g, samples, 4, seed + static_cast<std::uint64_t>(a));
    double exact = to_double(evaluate(CharacterSpec::chi_alpha({a}), g, ms));
    bool ok = std::abs(est.estimate - exact) <= 3 * est.std_err + 1e-12;
    v.report("chi", "2-odometer alpha=(" + std::to_string(a) + ") transposition",
             ok, "est=" + fmt_double(est.estimate) + " exact=" + fmt_double(exact));
  }
}

int cmd_verify(const std::string& which, std::uint64_t seed, std::int64_t samples,
               const std::string& out_path) {
  Output out(out_path);
  out.stream() << "check,case,status,detail\n";
  Verifier v{out.stream()};
  if (which == "hermite" || which == "all") verify_hermite(v);
  if (which == "monotone" || which == "all") verify_monotone(v);
  if (which == "iep" || which == "all") verify_iep_suite(v);
  if (which == "psd" || which == "all") verify_psd(v, seed);
  if (which == "generation" || which == "all") verify_generation(v);
  if (which == "chi" || which == "all") verify_chi(v, seed, samples);
  out.stream() << "# seed=" << seed << ", workers=1, tool-version=" << kToolVersion
               << "\n";
  return v.all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AF full groups of Bratteli diagrams: measures, characters, IRS sampling"};
  app.require_subcommand(1);

  std::string diagram, levels = "1..5", alpha = "1", element, set_arg, mode = "rational";
  std::string out_path, measure_file, which = "all";
  int depth = 8, workers = 1, window_max = 26;
  double epsilon = 1e-6;
  std::int64_t samples = 100000;
  std::uint64_t seed = 0;

  auto* info = app.add_subcommand("info", "path counts and window searches");
  info->add_option("--diagram", diagram, "diagram file or builtin name")->required();
  info->add_option("--levels", levels, "level range a..b");
  info->add_option("--window-max", window_max, "bound for simple/even window search");
  info->add_option("--out", out_path);

  auto* meas = app.add_subcommand("measures", "invariant measures as CSV");
  meas->add_option("--diagram", diagram)->required();
  meas->add_option("--depth", depth);
  meas->add_option("--epsilon", epsilon, "ergodic clustering tolerance");
  meas->add_option("--mode", mode)->check(CLI::IsMember({"rational", "float"}));
  meas->add_option("--out", out_path);

  auto* ch = app.add_subcommand("char", "evaluate chi_alpha at an element");
  ch->add_option("--diagram", diagram)->required();
  ch->add_option("--alpha", alpha, "exponents k1,k2,...");
  ch->add_option("--element", element, "file or inline 'level=n; v0:(0 1)'")->required();
  ch->add_option("--mode", mode)->check(CLI::IsMember({"rational", "float"}));
  ch->add_option("--depth", depth);
  ch->add_option("--measure", measure_file, "measure file");
  ch->add_option("--out", out_path);

  auto* avg = app.add_subcommand("avg", "ergodic average profile over G_n(A)");
  avg->add_option("--diagram", diagram)->required();
  avg->add_option("--alpha", alpha);
  avg->add_option("--set", set_arg, "clopen set: empty@n, all@n, file, or JSON")->required();
  avg->add_option("--levels", levels);
  avg->add_option("--mode", mode)->check(CLI::IsMember({"rational", "float"}));
  avg->add_option("--samples", samples);
  avg->add_option("--seed", seed)->required();
  avg->add_option("--workers", workers);
  avg->add_option("--measure", measure_file);
  avg->add_option("--out", out_path);

  auto* irs = app.add_subcommand("sample-irs", "estimate chi and chi' by IRS sampling");
  irs->add_option("--diagram", diagram)->required();
  irs->add_option("--alpha", alpha);
  irs->add_option("--element", element)->required();
  irs->add_option("--set", set_arg, "also estimate phi_alpha(F(A)) for this set");
  irs->add_option("--samples", samples);
  irs->add_option("--depth", depth, "trace depth (default: element level + 4)")
      ->default_val(0);
  irs->add_option("--seed", seed)->required();
  irs->add_option("--workers", workers);
  irs->add_option("--mode", mode)->check(CLI::IsMember({"rational", "float"}));
  irs->add_option("--measure", measure_file);
  irs->add_option("--out", out_path);

  auto* ver = app.add_subcommand("verify", "run the built-in identity checks");
  ver->add_option("which", which)
      ->check(CLI::IsMember({"hermite", "monotone", "iep", "psd", "generation", "chi", "all"}));
  ver->add_option("--seed", seed)->default_val(7);
  ver->add_option("--samples", samples);
  ver->add_option("--out", out_path);

  try {
    app.parse(argc, argv);
    if (info->parsed()) return cmd_info(diagram, levels, window_max, out_path);
    if (meas->parsed()) return cmd_measures(diagram, depth, epsilon, mode, out_path);
    if (ch->parsed())
      return cmd_char(diagram, alpha, element, mode, depth, measure_file, out_path);
    if (avg->parsed())
      return cmd_avg(diagram, alpha, set_arg, levels, mode, samples, seed, workers,
                     measure_file, out_path);
    if (irs->parsed())
      return cmd_sample_irs(diagram, alpha, element, set_arg, samples, depth, seed,
                            workers, mode, measure_file, out_path);
    if (ver->parsed()) return cmd_verify(which, seed, samples, out_path);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
