#pragma once

// Command-line front end. Exit codes: 0 success, 1 internal error,
// 2 input/parse error, 3 certification impossible, 4 shape mismatch.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <charconv>

#include "CLI11.hpp"

#include "ifsmorph/ifsmorph.hpp"

namespace ifsmorph::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kInput = 2, kUncertified = 3, kShape = 4 };

inline std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ParseError("empty entry in " + what + " '" + text + "'");
    item = item.substr(b, e - b + 1);
    int v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw ParseError("non-integer entry '" + item + "' in " + what);
    }
    out.push_back(v);
  }
  if (out.empty()) throw ParseError(what + " is empty");
  return out;
}

inline std::pair<std::size_t, std::size_t> parse_px(const std::string& text) {
  const auto x = text.find_first_of("xX");
  try {
    if (x == std::string::npos) {
      const auto n = std::stoul(text);
      return {n, n};
    }
    return {std::stoul(text.substr(0, x)), std::stoul(text.substr(x + 1))};
  } catch (const std::exception&) {
    throw ParseError("--px expects WIDTHxHEIGHT, got '" + text + "'");
  }
}

inline Word parse_word(const std::string& text, std::size_t tail_period, std::size_t alphabet) {
  const auto letters = parse_int_list(text, "word");
  if (tail_period > letters.size()) throw ParseError("tail period longer than the word");
  std::optional<std::size_t> pre;
  if (tail_period > 0) pre = letters.size() - tail_period;
  try {
    return Word(letters, alphabet, pre);
  } catch (const ShapeMismatch& e) {
    throw ParseError(e.what());
  }
}

inline std::string join_letters(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

inline unsigned resolve_threads(unsigned flag) {
  if (const char* env = std::getenv("IFS_MORPH_THREADS")) {
    try {
      return static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      throw ParseError("IFS_MORPH_THREADS must be a non-negative integer");
    }
  }
  return flag;
}

struct Options {
  // attractor
  std::string system_path;
  int depth = 10;
  double grid = 0.0;
  std::string out_path;
  bool no_certify = false;
  // fibred-graph / search
  std::string source_path, target_path;
  std::string alpha_text;
  int fib_depth = 12;
  int depth_cap = 16;
  std::optional<double> delta, eta;
  std::size_t max_word_len = 2;
  std::string render_path;
  std::string px = "400x400";
  std::string mode = "morphisms";
  unsigned threads = 0;
  bool timings = false;
  // codemap / lift
  std::string word_text;
  std::size_t tail_period = 0;
  std::string basepoint = "auto";
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot write '" + path + "'");
  f << text;
}

inline int cmd_attractor(const Options& o, std::ostream& out) {
  const IfsSystem sys = io::load_system(o.system_path);
  const CertifiedCloud a = attractor_deterministic(sys, o.depth, o.grid, !o.no_certify);
  std::ostringstream csv;
  io::write_csv(csv, a.cloud);
  csv << "# epsilon=" << io::format_double(a.epsilon) << '\n';
  if (o.out_path.empty()) {
    out << csv.str();
  } else {
    write_text(o.out_path, csv.str());
  }
  return kOk;
}

inline SearchParams search_params(const Options& o) {
  SearchParams p;
  p.depth = o.fib_depth;
  p.depth_cap = std::max(o.depth_cap, o.fib_depth);
  p.grid = o.grid;
  p.delta = o.delta;
  p.eta = o.eta;
  p.max_word_len = o.max_word_len;
  p.threads = resolve_threads(o.threads);
  return p;
}

inline int cmd_fibred_graph(const Options& o, std::ostream& out, std::ostream& err) {
  const IfsSystem source = io::load_system(o.source_path);
  const IfsSystem target = io::load_system(o.target_path);
  const AlphaMap alpha(parse_int_list(o.alpha_text, "alpha"), target.size());
  if (alpha.domain_size() != source.size()) {
    throw ShapeMismatch("alpha has " + std::to_string(alpha.domain_size()) + " entries but the source has " +
                        std::to_string(source.size()) + " maps");
  }
  SearchParams p = search_params(o);
  p.depth_cap = p.depth;
  const FibredSystem fs = fibre(source, target, alpha);
  const CertifiedCloud d = fibred_attractor(fs, p.depth, p.grid);
  const auto both_1d = source.dimension() == 1 && target.dimension() == 1;
  const bool interval = both_1d && interval_attractor(source).has_value();
  SearchEntry e = detail::evaluate_alpha(source, target, alpha, p, SearchMode::morphisms, interval);
  const auto word_points = exact_fibred_points(fs, p.max_word_len);
  if (both_1d) e.injectivity_verdict = injectivity_test_1d(detail::merged_exact(word_points, d.exact_members), interval);
  io::FibredReport report{source.name(), target.name(), p, d.cloud.size(), e};
  if (!o.out_path.empty()) write_text(o.out_path, io::serialize(report));
  if (!o.render_path.empty()) {
    if (!both_1d) {
      err << "warning: --render needs 1-D source and target; skipped\n";
    } else {
      const auto [w, h] = parse_px(o.px);
      std::ofstream f(o.render_path, std::ios::binary);
      if (!f) throw ParseError("cannot write '" + o.render_path + "'");
      // Exact word points are members of the attractor too; drawing them
      // pins the extreme corners the finite iteration only approaches.
      PointCloud drawn = d.cloud;
      for (const auto& q : word_points) drawn.push_back(q.to_doubles());
      io::write_pgm(f, io::render(drawn, w, h, io::ViewBox::bounding(drawn)));
    }
  }
  out << "verdict=" << to_string(e.verdict.kind);
  if (e.injectivity_verdict) out << " injectivity=" << to_string(e.injectivity_verdict->kind);
  out << " epsilon=" << io::format_double(e.epsilon) << " points=" << d.cloud.size() << '\n';
  for (const GraphVerdict* v : {&e.verdict, e.injectivity_verdict ? &*e.injectivity_verdict : nullptr}) {
    if (!v || v->witness.empty()) continue;
    out << "witness " << to_string(v->kind) << ':';
    for (const auto& pt : v->witness) out << ' ' << pt.to_string();
    out << '\n';
  }
  if (e.verdict.kind == GraphVerdict::Kind::HeuristicGraph) {
    out << "note: HeuristicGraph is a resolution-limited observation, not a certificate\n";
  }
  return kOk;
}

inline int cmd_search(const Options& o, std::ostream& out, std::ostream& err) {
  const IfsSystem source = io::load_system(o.source_path);
  const IfsSystem target = io::load_system(o.target_path);
  const SearchParams p = search_params(o);
  SearchReport r;
  if (o.mode == "conjugacies") {
    r = search_conjugacies(source, target, p);
  } else if (o.mode == "morphisms") {
    r = search_morphisms(source, target, p);
  } else {
    throw ParseError("--mode must be morphisms or conjugacies");
  }
  validate_report(r);
  if (!o.out_path.empty()) write_text(o.out_path, io::serialize(r, o.timings));
  if (r.summary.conjugacy_refuted && !r.summary.all_refutations_certified) {
    err << "warning: some refutations are heuristic (numeric clouds can alias)\n";
  }
  const auto b = [](bool v) { return v ? "true" : "false"; };
  if (r.mode == SearchMode::morphisms) out << "any_morphism_candidate=" << b(r.summary.any_morphism_candidate) << ' ';
  out << "conjugacy_refuted=" << b(r.summary.conjugacy_refuted) << " certified="
      << b(r.summary.all_refutations_certified) << " alphas=" << r.entries.size() << '\n';
  return kOk;
}

inline int cmd_codemap(const Options& o, std::ostream& out) {
  const IfsSystem sys = io::load_system(o.system_path);
  const Word w = parse_word(o.word_text, o.tail_period, sys.size());
  std::optional<ExactPoint> base;
  if (o.basepoint != "auto") {
    std::vector<ExactScalar> coords;
    std::stringstream ss(o.basepoint);
    std::string item;
    while (std::getline(ss, item, ',')) coords.push_back(parse_rational(item));
    if (coords.size() != sys.dimension()) throw ParseError("basepoint has the wrong dimension");
    base = ExactPoint(std::move(coords));
  }
  const CodePoint c = code_map_eval(sys, w, base);
  out << "point=";
  for (std::size_t i = 0; i < c.point.size(); ++i) out << (i ? "," : "") << to_string(c.point[i]);
  out << " error=" << io::format_double(c.error) << '\n';
  return kOk;
}

inline int cmd_lift(const Options& o, std::ostream& out) {
  const auto table = parse_int_list(o.alpha_text, "alpha");
  int codomain = 0;
  for (int v : table) codomain = std::max(codomain, v);
  std::optional<AlphaMap> alpha;
  try {
    alpha.emplace(table, static_cast<std::size_t>(std::max(codomain, 1)));
  } catch (const ShapeMismatch& e) {
    throw ParseError(e.what());
  }
  const Word w = parse_word(o.word_text, o.tail_period, table.size());
  const Word lifted = lift_to_code_space(*alpha, w);
  out << join_letters(lifted.letters());
  if (lifted.eventually_periodic()) out << " tail-period=" << lifted.period_length();
  out << '\n';
  return kOk;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Attractors, fibred systems and morphism search for affine iterated function systems", "ifsmorph"};
  app.require_subcommand(1);
  Options o;

  auto* attractor = app.add_subcommand("attractor", "Certified deterministic attractor approximation as CSV");
  attractor->add_option("system", o.system_path, "System file (JSON)")->required();
  attractor->add_option("--depth", o.depth, "Hutchinson iterations")->check(CLI::NonNegativeNumber);
  attractor->add_option("--grid", o.grid, "Grid cell size for pruning (0 = off)")->check(CLI::NonNegativeNumber);
  attractor->add_option("--out", o.out_path, "CSV output path (default stdout)");
  attractor->add_flag("--no-certify", o.no_certify, "Allow declared Lipschitz bounds (epsilon = inf)");

  auto add_pair = [&](CLI::App* sc) {
    sc->add_option("source", o.source_path, "Source system file")->required();
    sc->add_option("target", o.target_path, "Target system file")->required();
    sc->add_option("--depth", o.fib_depth, "Depth of the fibred attractor")->check(CLI::NonNegativeNumber);
    sc->add_option("--grid", o.grid, "Grid cell size for pruning (0 = off)")->check(CLI::NonNegativeNumber);
    sc->add_option("--delta", o.delta, "Graph-test x resolution (default 4 epsilon)");
    sc->add_option("--eta", o.eta, "Graph-test y threshold (default 10 delta)");
    sc->add_option("--max-word-len", o.max_word_len, "Word length for exact fibred points");
    sc->add_option("--out", o.out_path, "Report output path (JSON)");
    sc->add_option("--threads", o.threads, "Worker threads (0 = logical processors)");
  };
  auto* fibred = app.add_subcommand("fibred-graph", "Fibre two systems over alpha and test the attractor");
  add_pair(fibred);
  fibred->add_option("--alpha", o.alpha_text, "Alpha table, e.g. \"1,2\"")->required();
  fibred->add_option("--render", o.render_path, "Binary PGM render of the fibred attractor");
  fibred->add_option("--px", o.px, "Render size WIDTHxHEIGHT");

  auto* search = app.add_subcommand("search", "Search all alphas for morphisms or conjugacies");
  add_pair(search);
  search->add_option("--mode", o.mode, "morphisms | conjugacies")
      ->check(CLI::IsMember({"morphisms", "conjugacies"}));
  search->add_option("--depth-cap", o.depth_cap, "Cap for depth escalation on inconclusive verdicts");
  search->add_flag("--timings", o.timings, "Record per-alpha runtimes in the report");

  auto* codemap = app.add_subcommand("codemap", "Evaluate the code map at a word");
  codemap->add_option("system", o.system_path, "System file")->required();
  codemap->add_option("--word", o.word_text, "Letters, e.g. \"1,2,1,2\"")->required();
  codemap->add_option("--tail-period", o.tail_period, "Length of the repeating tail (0 = finite truncation)");
  codemap->add_option("--basepoint", o.basepoint, "auto or comma-separated rationals");

  auto* lift = app.add_subcommand("lift", "Lift alpha letterwise to code space");
  lift->add_option("--alpha", o.alpha_text, "Alpha table")->required();
  lift->add_option("--word", o.word_text, "Letters")->required();
  lift->add_option("--tail-period", o.tail_period, "Length of the repeating tail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  }

  try {
    if (attractor->parsed()) return cmd_attractor(o, out);
    if (fibred->parsed()) return cmd_fibred_graph(o, out, err);
    if (search->parsed()) return cmd_search(o, out, err);
    if (codemap->parsed()) return cmd_codemap(o, out);
    if (lift->parsed()) return cmd_lift(o, out);
  } catch (const UncertifiedBound& e) {
    err << "error: " << e.what() << '\n';
    return kUncertified;
  } catch (const ShapeMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kShape;
  } catch (const NotOneDimensional& e) {
    err << "error: " << e.what() << '\n';
    return kShape;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  } catch (const NotContraction& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  } catch (const BadParams& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

}  // namespace ifsmorph::cli
