#pragma once

// Morphism and conjugacy search: a morphism with a given alpha exists iff the
// fibred attractor is a graph, so it is enough to test each of the M^N tables
// (or the N! bijections for conjugacy).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ifsmorph/error.hpp"
#include "ifsmorph/fibred.hpp"
#include "ifsmorph/ifs.hpp"
#include "ifsmorph/morphism.hpp"

namespace ifsmorph {

enum class SearchMode { morphisms, conjugacies };

inline const char* to_string(SearchMode m) { return m == SearchMode::morphisms ? "morphisms" : "conjugacies"; }

enum class AlphaEnumeration { all, bijections };

// Lexicographic over tables: M^N of them, or N! bijections.
inline std::vector<AlphaMap> enumerate_alphas(std::size_t n, std::size_t m, AlphaEnumeration mode) {
  if (n == 0 || m == 0) throw ShapeMismatch("systems need at least one map");
  std::vector<AlphaMap> out;
  if (mode == AlphaEnumeration::bijections) {
    if (n != m) throw ShapeMismatch("bijections need equally many maps on both sides");
    std::vector<int> t(n);
    std::iota(t.begin(), t.end(), 1);
    do {
      out.emplace_back(t, m);
    } while (std::next_permutation(t.begin(), t.end()));
    return out;
  }
  detail::for_each_word(m, n, [&](const std::vector<int>& t) { out.emplace_back(t, m); });
  return out;
}

struct SearchParams {
  int depth = 12;
  int depth_cap = 16;
  double grid = 0.0;
  std::optional<double> delta;  // default 4 epsilon
  std::optional<double> eta;    // default 10 delta
  std::size_t max_word_len = 2;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  friend bool operator==(const SearchParams& a, const SearchParams& b) {
    return a.depth == b.depth && a.depth_cap == b.depth_cap && a.grid == b.grid && a.delta == b.delta &&
           a.eta == b.eta && a.max_word_len == b.max_word_len && a.seed == b.seed;
  }
};

struct SearchEntry {
  AlphaMap alpha;
  GraphVerdict verdict;
  std::optional<GraphVerdict> transpose_verdict;
  std::optional<GraphVerdict> injectivity_verdict;
  int depth = 0;
  double epsilon = 0.0;
  double runtime_ms = 0.0;  // not part of equality

  // Strongest refutation in the entry; certified kinds win.
  std::optional<GraphVerdict::Kind> refutation() const {
    std::optional<GraphVerdict::Kind> best;
    for (const GraphVerdict* v : {&verdict, transpose_verdict ? &*transpose_verdict : nullptr,
                                  injectivity_verdict ? &*injectivity_verdict : nullptr}) {
      if (!v || !v->refutes()) continue;
      if (!best || (v->certified() && *best == GraphVerdict::Kind::HeuristicNotGraph)) best = v->kind;
    }
    return best;
  }

  friend bool operator==(const SearchEntry& a, const SearchEntry& b) {
    return a.alpha == b.alpha && a.verdict == b.verdict && a.transpose_verdict == b.transpose_verdict &&
           a.injectivity_verdict == b.injectivity_verdict && a.depth == b.depth && a.epsilon == b.epsilon;
  }
};

struct SearchSummary {
  bool any_morphism_candidate = false;
  bool conjugacy_refuted = false;
  bool all_refutations_certified = true;

  friend bool operator==(const SearchSummary&, const SearchSummary&) = default;
};

struct SearchReport {
  SearchMode mode = SearchMode::morphisms;
  std::string source_name;
  std::string target_name;
  std::size_t source_maps = 0;
  std::size_t target_maps = 0;
  SearchParams params;
  std::vector<SearchEntry> entries;
  SearchSummary summary;

  friend bool operator==(const SearchReport&, const SearchReport&) = default;
};

// Summary as implied by the entries. Conjugacy is judged over the bijective
// entries: refuted iff each of them carries a refutation (vacuous when there
// are none).
inline SearchSummary summarize(const SearchReport& r) {
  SearchSummary s;
  bool all_refuted = true;
  for (const auto& e : r.entries) {
    if (e.verdict.kind == GraphVerdict::Kind::HeuristicGraph) s.any_morphism_candidate = true;
    if (!e.alpha.is_bijection()) {
      if (e.verdict.refutes() && !e.verdict.certified()) s.all_refutations_certified = false;
      continue;
    }
    const auto ref = e.refutation();
    if (!ref) {
      all_refuted = false;
      continue;
    }
    if (*ref == GraphVerdict::Kind::HeuristicNotGraph) s.all_refutations_certified = false;
  }
  s.conjugacy_refuted = all_refuted;
  return s;
}

// Structural checks on a report; empty when sound.
inline std::vector<std::string> audit_report(const SearchReport& r) {
  std::vector<std::string> problems;
  const std::size_t n = r.source_maps, m = r.target_maps;
  std::size_t expected = 1;
  if (r.mode == SearchMode::conjugacies) {
    for (std::size_t i = 2; i <= n; ++i) expected *= i;
  } else {
    for (std::size_t i = 0; i < n; ++i) expected *= m;
  }
  if (r.entries.size() != expected) {
    problems.push_back("expected " + std::to_string(expected) + " entries, found " +
                       std::to_string(r.entries.size()));
  }
  for (const auto& e : r.entries) {
    for (const GraphVerdict* v : {&e.verdict, e.transpose_verdict ? &*e.transpose_verdict : nullptr,
                                  e.injectivity_verdict ? &*e.injectivity_verdict : nullptr}) {
      if (!v) continue;
      if (v->kind == GraphVerdict::Kind::CertifiedNotGraph) {
        const auto& w = v->witness;
        const bool same_x = w.size() == 2 && w[0].size() == w[1].size() && !(w[0] == w[1]);
        if (!same_x) problems.push_back("alpha " + e.alpha.to_string() + ": malformed not-graph witness");
      }
      if (v->kind == GraphVerdict::Kind::CertifiedNotInjective) {
        const auto& w = v->witness;
        const bool ok = w.size() == 4 && w[0].size() == 2 && w[0][0] < w[1][0] && w[0][1] > w[1][1] &&
                        w[2][0] < w[3][0] && w[2][1] < w[3][1];
        if (!ok) problems.push_back("alpha " + e.alpha.to_string() + ": malformed not-injective witness");
      }
    }
  }
  const SearchSummary implied = summarize(r);
  if (r.summary.conjugacy_refuted && !implied.conjugacy_refuted) {
    problems.push_back("conjugacy_refuted set but some bijection carries no refutation");
  }
  if (!(r.summary == implied)) problems.push_back("summary disagrees with the entries");
  return problems;
}

// Throws when audit_report finds a problem.
inline void validate_report(const SearchReport& r) {
  const auto problems = audit_report(r);
  if (!problems.empty()) throw Error("report failed the soundness gate: " + problems.front());
}

namespace detail {

inline std::vector<ExactPoint> merged_exact(const std::vector<ExactPoint>& a, const std::vector<ExactPoint>& b) {
  std::vector<ExactPoint> out(a);
  std::unordered_set<ExactPoint, ExactPointHash> seen(a.begin(), a.end());
  for (const auto& p : b)
    if (seen.insert(p).second) out.push_back(p);
  return out;
}

inline SearchEntry evaluate_alpha(const IfsSystem& source, const IfsSystem& target, const AlphaMap& alpha,
                                  const SearchParams& params, SearchMode mode, bool source_is_interval) {
  const auto start = std::chrono::steady_clock::now();
  const FibredSystem fs = fibre(source, target, alpha);
  const std::size_t nx = source.dimension(), ny = target.dimension();
  const auto word_points = exact_fibred_points(fs, params.max_word_len);
  SearchEntry e{alpha, {}, std::nullopt, std::nullopt, params.depth, 0.0, 0.0};
  for (int depth = params.depth;; depth += 2) {
    const CertifiedCloud d = fibred_attractor(fs, depth, params.grid);
    const auto exact = merged_exact(word_points, d.exact_members);
    GraphParams gp = GraphParams::defaults_for(d.epsilon);
    if (params.delta) gp.delta = *params.delta;
    gp.eta = params.eta ? *params.eta : 10.0 * gp.delta;
    e.depth = depth;
    e.epsilon = d.epsilon;
    e.verdict = graph_test(d, exact, nx, gp.delta, gp.eta);
    bool inconclusive = e.verdict.kind == GraphVerdict::Kind::Inconclusive;
    if (mode == SearchMode::conjugacies) {
      std::vector<ExactPoint> swapped;
      swapped.reserve(exact.size());
      for (const auto& p : exact) swapped.push_back(swap_blocks(p, nx));
      e.transpose_verdict = graph_test(swap_blocks(d, nx), swapped, ny, gp.delta, gp.eta);
      inconclusive = inconclusive || e.transpose_verdict->kind == GraphVerdict::Kind::Inconclusive;
      if (nx == 1 && ny == 1) e.injectivity_verdict = injectivity_test_1d(exact, source_is_interval);
    }
    const auto ref = e.refutation();
    const bool settled = ref && *ref != GraphVerdict::Kind::HeuristicNotGraph;
    if (settled || !inconclusive || depth + 2 > params.depth_cap) break;
  }
  e.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return e;
}

inline SearchReport run_search(const IfsSystem& source, const IfsSystem& target, const SearchParams& params,
                               SearchMode mode) {
  if (params.depth < 0 || params.depth_cap < params.depth) throw BadParams("need 0 <= depth <= depth_cap");
  const auto alphas = enumerate_alphas(source.size(), target.size(),
                                       mode == SearchMode::conjugacies ? AlphaEnumeration::bijections
                                                                       : AlphaEnumeration::all);
  bool source_is_interval = false;
  if (mode == SearchMode::conjugacies && source.dimension() == 1 && target.dimension() == 1) {
    source_is_interval = interval_attractor(source).has_value();
  }
  SearchReport r;
  r.mode = mode;
  r.source_name = source.name();
  r.target_name = target.name();
  r.source_maps = source.size();
  r.target_maps = target.size();
  r.params = params;
  std::vector<std::optional<SearchEntry>> slots(alphas.size());
  std::vector<std::exception_ptr> errors(alphas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < alphas.size(); i = next++) {
      try {
        slots[i] = evaluate_alpha(source, target, alphas[i], params, mode, source_is_interval);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned threads = params.threads ? params.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, alphas.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
  for (auto& s : slots) r.entries.push_back(std::move(*s));
  r.summary = summarize(r);
  return r;
}

}  // namespace detail

inline SearchReport search_morphisms(const IfsSystem& source, const IfsSystem& target,
                                     const SearchParams& params = {}) {
  return detail::run_search(source, target, params, SearchMode::morphisms);
}

inline SearchReport search_conjugacies(const IfsSystem& source, const IfsSystem& target,
                                       const SearchParams& params = {}) {
  if (source.size() != target.size()) {
    throw ShapeMismatch("conjugacy needs equally many maps (" + std::to_string(source.size()) + " vs " +
                        std::to_string(target.size()) + ")");
  }
  return detail::run_search(source, target, params, SearchMode::conjugacies);
}

}  // namespace ifsmorph
