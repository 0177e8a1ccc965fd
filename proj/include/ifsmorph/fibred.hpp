#pragma once

// The system fibred over alpha, gamma^alpha(x, y) = (gamma(x), alpha(gamma)(y)),
// and the graph tests on its attractor D: D is the graph of a function iff
// alpha extends to a morphism. Refutations carry exact witnesses in D;
// affirmative answers are heuristic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ifsmorph/cloud.hpp"
#include "ifsmorph/error.hpp"
#include "ifsmorph/exact.hpp"
#include "ifsmorph/ifs.hpp"
#include "ifsmorph/morphism.hpp"

namespace ifsmorph {

struct FibredSystem {
  IfsSystem product;
  AlphaMap alpha;
  IfsSystem source;
  IfsSystem target;

  std::size_t split() const { return source.dimension(); }
};

inline FibredSystem fibre(const IfsSystem& source, const IfsSystem& target, const AlphaMap& alpha) {
  if (alpha.domain_size() != source.size() || alpha.codomain_size() != target.size()) {
    throw ShapeMismatch("alpha table of length " + std::to_string(alpha.domain_size()) + " into " +
                        std::to_string(alpha.codomain_size()) + " maps does not fit systems with " +
                        std::to_string(source.size()) + " and " + std::to_string(target.size()) + " maps");
  }
  const std::size_t nx = source.dimension(), ny = target.dimension(), n = nx + ny;
  std::vector<AffineContraction> maps;
  for (const auto& g : source.maps()) {
    const auto& l = target.map(alpha(g.label()));
    ExactMatrix m(n, n);
    for (std::size_t r = 0; r < nx; ++r)
      for (std::size_t c = 0; c < nx; ++c) m(r, c) = g.linear()(r, c);
    for (std::size_t r = 0; r < ny; ++r)
      for (std::size_t c = 0; c < ny; ++c) m(nx + r, nx + c) = l.linear()(r, c);
    const bool certified = g.bound_kind() == BoundKind::certified && l.bound_kind() == BoundKind::certified;
    maps.push_back(AffineContraction::with_bound(
        AffineMap(std::move(m), concat(g.translation(), l.translation())),
        std::max(g.lipschitz_bound_exact(), l.lipschitz_bound_exact()),
        certified ? BoundKind::certified : BoundKind::declared));
  }
  IfsSystem product(source.name() + " x_[" + alpha.to_string() + "] " + target.name(), n, std::move(maps),
                    Metric::product(nx));
  return FibredSystem{std::move(product), alpha, source, target};
}

inline CertifiedCloud fibred_attractor(const FibredSystem& fs, int depth, double grid = 0.0,
                                       bool require_certified = true) {
  return attractor_deterministic(fs.product, depth, grid, require_certified);
}

namespace detail {

// Calls fn(word) for every word of the given length over {1..n}, lexicographic.
template <typename Fn>
void for_each_word(std::size_t n, std::size_t length, Fn&& fn) {
  std::vector<int> w(length, 1);
  while (true) {
    fn(static_cast<const std::vector<int>&>(w));
    std::size_t i = length;
    while (i > 0 && w[i - 1] == static_cast<int>(n)) w[--i] = 1;
    if (i == 0) return;
    ++w[i - 1];
  }
}

}  // namespace detail

// Fixed points of all words of length 1..max_len, then their images under all
// words of length 0..max_len. Every returned point lies exactly in D.
inline std::vector<ExactPoint> exact_fibred_points(const FibredSystem& fs, std::size_t max_word_len) {
  const IfsSystem& sys = fs.product;
  std::vector<AffineMap> word_maps{AffineMap::identity(sys.dimension())};
  std::vector<ExactPoint> fixed;
  for (std::size_t len = 1; len <= max_word_len; ++len) {
    detail::for_each_word(sys.size(), len, [&](const std::vector<int>& w) {
      const AffineMap m = detail::word_map(sys, w, 0, w.size());
      fixed.push_back(affine_fixed_point(m.linear(), m.translation()));
      word_maps.push_back(m);
    });
  }
  std::vector<ExactPoint> out;
  std::unordered_set<ExactPoint, ExactPointHash> seen;
  for (const auto& p : fixed) {
    for (const auto& m : word_maps) {
      ExactPoint q = m(p);
      if (seen.insert(q).second) out.push_back(std::move(q));
    }
  }
  return out;
}

struct GraphVerdict {
  enum class Kind { CertifiedNotGraph, CertifiedNotInjective, HeuristicGraph, HeuristicNotGraph, Inconclusive };
  Kind kind = Kind::Inconclusive;
  std::vector<ExactPoint> witness;
  double score = 0.0;
  double delta = 0.0;
  double eta = 0.0;

  bool refutes() const {
    return kind == Kind::CertifiedNotGraph || kind == Kind::CertifiedNotInjective ||
           kind == Kind::HeuristicNotGraph;
  }
  bool certified() const { return kind == Kind::CertifiedNotGraph || kind == Kind::CertifiedNotInjective; }

  friend bool operator==(const GraphVerdict&, const GraphVerdict&) = default;
};

inline const char* to_string(GraphVerdict::Kind k) {
  switch (k) {
    case GraphVerdict::Kind::CertifiedNotGraph: return "CertifiedNotGraph";
    case GraphVerdict::Kind::CertifiedNotInjective: return "CertifiedNotInjective";
    case GraphVerdict::Kind::HeuristicGraph: return "HeuristicGraph";
    case GraphVerdict::Kind::HeuristicNotGraph: return "HeuristicNotGraph";
    case GraphVerdict::Kind::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

inline GraphVerdict::Kind verdict_kind_from_string(const std::string& s) {
  for (auto k : {GraphVerdict::Kind::CertifiedNotGraph, GraphVerdict::Kind::CertifiedNotInjective,
                 GraphVerdict::Kind::HeuristicGraph, GraphVerdict::Kind::HeuristicNotGraph,
                 GraphVerdict::Kind::Inconclusive}) {
    if (s == to_string(k)) return k;
  }
  throw ParseError("unknown verdict kind '" + s + "'");
}

// Default resolution: delta = 4 epsilon, eta = 10 delta. An exact cloud
// (epsilon = 0) gets the smallest positive delta.
struct GraphParams {
  double delta = 0.0;
  double eta = 0.0;

  static GraphParams defaults_for(double epsilon) {
    const double delta = epsilon > 0 ? 4.0 * epsilon : std::numeric_limits<double>::denorm_min();
    return {delta, 10.0 * delta};
  }
};

namespace detail {

inline double block_distance(const double* a, const double* b, std::size_t first, std::size_t last) {
  double s = 0;
  for (std::size_t i = first; i < last; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

struct CellHash {
  std::size_t operator()(const std::vector<std::int64_t>& k) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (auto v : k) h = (h ^ static_cast<std::uint64_t>(v)) * 1099511628211ull;
    return h;
  }
};

}  // namespace detail

namespace detail {

// Plane case of the numeric phase. After sorting by x, the largest y-spread
// over pairs with |dx| <= delta is the largest spread inside a window
// [x_i, x_i + delta], maintained with monotone deques.
inline GraphVerdict graph_scan_1d(const PointCloud& c, GraphVerdict v) {
  const std::size_t m = c.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return c.raw(a)[0] < c.raw(b)[0] || (c.raw(a)[0] == c.raw(b)[0] && a < b);
  });
  const auto x = [&](std::size_t t) { return c.raw(order[t])[0]; };
  const auto y = [&](std::size_t t) { return c.raw(order[t])[1]; };
  std::deque<std::size_t> hi, lo;
  double score = 0.0;
  bool sparse = false;
  std::size_t r = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const bool left = i > 0 && std::abs(x(i) - x(i - 1)) <= v.delta;
    const bool right = i + 1 < m && std::abs(x(i + 1) - x(i)) <= v.delta;
    if (!left && !right) sparse = true;
    if (r < i) r = i;
    while (r < m && std::abs(x(r) - x(i)) <= v.delta) {
      while (!hi.empty() && y(hi.back()) <= y(r)) hi.pop_back();
      hi.push_back(r);
      while (!lo.empty() && y(lo.back()) >= y(r)) lo.pop_back();
      lo.push_back(r);
      ++r;
    }
    while (!hi.empty() && hi.front() < i) hi.pop_front();
    while (!lo.empty() && lo.front() < i) lo.pop_front();
    if (!hi.empty()) score = std::max(score, y(hi.front()) - y(lo.front()));
  }
  v.score = score;
  if (score >= v.eta) {
    v.kind = GraphVerdict::Kind::HeuristicNotGraph;
  } else if (sparse) {
    v.kind = GraphVerdict::Kind::Inconclusive;
  } else {
    v.kind = GraphVerdict::Kind::HeuristicGraph;
  }
  return v;
}

}  // namespace detail

// Exact phase: two exact points with identical x-block and distinct y-blocks
// refute graphness. Numeric phase: score = max d_Y over pairs with d_X <= delta.
inline GraphVerdict graph_test(const CertifiedCloud& d, std::span<const ExactPoint> exact, std::size_t split,
                               double delta, double eta) {
  if (!(delta > 2.0 * d.epsilon)) {
    throw BadParams("delta must exceed twice the cloud error (delta=" + std::to_string(delta) +
                    ", epsilon=" + std::to_string(d.epsilon) + ")");
  }
  if (!(eta > 0.0)) throw BadParams("eta must be positive");
  const std::size_t n = d.cloud.dimension();
  if (split == 0 || split >= n) throw DimensionMismatch("split must separate two non-empty blocks");

  GraphVerdict v;
  v.delta = delta;
  v.eta = eta;

  std::map<ExactPoint, std::size_t> by_x;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    if (exact[i].size() != n) throw DimensionMismatch("exact point dimension");
    const ExactPoint x = exact[i].slice(0, split);
    auto [it, inserted] = by_x.emplace(x, i);
    if (!inserted && !(exact[it->second] == exact[i])) {
      v.kind = GraphVerdict::Kind::CertifiedNotGraph;
      v.witness = {exact[it->second], exact[i]};
      v.score = distance_upper(exact[it->second].slice(split, n - split), exact[i].slice(split, n - split));
      return v;
    }
  }

  const auto& c = d.cloud;
  if (c.size() == 1) {
    v.kind = GraphVerdict::Kind::HeuristicGraph;
    return v;
  }
  if (n == 2) return detail::graph_scan_1d(c, std::move(v));
  std::unordered_map<std::vector<std::int64_t>, std::vector<std::size_t>, detail::CellHash> cells;
  std::vector<std::vector<std::int64_t>> keys(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto& k = keys[i];
    k.resize(split);
    for (std::size_t j = 0; j < split; ++j) k[j] = static_cast<std::int64_t>(std::floor(c.raw(i)[j] / delta));
    cells[k].push_back(i);
  }
  std::size_t offsets = 1;
  for (std::size_t j = 0; j < split; ++j) offsets *= 3;
  double score = 0.0;
  bool sparse = false;
  std::vector<std::int64_t> nk(split);
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::size_t neighbours = 0;
    for (std::size_t o = 0; o < offsets; ++o) {
      std::size_t code = o;
      for (std::size_t j = 0; j < split; ++j) {
        nk[j] = keys[i][j] + static_cast<std::int64_t>(code % 3) - 1;
        code /= 3;
      }
      const auto it = cells.find(nk);
      if (it == cells.end()) continue;
      for (std::size_t jdx : it->second) {
        if (jdx == i) continue;
        if (detail::block_distance(c.raw(i), c.raw(jdx), 0, split) > delta) continue;
        ++neighbours;
        score = std::max(score, detail::block_distance(c.raw(i), c.raw(jdx), split, n));
      }
    }
    if (neighbours == 0) sparse = true;
  }
  v.score = score;
  if (score >= eta) {
    v.kind = GraphVerdict::Kind::HeuristicNotGraph;
  } else if (sparse) {
    v.kind = GraphVerdict::Kind::Inconclusive;
  } else {
    v.kind = GraphVerdict::Kind::HeuristicGraph;
  }
  return v;
}

// For 1-D x and y: a falling exact pair together with a rising one means no
// monotone function passes through D; when the domain attractor is an
// interval, a continuous non-monotone function is not injective.
inline GraphVerdict injectivity_test_1d(std::span<const ExactPoint> exact, bool domain_connected) {
  for (const auto& p : exact) {
    if (p.size() != 2) throw NotOneDimensional("injectivity test needs points in R x R");
  }
  GraphVerdict v;
  if (!domain_connected || exact.size() < 2) return v;

  // Earliest pairs in input order first: short words come first there, so
  // the witnesses are the simplest available.
  constexpr std::size_t kPrefix = 512;
  std::optional<std::pair<std::size_t, std::size_t>> early_rise, early_fall;
  const std::size_t head = std::min(exact.size(), kPrefix);
  for (std::size_t j = 1; j < head && !(early_rise && early_fall); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const auto& a = exact[i][0] < exact[j][0] ? exact[i] : exact[j];
      const auto& b = exact[i][0] < exact[j][0] ? exact[j] : exact[i];
      if (a[0] == b[0] || a[1] == b[1]) continue;
      const auto pair = std::make_pair(&a == &exact[i] ? i : j, &a == &exact[i] ? j : i);
      if (a[1] < b[1] && !early_rise) early_rise = pair;
      if (a[1] > b[1] && !early_fall) early_fall = pair;
    }
  }
  if (early_rise && early_fall) {
    const auto& [fa, fb] = *early_fall;
    const auto& [ra, rb] = *early_rise;
    v.kind = GraphVerdict::Kind::CertifiedNotInjective;
    v.witness = {exact[fa], exact[fb], exact[ra], exact[rb]};
    v.score = round_down(std::min(ExactScalar(exact[fa][1] - exact[fb][1]), ExactScalar(exact[rb][1] - exact[ra][1])));
    return v;
  }

  std::vector<std::size_t> order(exact.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return exact[a] < exact[b]; });

  std::optional<std::size_t> lowest, highest;  // over strictly smaller x
  std::optional<std::pair<std::size_t, std::size_t>> rise, fall;
  ExactScalar best_rise = 0, best_fall = 0;
  std::size_t g = 0;
  while (g < order.size()) {
    std::size_t h = g;
    while (h < order.size() && exact[order[h]][0] == exact[order[g]][0]) ++h;
    for (std::size_t t = g; t < h; ++t) {
      const auto& p = exact[order[t]];
      if (lowest && p[1] - exact[*lowest][1] > best_rise) {
        best_rise = p[1] - exact[*lowest][1];
        rise = std::make_pair(*lowest, order[t]);
      }
      if (highest && exact[*highest][1] - p[1] > best_fall) {
        best_fall = exact[*highest][1] - p[1];
        fall = std::make_pair(*highest, order[t]);
      }
    }
    for (std::size_t t = g; t < h; ++t) {
      const auto& p = exact[order[t]];
      if (!lowest || p[1] < exact[*lowest][1]) lowest = order[t];
      if (!highest || p[1] > exact[*highest][1]) highest = order[t];
    }
    g = h;
  }
  if (rise && fall) {
    v.kind = GraphVerdict::Kind::CertifiedNotInjective;
    v.witness = {exact[fall->first], exact[fall->second], exact[rise->first], exact[rise->second]};
    v.score = round_down(std::min(best_rise, best_fall));
  }
  return v;
}

struct ProjectionReport {
  double distance = 0.0;
  double bound = 0.0;
  bool holds = false;
};

// d_H(pi_1(D), A) against the contract D.epsilon + A.epsilon + tol.
inline ProjectionReport projection_check(const CertifiedCloud& d, const CertifiedCloud& source_attractor,
                                         std::size_t split, double tol) {
  if (source_attractor.cloud.dimension() != split) throw DimensionMismatch("source cloud dimension != split");
  const PointCloud projected = d.cloud.project(0, split);
  ProjectionReport r;
  r.distance = hausdorff_distance(projected, source_attractor.cloud);
  r.bound = d.epsilon + source_attractor.epsilon + tol;
  r.holds = r.distance <= r.bound;
  return r;
}

struct TabulatedValue {
  std::vector<double> y;
  double radius = 0.0;  // delta + epsilon
};

// y-block of the cloud point nearest in x; only meaningful once graph_test
// has not refuted D.
inline TabulatedValue tabulate_function(const CertifiedCloud& d, std::span<const double> x, std::size_t split,
                                        double delta) {
  if (x.size() != split) throw DimensionMismatch("query dimension != split");
  const auto& c = d.cloud;
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < split; ++j) {
      const double e = c.raw(i)[j] - x[j];
      s += e * e;
    }
    if (s < best) {
      best = s;
      arg = i;
    }
  }
  if (!(std::sqrt(best) <= delta)) throw NoSample("no cloud point within delta of the query");
  const auto p = c[arg];
  return {std::vector<double>(p.begin() + static_cast<std::ptrdiff_t>(split), p.end()), delta + d.epsilon};
}

inline ExactPoint swap_blocks(const ExactPoint& p, std::size_t split) {
  return concat(p.slice(split, p.size() - split), p.slice(0, split));
}

// (x, y) -> (y, x) on cloud and exact members.
inline CertifiedCloud swap_blocks(const CertifiedCloud& d, std::size_t split) {
  const std::size_t n = d.cloud.dimension();
  CertifiedCloud out;
  out.epsilon = d.epsilon;
  out.metric = Metric::product(n - split);
  out.cloud = PointCloud(n);
  out.cloud.reserve(d.cloud.size());
  std::vector<double> buf(n);
  for (std::size_t i = 0; i < d.cloud.size(); ++i) {
    const auto p = d.cloud[i];
    std::copy(p.begin() + static_cast<std::ptrdiff_t>(split), p.end(), buf.begin());
    std::copy(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(split),
              buf.begin() + static_cast<std::ptrdiff_t>(n - split));
    out.cloud.push_back(buf);
  }
  for (const auto& p : d.exact_members) out.exact_members.push_back(swap_blocks(p, split));
  return out;
}

}  // namespace ifsmorph
