#pragma once

// Hyperbolic iterated function systems of affine contractions: the data
// model, the Hutchinson operator on finite clouds, certified deterministic
// attractor approximation, the chaos game and backward-invariance checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ifsmorph/cloud.hpp"
#include "ifsmorph/error.hpp"
#include "ifsmorph/exact.hpp"
#include "ifsmorph/parallel.hpp"
#include "ifsmorph/random.hpp"

namespace ifsmorph {

// x -> A x + b with A rows x cols. Exact form plus a cached double copy.
class AffineMap {
 public:
  AffineMap() = default;
  AffineMap(ExactMatrix linear, ExactPoint translation)
      : linear_(std::move(linear)), translation_(std::move(translation)) {
    if (linear_.rows() != translation_.size()) {
      throw DimensionMismatch("translation length does not match matrix rows");
    }
    linear_d_ = linear_.to_doubles();
    translation_d_ = translation_.to_doubles();
  }

  static AffineMap identity(std::size_t n) {
    return AffineMap(ExactMatrix::identity(n), ExactPoint(n));
  }

  const ExactMatrix& linear() const { return linear_; }
  const ExactPoint& translation() const { return translation_; }
  const std::vector<double>& translation_doubles() const { return translation_d_; }
  std::size_t in_dim() const { return linear_.cols(); }
  std::size_t out_dim() const { return linear_.rows(); }

  ExactPoint operator()(const ExactPoint& x) const { return linear_ * x + translation_; }

  void apply(const double* x, double* y) const {
    const std::size_t r = out_dim(), c = in_dim();
    for (std::size_t i = 0; i < r; ++i) {
      double s = translation_d_[i];
      for (std::size_t j = 0; j < c; ++j) s += linear_d_[i * c + j] * x[j];
      y[i] = s + 0.0;  // folds -0.0 into 0.0
    }
  }

  std::vector<double> operator()(std::span<const double> x) const {
    if (x.size() != in_dim()) throw DimensionMismatch("affine map input size");
    std::vector<double> y(out_dim());
    apply(x.data(), y.data());
    return y;
  }

  // (*this) o inner
  AffineMap after(const AffineMap& inner) const {
    if (in_dim() != inner.out_dim()) throw ShapeMismatch("affine composition shape mismatch");
    return AffineMap(linear_ * inner.linear_, linear_ * inner.translation_ + translation_);
  }

  friend bool operator==(const AffineMap& a, const AffineMap& b) {
    return a.linear_ == b.linear_ && a.translation_ == b.translation_;
  }

 private:
  ExactMatrix linear_;
  ExactPoint translation_;
  std::vector<double> linear_d_;
  std::vector<double> translation_d_;
};

enum class BoundKind { certified, declared };

class AffineContraction {
 public:
  // Certifies the Lipschitz bound from operator_norm_upper, or accepts a
  // declared one after a 10^4-pair spot check. Declared bounds never feed
  // certified error estimates.
  static AffineContraction make(ExactMatrix linear, ExactPoint translation,
                                std::optional<ExactScalar> declared = std::nullopt) {
    if (!linear.square()) throw ShapeMismatch("contraction matrix must be square");
    AffineContraction g;
    g.map_ = AffineMap(std::move(linear), std::move(translation));
    if (declared) {
      if (*declared < 0 || *declared >= 1) {
        throw NotContraction("declared Lipschitz constant must lie in [0, 1)");
      }
      g.bound_exact_ = *declared;
      g.bound_ = round_up(*declared);
      g.kind_ = BoundKind::declared;
      if (g.bound_ >= 1.0) throw NotContraction("declared Lipschitz constant rounds to 1");
      g.spot_check();
    } else {
      g.bound_exact_ = operator_norm_upper_exact(g.map_.linear());
      g.bound_ = round_up(g.bound_exact_);
      g.kind_ = BoundKind::certified;
      if (g.bound_ >= 1.0) {
        throw NotContraction("certified norm bound " + std::to_string(g.bound_) +
                             " >= 1; declare a Lipschitz constant if the map contracts");
      }
    }
    return g;
  }

  // For assembling product maps whose bound is derived from factor bounds.
  static AffineContraction with_bound(AffineMap map, ExactScalar bound, BoundKind kind) {
    if (bound < 0 || bound >= 1) throw NotContraction("bound must lie in [0, 1)");
    AffineContraction g;
    g.map_ = std::move(map);
    g.bound_exact_ = std::move(bound);
    g.bound_ = round_up(g.bound_exact_);
    g.kind_ = kind;
    return g;
  }

  const AffineMap& map() const { return map_; }
  const ExactMatrix& linear() const { return map_.linear(); }
  const ExactPoint& translation() const { return map_.translation(); }
  double lipschitz_bound() const { return bound_; }
  const ExactScalar& lipschitz_bound_exact() const { return bound_exact_; }
  BoundKind bound_kind() const { return kind_; }
  int label() const { return label_; }
  std::size_t dimension() const { return map_.in_dim(); }

  ExactPoint operator()(const ExactPoint& x) const { return map_(x); }
  void apply(const double* x, double* y) const { map_.apply(x, y); }

  ExactPoint fixed_point() const { return affine_fixed_point(map_.linear(), map_.translation()); }

 private:
  friend class IfsSystem;

  void spot_check() const {
    SplitMix64 rng(0x5eedULL);
    const std::size_t n = dimension();
    std::vector<double> v(n), w(n), zero(n, 0.0), base(n);
    map_.apply(zero.data(), base.data());
    for (int trial = 0; trial < 10000; ++trial) {
      double nv = 0;
      for (auto& x : v) {
        x = 2.0 * rng.uniform() - 1.0;
        nv += x * x;
      }
      if (nv == 0) continue;
      map_.apply(v.data(), w.data());
      double nw = 0;
      for (std::size_t i = 0; i < n; ++i) nw += (w[i] - base[i]) * (w[i] - base[i]);
      if (std::sqrt(nw) > bound_ * std::sqrt(nv) * (1.0 + 1e-12)) {
        throw NotContraction("declared Lipschitz constant violated by a sampled pair");
      }
    }
  }

  AffineMap map_;
  ExactScalar bound_exact_ = 0;
  double bound_ = 0.0;
  BoundKind kind_ = BoundKind::certified;
  int label_ = 0;
};

class IfsSystem {
 public:
  IfsSystem(std::string name, std::size_t dimension, std::vector<AffineContraction> maps,
            Metric metric = {})
      : name_(std::move(name)), dim_(dimension), maps_(std::move(maps)), metric_(metric) {
    if (dim_ == 0) throw DimensionMismatch("dimension must be positive");
    if (maps_.empty()) throw ShapeMismatch("an IFS needs at least one map");
    for (std::size_t i = 0; i < maps_.size(); ++i) {
      if (maps_[i].dimension() != dim_) throw DimensionMismatch("map dimension differs from system");
      maps_[i].label_ = static_cast<int>(i + 1);
      c_exact_ = std::max(c_exact_, maps_[i].lipschitz_bound_exact());
    }
    if (metric_.kind == Metric::Kind::product_max && (metric_.split == 0 || metric_.split >= dim_)) {
      throw DimensionMismatch("product metric split out of range");
    }
  }

  const std::string& name() const { return name_; }
  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return maps_.size(); }
  const std::vector<AffineContraction>& maps() const { return maps_; }
  // Map by 1-based label.
  const AffineContraction& map(int label) const { return maps_.at(static_cast<std::size_t>(label - 1)); }
  double contraction_factor() const { return round_up(c_exact_); }
  const ExactScalar& contraction_factor_exact() const { return c_exact_; }
  const Metric& metric() const { return metric_; }

  bool certified() const {
    for (const auto& g : maps_)
      if (g.bound_kind() != BoundKind::certified) return false;
    return true;
  }

  ExactPoint anchor() const { return maps_.front().fixed_point(); }

 private:
  std::string name_;
  std::size_t dim_;
  std::vector<AffineContraction> maps_;
  ExactScalar c_exact_ = 0;
  Metric metric_;
};

// Union of the images under every map, maps in label order, exact duplicates
// dropped (first occurrence kept).
inline PointCloud hutchinson_apply(const IfsSystem& sys, const PointCloud& k) {
  if (k.dimension() != sys.dimension()) throw DimensionMismatch("cloud/system dimension");
  const std::size_t n = sys.dimension();
  std::vector<double> flat;
  flat.reserve(k.size() * sys.size() * n);
  std::vector<double> y(n);
  struct Hash {
    const std::vector<double>* data;
    std::size_t n;
    std::size_t operator()(std::size_t i) const {
      std::size_t h = 1469598103934665603ull;
      for (std::size_t j = 0; j < n; ++j) {
        std::uint64_t bits;
        std::memcpy(&bits, data->data() + i * n + j, sizeof bits);
        h = (h ^ bits) * 1099511628211ull;
      }
      return h;
    }
  };
  struct Eq {
    const std::vector<double>* data;
    std::size_t n;
    bool operator()(std::size_t a, std::size_t b) const {
      for (std::size_t j = 0; j < n; ++j)
        if ((*data)[a * n + j] != (*data)[b * n + j]) return false;
      return true;
    }
  };
  std::unordered_set<std::size_t, Hash, Eq> seen(k.size() * sys.size() * 2, Hash{&flat, n}, Eq{&flat, n});
  for (const auto& g : sys.maps()) {
    for (std::size_t i = 0; i < k.size(); ++i) {
      g.apply(k.raw(i), y.data());
      flat.insert(flat.end(), y.begin(), y.end());
      const std::size_t idx = flat.size() / n - 1;
      if (!seen.insert(idx).second) flat.resize(flat.size() - n);
    }
  }
  return PointCloud(n, std::move(flat));
}

inline std::vector<ExactPoint> hutchinson_apply(const IfsSystem& sys, std::span<const ExactPoint> k) {
  std::vector<ExactPoint> out;
  out.reserve(k.size() * sys.size());
  std::unordered_set<ExactPoint, ExactPointHash> seen;
  seen.reserve(k.size() * sys.size() * 2);
  for (const auto& g : sys.maps()) {
    for (const auto& p : k) {
      if (p.size() != sys.dimension()) throw DimensionMismatch("point/system dimension");
      ExactPoint q = g(p);
      if (seen.insert(q).second) out.push_back(std::move(q));
    }
  }
  return out;
}

// Finite cloud with a proven bound epsilon >= d_H(cloud, attractor).
struct CertifiedCloud {
  PointCloud cloud;
  double epsilon = std::numeric_limits<double>::infinity();
  std::vector<ExactPoint> exact_members;
  Metric metric;
};

namespace detail {

struct CellKeyHash {
  std::size_t operator()(const std::vector<std::int64_t>& k) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (auto v : k) h = (h ^ static_cast<std::uint64_t>(v)) * 1099511628211ull;
    return h;
  }
};

// One pruned Hutchinson step. Cells are floor(y / delta) of the double
// image; exact images are formed only for the first image in each cell.
// `slack` receives a per-coordinate bound on how far an exact image can sit
// outside the cell its double image was filed under.
inline std::vector<ExactPoint> pruned_step(const IfsSystem& sys, const std::vector<ExactPoint>& k, double delta,
                                           double& slack) {
  const std::size_t n = sys.dimension();
  std::vector<double> xd(k.size() * n);
  double r = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      xd[i * n + j] = to_double(k[i][j]);
      r = std::max(r, std::abs(xd[i * n + j]));
    }
  }
  double bmax = 0.0;
  for (const auto& g : sys.maps())
    for (double t : g.map().translation_doubles()) bmax = std::max(bmax, std::abs(t));

  std::unordered_set<std::vector<std::int64_t>, CellKeyHash> cells;
  cells.reserve(k.size() * sys.size() * 2);
  std::vector<std::pair<std::size_t, std::size_t>> picks;  // (map, point)
  std::vector<double> y(n);
  std::vector<std::int64_t> key(n);
  for (std::size_t gi = 0; gi < sys.size(); ++gi) {
    for (std::size_t i = 0; i < k.size(); ++i) {
      sys.maps()[gi].apply(&xd[i * n], y.data());
      for (std::size_t j = 0; j < n; ++j) {
        key[j] = static_cast<std::int64_t>(std::floor(y[j] / delta));
        r = std::max(r, std::abs(y[j]));
      }
      if (cells.insert(key).second) picks.emplace_back(gi, i);
    }
  }
  // Generous bound on input conversion, evaluation and division rounding.
  const double nn = static_cast<double>(n + 1);
  slack = std::max(slack, std::ldexp(nn * nn * (r + bmax + delta + 1.0), -48));

  std::vector<ExactPoint> out(picks.size());
  parallel_for(picks.size(), [&](std::size_t t) { out[t] = sys.maps()[picks[t].first](k[picks[t].second]); });
  return out;
}

inline ExactScalar anchor_offset(const IfsSystem& sys, const ExactPoint& anchor) {
  ExactScalar d0 = 0;
  for (const auto& g : sys.maps()) d0 = std::max(d0, sys.metric().distance_upper_exact(anchor, g(anchor)));
  return d0;
}

}  // namespace detail

// Gamma^k({x1*}) computed exactly (exact_members adds every map's fixed point), optionally grid-pruned after each step,
// with epsilon = c^k d_H(K0, Gamma(K0)) / (1 - c) + cell / (1 - c).
inline CertifiedCloud attractor_deterministic(const IfsSystem& sys, int depth, double grid = 0.0,
                                              bool require_certified = true) {
  if (depth < 0) throw BadParams("depth must be >= 0");
  if (grid < 0) throw BadParams("grid must be >= 0");
  const bool certified = sys.certified();
  if (require_certified && !certified) {
    throw UncertifiedBound("system '" + sys.name() + "' has declared Lipschitz bounds");
  }
  const ExactPoint anchor = sys.anchor();
  std::vector<ExactPoint> k{anchor};
  double slack = 0.0;
  for (int step = 0; step < depth; ++step) {
    k = grid > 0 ? detail::pruned_step(sys, k, grid, slack) : hutchinson_apply(sys, std::span<const ExactPoint>(k));
  }
  CertifiedCloud out;
  out.metric = sys.metric();
  out.cloud = PointCloud::from_exact(k);
  if (certified) {
    const ExactScalar& c = sys.contraction_factor_exact();
    const ExactScalar d0 = detail::anchor_offset(sys, anchor);
    const ExactScalar cell(sys.metric().cell_diameter(grid > 0 ? grid + 2 * slack : 0.0, sys.dimension()));
    ExactScalar ck = 1;
    for (int i = 0; i < depth; ++i) ck *= c;
    out.epsilon = round_up((ck * d0 + cell) / (1 - c));
  }
  // Fixed points of the other maps are attractor points too.
  std::unordered_set<ExactPoint, ExactPointHash> seen(k.begin(), k.end());
  out.exact_members = std::move(k);
  for (const auto& g : sys.maps()) {
    if (seen.insert(g.fixed_point()).second) out.exact_members.push_back(g.fixed_point());
  }
  return out;
}

// Random orbit from the fixed point of map 1; labels drawn as rng.below(N).
inline PointCloud chaos_game(const IfsSystem& sys, std::uint64_t seed, std::size_t n_points,
                             std::size_t burn_in) {
  if (n_points == 0) throw BadParams("n_points must be >= 1");
  const std::size_t n = sys.dimension();
  SplitMix64 rng(seed);
  std::vector<double> x = sys.anchor().to_doubles(), y(n);
  PointCloud out(n);
  out.reserve(n_points);
  for (std::size_t it = 0; it < burn_in + n_points; ++it) {
    sys.maps()[rng.below(sys.size())].apply(x.data(), y.data());
    std::swap(x, y);
    if (it >= burn_in) out.push_back(x);
  }
  return out;
}

struct InvarianceResult {
  bool holds = false;
  double deficit = 0.0;
};

// deficit = sup_{x in K} dist(x, Gamma(K)).
inline InvarianceResult backward_invariance_check(const PointCloud& k, const IfsSystem& sys, double tol) {
  const PointCloud image = hutchinson_apply(sys, k);
  const double deficit = directed_hausdorff(k, image, sys.metric());
  return {deficit <= tol, deficit};
}

// Exact variant; the deficit is an upper bound rounded outward.
inline InvarianceResult backward_invariance_check(std::span<const ExactPoint> k, const IfsSystem& sys,
                                                  double tol) {
  if (k.empty()) throw EmptyCloud("backward invariance of an empty set");
  const auto image = hutchinson_apply(sys, k);
  const std::unordered_set<ExactPoint, ExactPointHash> members(image.begin(), image.end());
  double deficit = 0.0;
  for (const auto& x : k) {
    if (members.count(x)) continue;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : image) best = std::min(best, sys.metric().distance_upper(x, y));
    deficit = std::max(deficit, best);
  }
  return {deficit <= tol, deficit};
}

// 2 max_gamma d(x1*, gamma(x1*)) / (1 - c): the attractor lies in the ball of
// half this radius about x1*.
inline double diameter_upper_bound(const IfsSystem& sys) {
  if (!sys.certified()) throw UncertifiedBound("diameter bound needs certified Lipschitz bounds");
  const ExactScalar d0 = detail::anchor_offset(sys, sys.anchor());
  const ExactScalar& c = sys.contraction_factor_exact();
  return round_up(2 * d0 / (1 - c));
}

// For a 1-D system whose attractor is an interval, returns it exactly;
// otherwise nullopt. The hull endpoints are attained at fixed points of words
// of length <= 2 or single-map images of those, so the candidate set below
// contains both; the attractor is the hull iff the images of the hull cover it.
inline std::optional<std::pair<ExactScalar, ExactScalar>> interval_attractor(const IfsSystem& sys) {
  if (sys.dimension() != 1) throw NotOneDimensional("interval_attractor needs a 1-D system");
  std::vector<ExactScalar> candidates;
  for (const auto& g : sys.maps()) {
    candidates.push_back(g.fixed_point()[0]);
    for (const auto& h : sys.maps()) {
      const AffineMap gh = g.map().after(h.map());
      candidates.push_back(affine_fixed_point(gh.linear(), gh.translation())[0]);
    }
  }
  const std::size_t base = candidates.size();
  for (std::size_t i = 0; i < base; ++i) {
    for (const auto& g : sys.maps()) candidates.push_back(g(ExactPoint{candidates[i]})[0]);
  }
  const ExactScalar lo = *std::min_element(candidates.begin(), candidates.end());
  const ExactScalar hi = *std::max_element(candidates.begin(), candidates.end());
  if (lo == hi) return std::make_pair(lo, hi);
  std::vector<std::pair<ExactScalar, ExactScalar>> images;
  for (const auto& g : sys.maps()) {
    ExactScalar a = g(ExactPoint{lo})[0], b = g(ExactPoint{hi})[0];
    if (b < a) std::swap(a, b);
    images.emplace_back(a, b);
  }
  std::sort(images.begin(), images.end());
  ExactScalar reach = lo;
  for (const auto& [a, b] : images) {
    if (a > reach) return std::nullopt;
    reach = std::max(reach, b);
  }
  if (reach < hi) return std::nullopt;
  return std::make_pair(lo, hi);
}

}  // namespace ifsmorph
