#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <cstddef>
#include <span>
#include <vector>

#include "ifsmorph/error.hpp"
#include "ifsmorph/exact.hpp"
#include "ifsmorph/parallel.hpp"

namespace ifsmorph {

// Metric tag. `euclidean` is the base metric on R^n; `product_max` is d_inf
// over two Euclidean blocks R^split x R^(n - split).
struct Metric {
  enum class Kind { euclidean, product_max };
  Kind kind = Kind::euclidean;
  std::size_t split = 0;

  static Metric euclidean() { return {}; }
  static Metric product(std::size_t split) { return {Kind::product_max, split}; }

  // Monotone surrogate of the distance: squared Euclidean, or the max of the
  // two squared block distances. distance = sqrt(surrogate).
  double surrogate(const double* a, const double* b, std::size_t n) const {
    if (kind == Kind::euclidean) {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
      }
      return s;
    }
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < split; ++i) {
      const double d = a[i] - b[i];
      sx += d * d;
    }
    for (std::size_t i = split; i < n; ++i) {
      const double d = a[i] - b[i];
      sy += d * d;
    }
    return std::max(sx, sy);
  }

  double distance(std::span<const double> a, std::span<const double> b) const {
    return std::sqrt(surrogate(a.data(), b.data(), a.size()));
  }

  // Rational upper bound on the distance between exact points.
  ExactScalar distance_upper_exact(const ExactPoint& a, const ExactPoint& b) const {
    if (kind == Kind::euclidean) return ifsmorph::distance_upper_exact(a, b);
    const std::size_t n = a.size();
    return std::max(ifsmorph::distance_upper_exact(a.slice(0, split), b.slice(0, split)),
                    ifsmorph::distance_upper_exact(a.slice(split, n - split), b.slice(split, n - split)));
  }

  // Upper bound on the distance between exact points.
  double distance_upper(const ExactPoint& a, const ExactPoint& b) const {
    if (kind == Kind::euclidean) return ifsmorph::distance_upper(a, b);
    const std::size_t n = a.size();
    return std::max(ifsmorph::distance_upper(a.slice(0, split), b.slice(0, split)),
                    ifsmorph::distance_upper(a.slice(split, n - split), b.slice(split, n - split)));
  }

  // Diameter of a grid cell [k*delta, (k+1)*delta)^n, rounded up.
  double cell_diameter(double delta, std::size_t n) const {
    if (delta <= 0) return 0.0;
    const ExactScalar d(delta);
    if (kind == Kind::euclidean) return sqrt_up(d * d * static_cast<long>(n));
    const std::size_t big = std::max(split, n - split);
    return sqrt_up(d * d * static_cast<long>(big));
  }

  friend bool operator==(const Metric&, const Metric&) = default;
};

// Finite point set in R^n, stored flat.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::size_t dimension) : dim_(dimension) {}
  PointCloud(std::size_t dimension, std::vector<double> flat) : dim_(dimension), data_(std::move(flat)) {
    if (dim_ == 0 || data_.size() % dim_ != 0) throw DimensionMismatch("flat data not a multiple of dimension");
  }
  PointCloud(std::size_t dimension, std::initializer_list<std::initializer_list<double>> pts)
      : dim_(dimension) {
    for (const auto& p : pts) push_back(std::vector<double>(p));
  }

  static PointCloud from_exact(std::span<const ExactPoint> pts) {
    if (pts.empty()) throw EmptyCloud("no points");
    PointCloud c(pts.front().size());
    c.data_.reserve(pts.size() * c.dim_);
    for (const auto& p : pts) c.push_back(p.to_doubles());
    return c;
  }

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return dim_ ? data_.size() / dim_ : 0; }
  bool empty() const { return data_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  const double* raw(std::size_t i) const { return data_.data() + i * dim_; }
  const std::vector<double>& flat() const { return data_; }

  void push_back(std::span<const double> p) {
    if (p.size() != dim_) throw DimensionMismatch("point has wrong dimension");
    data_.insert(data_.end(), p.begin(), p.end());
  }
  void reserve(std::size_t n) { data_.reserve(n * dim_); }

  // Coordinates [first, first + count) of every point.
  PointCloud project(std::size_t first, std::size_t count) const {
    PointCloud out(count);
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i].subspan(first, count));
    return out;
  }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

// sup_{a in A} inf_{b in B} d(a, b), brute force with the early-exit rule:
// a point whose running minimum already falls below the current sup cannot
// raise it.
inline double directed_hausdorff(const PointCloud& a, const PointCloud& b,
                                 const Metric& metric = {}) {
  if (a.empty() || b.empty()) throw EmptyCloud("hausdorff distance of an empty cloud");
  if (a.dimension() != b.dimension()) throw DimensionMismatch("cloud dimensions differ");
  const std::size_t n = a.dimension();
  const std::size_t na = a.size(), nb = b.size();
  constexpr std::size_t kBlock = 1024;
  const std::size_t blocks = (na + kBlock - 1) / kBlock;
  std::vector<double> block_max(blocks, 0.0);
  detail::parallel_for(blocks, [&](std::size_t blk) {
    double cmax = 0.0;
    const std::size_t hi = std::min(na, (blk + 1) * kBlock);
    for (std::size_t i = blk * kBlock; i < hi; ++i) {
      const double* p = a.raw(i);
      double cmin = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < nb; ++j) {
        const double s = metric.surrogate(p, b.raw(j), n);
        if (s < cmin) {
          cmin = s;
          if (cmin <= cmax) break;
        }
      }
      cmax = std::max(cmax, cmin);
    }
    block_max[blk] = cmax;
  });
  return std::sqrt(*std::max_element(block_max.begin(), block_max.end()));
}

inline double hausdorff_distance(const PointCloud& a, const PointCloud& b,
                                 const Metric& metric = {}) {
  return std::max(directed_hausdorff(a, b, metric), directed_hausdorff(b, a, metric));
}

// Distance from one point to a cloud.
inline double point_cloud_distance(std::span<const double> p, const PointCloud& b,
                                   const Metric& metric = {}) {
  if (b.empty()) throw EmptyCloud("distance to an empty cloud");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < b.size(); ++j) {
    best = std::min(best, metric.surrogate(p.data(), b.raw(j), p.size()));
  }
  return std::sqrt(best);
}

}  // namespace ifsmorph
