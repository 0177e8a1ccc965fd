#pragma once

// Shared fixtures and independent oracles for the test binaries.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ifsmorph/ifsmorph.hpp"

namespace testing {

using namespace ifsmorph;

inline std::string system_path(const std::string& file) { return std::string(IFSMORPH_SYSTEMS_DIR) + "/" + file; }

inline AffineContraction map1d(const char* a, const char* b) {
  return AffineContraction::make(ExactMatrix{{parse_rational(a)}}, ExactPoint{parse_rational(b)});
}

inline IfsSystem system1d(std::string name, std::vector<std::pair<const char*, const char*>> maps) {
  std::vector<AffineContraction> gs;
  for (auto [a, b] : maps) gs.push_back(map1d(a, b));
  return IfsSystem(std::move(name), 1, std::move(gs));
}

inline IfsSystem interval_gamma() { return system1d("gamma", {{"2/3", "0"}, {"2/3", "1/3"}}); }
inline IfsSystem interval_lambda() { return system1d("lambda", {{"3/4", "0"}, {"3/4", "1/4"}}); }
inline IfsSystem halves() { return system1d("halves", {{"1/2", "0"}, {"1/2", "1/2"}}); }
inline IfsSystem cantor() { return system1d("cantor", {{"1/3", "0"}, {"1/3", "2/3"}}); }
inline IfsSystem single_half() { return system1d("single", {{"1/2", "0"}}); }

// Sierpinski gasket with sqrt(3) replaced by r.
inline IfsSystem gasket(const ExactScalar& r) {
  const ExactScalar h = rational(1, 2);
  auto m = [&](ExactScalar tx, ExactScalar ty) {
    return AffineContraction::make(ExactMatrix{{h, 0}, {0, h}}, ExactPoint{tx, ty});
  };
  return IfsSystem("gasket", 2, {m(0, 0), m(h, 0), m(rational(1, 4), r / 4)});
}

// Brute-force Hausdorff distance, written independently of the library.
inline double oracle_hausdorff(const PointCloud& a, const PointCloud& b) {
  auto directed = [](const PointCloud& p, const PointCloud& q) {
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < q.size(); ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < p.dimension(); ++k) s += (p[i][k] - q[j][k]) * (p[i][k] - q[j][k]);
        best = std::min(best, std::sqrt(s));
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

inline PointCloud uniform_grid_1d(double step) {
  PointCloud g(1);
  const auto n = static_cast<std::size_t>(std::llround(1.0 / step));
  for (std::size_t i = 0; i <= n; ++i) g.push_back(std::vector<double>{static_cast<double>(i) * step});
  return g;
}

inline ExactScalar random_rational(SplitMix64& rng, long num_range, long den_max) {
  const long num = static_cast<long>(rng.below(static_cast<std::uint64_t>(2 * num_range + 1))) - num_range;
  const long den = 1 + static_cast<long>(rng.below(static_cast<std::uint64_t>(den_max)));
  return rational(num, den);
}

// Random certified system: entries of size at most 9/(10 n), so the
// Frobenius bound stays below 1.
inline IfsSystem random_system(SplitMix64& rng, std::size_t dim) {
  const std::size_t maps = 1 + rng.below(3);
  std::vector<AffineContraction> gs;
  for (std::size_t m = 0; m < maps; ++m) {
    ExactMatrix q(dim, dim);
    ExactPoint b(dim);
    for (std::size_t r = 0; r < dim; ++r) {
      b[r] = random_rational(rng, 40, 20);
      for (std::size_t c = 0; c < dim; ++c) {
        const long num = static_cast<long>(rng.below(19)) - 9;
        q(r, c) = rational(num, 10 * static_cast<long>(dim));
      }
    }
    gs.push_back(AffineContraction::make(std::move(q), std::move(b)));
  }
  return IfsSystem("random", dim, std::move(gs));
}

inline PointCloud random_cloud(SplitMix64& rng, std::size_t dim, std::size_t max_points, double scale) {
  PointCloud c(dim);
  const std::size_t n = 1 + rng.below(max_points);
  std::vector<double> p(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : p) x = (2.0 * rng.uniform() - 1.0) * scale;
    c.push_back(p);
  }
  return c;
}

// Product system {g x h}, labels (i - 1) N + j for g = map i, h = map j.
inline IfsSystem product_system(const IfsSystem& a) {
  const std::size_t n = a.dimension();
  std::vector<AffineContraction> maps;
  for (const auto& g : a.maps()) {
    for (const auto& h : a.maps()) {
      ExactMatrix q(2 * n, 2 * n);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
          q(r, c) = g.linear()(r, c);
          q(n + r, n + c) = h.linear()(r, c);
        }
      }
      maps.push_back(AffineContraction::make(std::move(q), concat(g.translation(), h.translation())));
    }
  }
  return IfsSystem(a.name() + "^2", 2 * n, std::move(maps));
}

inline std::vector<int> random_letters(SplitMix64& rng, std::size_t alphabet, std::size_t len) {
  std::vector<int> w(len);
  for (auto& x : w) x = 1 + static_cast<int>(rng.below(alphabet));
  return w;
}

}  // namespace testing
