#include <catch_amalgamated.hpp>

#include <cmath>
#include <optional>

#include "support.hpp"

using namespace ifsmorph;
using testing::random_rational;

TEST_CASE("rationals parse into lowest terms") {
  CHECK(parse_rational("4/6") == rational(2, 3));
  CHECK(parse_rational("-4/6") == rational(-2, 3));
  CHECK(parse_rational("7") == 7);
  CHECK(to_string(parse_rational("10/4")) == "5/2");
  CHECK(parse_rational("0/5").get_den() == 1);
}

TEST_CASE("malformed rationals are rejected") {
  CHECK_THROWS_AS(parse_rational("2/0"), ParseError);
  CHECK_THROWS_AS(parse_rational("1.5"), ParseError);
  CHECK_THROWS_AS(parse_rational("1/-2"), ParseError);
  CHECK_THROWS_AS(parse_rational(""), ParseError);
  CHECK_THROWS_AS(parse_rational("+3"), ParseError);
}

TEST_CASE("outward rounding brackets the exact value") {
  SplitMix64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const ExactScalar q = random_rational(rng, 1000000, 999983);
    CHECK(ExactScalar(round_up(q)) >= q);
    CHECK(ExactScalar(round_down(q)) <= q);
    if (q >= 0) {
      const ExactScalar s(sqrt_up(q));
      CHECK(s * s >= q);
    }
  }
  CHECK(round_up(rational(3, 4)) == 0.75);
  CHECK(round_down(rational(3, 4)) == 0.75);
  CHECK(round_up(rational(1, 3)) > round_down(rational(1, 3)));
}

TEST_CASE("rational arithmetic is exact") {
  SplitMix64 rng(12);
  for (int i = 0; i < 1000; ++i) {
    const ExactScalar a = random_rational(rng, 1L << 40, 1L << 30);
    const ExactScalar b = random_rational(rng, 1L << 40, 1L << 30);
    CHECK(ExactScalar((a + b) - b) == a);
    if (b != 0) CHECK(ExactScalar((a * b) / b) == a);
  }
}

TEST_CASE("operator norm bound on the worked matrices") {
  CHECK(operator_norm_upper(ExactMatrix{{rational(2, 3)}}) == round_up(rational(2, 3)));
  CHECK(operator_norm_upper(ExactMatrix{{rational(2, 3), 0}, {0, rational(3, 4)}}) == 0.75);
  CHECK(operator_norm_upper(ExactMatrix{{0, 1}, {0, 0}}) == 1.0);
  // The column-sum norm alone (8/7) would undercut the first row's length.
  const ExactMatrix q{{rational(-8, 21), rational(8, 7)}, {rational(-3, 29), 0}};
  CHECK(operator_norm_upper(q) >= std::hypot(8.0 / 21.0, 8.0 / 7.0));
  CHECK(operator_norm_upper_exact(ExactMatrix{{rational(3, 5), 0}, {0, rational(3, 5)}}) == rational(3, 5));
}

// Largest singular value by power iteration on Q^T Q, in long double.
static long double oracle_spectral_norm(const ExactMatrix& q) {
  const std::size_t n = q.rows();
  std::vector<long double> a(n * n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) a[r * n + c] = static_cast<long double>(to_double(q(r, c)));
  std::vector<long double> v(n, 1.0L), w(n), u(n);
  for (std::size_t i = 0; i < n; ++i) v[i] += 0.01L * static_cast<long double>(i);
  long double lambda = 0.0L;
  for (int it = 0; it < 500; ++it) {
    for (std::size_t r = 0; r < n; ++r) {
      u[r] = 0;
      for (std::size_t c = 0; c < n; ++c) u[r] += a[r * n + c] * v[c];
    }
    for (std::size_t c = 0; c < n; ++c) {
      w[c] = 0;
      for (std::size_t r = 0; r < n; ++r) w[c] += a[r * n + c] * u[r];
    }
    long double norm = 0;
    for (auto x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0) return 0;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
    lambda = norm;
  }
  return std::sqrt(lambda);
}

TEST_CASE("operator norm bound dominates power iteration on random matrices") {
  SplitMix64 rng(13);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng.below(4);
    ExactMatrix q(n, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) q(r, c) = random_rational(rng, 50, 40);
    const double bound = operator_norm_upper(q);
    INFO("matrix " << i << " of size " << n);
    CHECK(static_cast<double>(oracle_spectral_norm(q)) <= bound + 1e-9);
  }
}

TEST_CASE("affine fixed points on the interval examples") {
  CHECK(affine_fixed_point(ExactMatrix{{rational(2, 3)}}, ExactPoint{rational(1, 3)}) == ExactPoint{1});
  CHECK(affine_fixed_point(ExactMatrix{{rational(2, 3)}}, ExactPoint{0}) == ExactPoint{0});
  CHECK(affine_fixed_point(ExactMatrix{{rational(4, 9)}}, ExactPoint{rational(2, 9)}) ==
        ExactPoint{rational(2, 5)});
  CHECK_THROWS_AS(affine_fixed_point(ExactMatrix::identity(2), ExactPoint{1, 2}), SingularSystem);
}

TEST_CASE("accepted contractions reproduce their fixed points") {
  SplitMix64 rng(14);
  int accepted = 0;
  for (int i = 0; i < 300; ++i) {
    const std::size_t n = 1 + rng.below(3);
    ExactMatrix q(n, n);
    ExactPoint b(n);
    for (std::size_t r = 0; r < n; ++r) {
      b[r] = random_rational(rng, 20, 9);
      for (std::size_t c = 0; c < n; ++c) q(r, c) = random_rational(rng, 3, 11);
    }
    if (operator_norm_upper(q) >= 1) {
      CHECK_THROWS_AS(AffineContraction::make(q, b), NotContraction);
      continue;
    }
    const auto g = AffineContraction::make(q, b);
    CHECK(g(g.fixed_point()) == g.fixed_point());
    ++accepted;
  }
  CHECK(accepted > 50);
}

TEST_CASE("solve recovers a planted solution") {
  SplitMix64 rng(15);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + rng.below(4);
    ExactMatrix a(n, n);
    ExactPoint x(n);
    for (std::size_t r = 0; r < n; ++r) {
      x[r] = random_rational(rng, 30, 7);
      for (std::size_t c = 0; c < n; ++c) a(r, c) = random_rational(rng, 9, 5);
    }
    std::optional<ExactPoint> got;
    try {
      got = solve(a, a * x);
    } catch (const SingularSystem&) {
      continue;  // random singular matrix
    }
    CHECK(*got == x);
  }
}

TEST_CASE("exact points compare and print") {
  const ExactPoint p{rational(5, 9), rational(7, 16)};
  CHECK(p.to_string() == "(5/9, 7/16)");
  CHECK(ExactPoint{0, 1} < ExactPoint{0, 2});
  CHECK(concat(ExactPoint{1}, ExactPoint{2}) == ExactPoint{1, 2});
  CHECK(squared_distance(ExactPoint{0, 0}, ExactPoint{3, 4}) == 25);
  CHECK(distance_upper(ExactPoint{0, 0}, ExactPoint{3, 4}) >= 5.0);
}
