#pragma once

// Morphisms (f, alpha) between systems: f intertwines each gamma with
// alpha(gamma). Also the code space machinery: words, the code map and the
// letterwise lift of alpha to code spaces.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ifsmorph/cloud.hpp"
#include "ifsmorph/error.hpp"
#include "ifsmorph/exact.hpp"
#include "ifsmorph/ifs.hpp"

namespace ifsmorph {

// alpha : Gamma -> Lambda as a table; table[i-1] is the label of alpha(gamma_i).
class AlphaMap {
 public:
  AlphaMap(std::vector<int> table, std::size_t codomain_size)
      : table_(std::move(table)), codomain_(codomain_size) {
    if (table_.empty()) throw ShapeMismatch("alpha table is empty");
    for (int v : table_) {
      if (v < 1 || static_cast<std::size_t>(v) > codomain_) {
        throw ShapeMismatch("alpha entry " + std::to_string(v) + " outside 1.." +
                            std::to_string(codomain_));
      }
    }
  }

  static AlphaMap identity(std::size_t n) {
    std::vector<int> t(n);
    std::iota(t.begin(), t.end(), 1);
    return AlphaMap(std::move(t), n);
  }

  std::size_t domain_size() const { return table_.size(); }
  std::size_t codomain_size() const { return codomain_; }
  const std::vector<int>& table() const { return table_; }
  int operator()(int label) const { return table_.at(static_cast<std::size_t>(label - 1)); }

  bool is_bijection() const {
    if (table_.size() != codomain_) return false;
    return std::set<int>(table_.begin(), table_.end()).size() == table_.size();
  }

  // Requires a bijection.
  AlphaMap inverse() const {
    if (!is_bijection()) throw ShapeMismatch("only a bijective alpha has an inverse");
    std::vector<int> inv(table_.size());
    for (std::size_t i = 0; i < table_.size(); ++i) inv[table_[i] - 1] = static_cast<int>(i + 1);
    return AlphaMap(std::move(inv), table_.size());
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < table_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(table_[i]);
    }
    return s;
  }

  friend bool operator==(const AlphaMap&, const AlphaMap&) = default;

 private:
  std::vector<int> table_;
  std::size_t codomain_;
};

struct AlphaClass {
  bool injective = false;
  bool surjective = false;
};

inline AlphaClass classify_alpha(const AlphaMap& alpha) {
  const std::set<int> image(alpha.table().begin(), alpha.table().end());
  return {image.size() == alpha.domain_size(), image.size() == alpha.codomain_size()};
}

// The system (Y, alpha(Gamma)): map i is alpha(gamma_i).
inline IfsSystem image_system(const IfsSystem& target, const AlphaMap& alpha) {
  if (alpha.codomain_size() != target.size()) throw ShapeMismatch("alpha codomain differs from target");
  std::vector<AffineContraction> maps;
  for (int v : alpha.table()) maps.push_back(target.map(v));
  return IfsSystem(target.name() + "[alpha]", target.dimension(), std::move(maps), target.metric());
}

// f given by its graph: a certified cloud on X x Y split after `split`
// coordinates, evaluated at the nearest-in-x sample within `radius`.
struct TabulatedGraph {
  CertifiedCloud graph;
  std::size_t split = 0;
  double radius = 0.0;

  std::vector<double> eval(std::span<const double> x) const {
    const auto& c = graph.cloud;
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      double s = 0;
      for (std::size_t j = 0; j < split; ++j) {
        const double d = c.raw(i)[j] - x[j];
        s += d * d;
      }
      if (s < best) {
        best = s;
        arg = i;
      }
    }
    if (!(std::sqrt(best) <= radius)) {
      throw FNotEvaluable("no tabulated sample within " + std::to_string(radius) + " of the query");
    }
    const auto p = c[arg];
    return {p.begin() + static_cast<std::ptrdiff_t>(split), p.end()};
  }
};

struct MorphismSpec {
  std::variant<AffineMap, TabulatedGraph> f;
  AlphaMap alpha;
  IfsSystem source;
  IfsSystem target;

  MorphismSpec(std::variant<AffineMap, TabulatedGraph> f_, AlphaMap alpha_, IfsSystem source_,
               IfsSystem target_)
      : f(std::move(f_)), alpha(std::move(alpha_)), source(std::move(source_)), target(std::move(target_)) {
    if (alpha.domain_size() != source.size() || alpha.codomain_size() != target.size()) {
      throw ShapeMismatch("alpha table does not match the systems");
    }
    if (const auto* a = std::get_if<AffineMap>(&f)) {
      if (a->in_dim() != source.dimension() || a->out_dim() != target.dimension()) {
        throw DimensionMismatch("affine f does not map source space to target space");
      }
    } else {
      const auto& t = std::get<TabulatedGraph>(f);
      if (t.split != source.dimension() ||
          t.graph.cloud.dimension() != source.dimension() + target.dimension()) {
        throw DimensionMismatch("tabulated graph does not live on source x target");
      }
    }
  }

  static MorphismSpec identity(const IfsSystem& sys) {
    return MorphismSpec(AffineMap::identity(sys.dimension()), AlphaMap::identity(sys.size()), sys, sys);
  }

  bool is_affine() const { return std::holds_alternative<AffineMap>(f); }
};

struct MorphismCheck {
  double max_defect = 0.0;
  bool ok = false;
};

// max over gamma, x of d(f(gamma(x)), alpha(gamma)(f(x))). Affine f is
// checked in exact arithmetic (double samples are exact rationals).
inline MorphismCheck verify_morphism(const MorphismSpec& m, const PointCloud& samples, double tol = 1e-9) {
  if (samples.dimension() != m.source.dimension()) throw DimensionMismatch("samples live in the wrong space");
  double defect = 0.0;
  if (const auto* f = std::get_if<AffineMap>(&m.f)) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const ExactPoint x = ExactPoint::from_doubles(samples[i]);
      const ExactPoint fx = (*f)(x);
      for (const auto& g : m.source.maps()) {
        const ExactPoint lhs = (*f)(g(x));
        const ExactPoint rhs = m.target.map(m.alpha(g.label()))(fx);
        if (!(lhs == rhs)) defect = std::max(defect, distance_upper(lhs, rhs));
      }
    }
  } else {
    const auto& t = std::get<TabulatedGraph>(m.f);
    std::vector<double> gx(m.source.dimension()), rhs(m.target.dimension());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto fx = t.eval(samples[i]);
      for (const auto& g : m.source.maps()) {
        g.apply(samples.raw(i), gx.data());
        const auto lhs = t.eval(gx);
        m.target.map(m.alpha(g.label())).apply(fx.data(), rhs.data());
        defect = std::max(defect, Metric{}.distance(lhs, rhs));
      }
    }
  }
  return {defect, defect <= tol};
}

namespace detail {
inline bool same_maps(const IfsSystem& a, const IfsSystem& b) {
  if (a.dimension() != b.dimension() || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a.maps()[i].map() == b.maps()[i].map())) return false;
  return true;
}
}  // namespace detail

// (f2, alpha2) o (f1, alpha1) = (f2 o f1, alpha2 o alpha1).
inline MorphismSpec compose(const MorphismSpec& m2, const MorphismSpec& m1) {
  if (!m1.is_affine() || !m2.is_affine()) throw NotComposable("tabulated maps cannot be composed");
  if (!detail::same_maps(m1.target, m2.source)) throw ShapeMismatch("m1.target differs from m2.source");
  std::vector<int> table;
  for (int v : m1.alpha.table()) table.push_back(m2.alpha(v));
  const auto& f2 = std::get<AffineMap>(m2.f);
  const auto& f1 = std::get<AffineMap>(m1.f);
  return MorphismSpec(f2.after(f1), AlphaMap(std::move(table), m2.alpha.codomain_size()), m1.source,
                      m2.target);
}

// Infinite word over {1..N}: either a finite truncation of an unknown word
// (no preperiod) or eventually periodic, letters[preperiod..] repeating.
class Word {
 public:
  Word(std::vector<int> letters, std::size_t alphabet, std::optional<std::size_t> preperiod = std::nullopt)
      : letters_(std::move(letters)), alphabet_(alphabet), preperiod_(preperiod) {
    if (alphabet_ == 0) throw ShapeMismatch("alphabet must be non-empty");
    for (int v : letters_) {
      if (v < 1 || static_cast<std::size_t>(v) > alphabet_) {
        throw ShapeMismatch("letter " + std::to_string(v) + " outside alphabet");
      }
    }
    if (preperiod_ && *preperiod_ >= letters_.size()) {
      throw ShapeMismatch("periodic tail must be non-empty");
    }
  }

  static Word periodic(std::vector<int> prefix, std::vector<int> period, std::size_t alphabet) {
    const std::size_t pre = prefix.size();
    prefix.insert(prefix.end(), period.begin(), period.end());
    return Word(std::move(prefix), alphabet, pre);
  }

  const std::vector<int>& letters() const { return letters_; }
  std::size_t alphabet() const { return alphabet_; }
  std::optional<std::size_t> preperiod() const { return preperiod_; }
  bool eventually_periodic() const { return preperiod_.has_value(); }
  std::size_t period_length() const { return preperiod_ ? letters_.size() - *preperiod_ : 0; }

  // 0-based letter, nullopt past the end of a truncation.
  std::optional<int> letter(std::size_t i) const {
    if (i < letters_.size()) return letters_[i];
    if (!preperiod_) return std::nullopt;
    return letters_[*preperiod_ + (i - *preperiod_) % period_length()];
  }

  // i . w
  Word prepend(int i) const {
    std::vector<int> l{i};
    l.insert(l.end(), letters_.begin(), letters_.end());
    std::optional<std::size_t> pre;
    if (preperiod_) pre = *preperiod_ + 1;
    return Word(std::move(l), alphabet_, pre);
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < letters_.size(); ++i) {
      if (i) s += ',';
      if (preperiod_ && i == *preperiod_) s += '(';
      s += std::to_string(letters_[i]);
    }
    if (preperiod_) s += ")^";
    return s;
  }

  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::vector<int> letters_;
  std::size_t alphabet_;
  std::optional<std::size_t> preperiod_;
};

namespace detail {
// gamma_{l_first} o ... o gamma_{l_last-1}
inline AffineMap word_map(const IfsSystem& sys, const std::vector<int>& letters, std::size_t first,
                          std::size_t last) {
  AffineMap m = AffineMap::identity(sys.dimension());
  for (std::size_t i = first; i < last; ++i) m = m.after(sys.map(letters[i]).map());
  return m;
}
}  // namespace detail

struct CodePoint {
  ExactPoint point;
  double error = 0.0;  // guaranteed distance to the true code-map value
};

// Eventually periodic words give the exact limit (error 0). A truncation w of
// length k gives gamma_w(basepoint) with error c^k (diam + d(basepoint, x1*)).
inline CodePoint code_map_eval(const IfsSystem& sys, const Word& w,
                               std::optional<ExactPoint> basepoint = std::nullopt) {
  if (w.alphabet() != sys.size()) throw ShapeMismatch("word alphabet differs from the number of maps");
  if (w.eventually_periodic()) {
    const std::size_t pre = *w.preperiod();
    const AffineMap block = detail::word_map(sys, w.letters(), pre, w.letters().size());
    const ExactPoint tail = affine_fixed_point(block.linear(), block.translation());
    return {detail::word_map(sys, w.letters(), 0, pre)(tail), 0.0};
  }
  const ExactPoint anchor = sys.anchor();
  const ExactPoint b = basepoint.value_or(anchor);
  if (b.size() != sys.dimension()) throw DimensionMismatch("basepoint dimension");
  CodePoint out{detail::word_map(sys, w.letters(), 0, w.letters().size())(b),
                std::numeric_limits<double>::infinity()};
  if (sys.certified()) {
    const ExactScalar& c = sys.contraction_factor_exact();
    ExactScalar ck = 1;
    for (std::size_t i = 0; i < w.letters().size(); ++i) ck *= c;
    const ExactScalar diameter = 2 * detail::anchor_offset(sys, anchor) / (1 - c);
    const ExactScalar spread = diameter + sys.metric().distance_upper_exact(b, anchor);
    out.error = round_up(ck * spread);
  }
  return out;
}

struct DyadicInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool exact() const { return lo == hi; }
};

// d(w, v) = 2^(1 - k), k the first (1-based) disagreement. Two agreeing
// truncations of common length L give [0, 2^(1-L)]; two eventually periodic
// words are compared exactly.
inline DyadicInterval code_space_metric(const Word& w, const Word& v) {
  if (w.alphabet() != v.alphabet()) throw ShapeMismatch("words over different alphabets");
  std::size_t horizon;
  const bool both_periodic = w.eventually_periodic() && v.eventually_periodic();
  if (both_periodic) {
    horizon = std::max(*w.preperiod(), *v.preperiod()) + std::lcm(w.period_length(), v.period_length());
  } else {
    horizon = std::min(w.eventually_periodic() ? std::numeric_limits<std::size_t>::max() : w.letters().size(),
                       v.eventually_periodic() ? std::numeric_limits<std::size_t>::max() : v.letters().size());
  }
  for (std::size_t i = 0; i < horizon; ++i) {
    if (*w.letter(i) != *v.letter(i)) {
      const double d = std::ldexp(1.0, -static_cast<int>(i));
      return {d, d};
    }
  }
  if (both_periodic) return {0.0, 0.0};
  return {0.0, std::ldexp(1.0, 1 - static_cast<int>(horizon))};
}

// Letterwise h(i) = alpha(i); the eventually periodic structure is kept.
inline Word lift_to_code_space(const AlphaMap& alpha, const Word& w) {
  if (w.alphabet() != alpha.domain_size()) throw ShapeMismatch("word alphabet differs from alpha domain");
  std::vector<int> out;
  out.reserve(w.letters().size());
  for (int v : w.letters()) out.push_back(alpha(v));
  return Word(std::move(out), alpha.codomain_size(), w.preperiod());
}

// Code space Omega_N realised on the line as the attractor of
// sigma_i(x) = x / (3N) + (i - 1) / N: level-k cylinders have width (3N)^-k
// and are separated by gaps of at least twice that, so the realisation is a
// homeomorphism onto a Cantor set.
inline IfsSystem code_space_system(std::size_t n) {
  if (n == 0) throw ShapeMismatch("alphabet must be non-empty");
  std::vector<AffineContraction> maps;
  for (std::size_t i = 1; i <= n; ++i) {
    maps.push_back(AffineContraction::make(ExactMatrix{{rational(1, 3 * static_cast<long>(n))}},
                                           ExactPoint{rational(static_cast<long>(i - 1), static_cast<long>(n))}));
  }
  return IfsSystem("code-space-" + std::to_string(n), 1, std::move(maps));
}

}  // namespace ifsmorph
