// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "ifsmorph/cli.hpp"
#include "support.hpp"

using namespace ifsmorph;
using namespace testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& fn) {
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << name << " (" << o.detail << ")"
            << std::endl;
}

int run_cli(std::vector<std::string> args, std::string& out, std::string& err) {
  args.insert(args.begin(), "ifsmorph");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream o, e;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
  out = o.str();
  err = e.str();
  return code;
}

// Sorted-line Hausdorff distance for 1-D sets.
double hausdorff_1d(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  auto directed = [](const std::vector<double>& p, const std::vector<double>& q) {
    double worst = 0.0;
    for (double x : p) {
      const auto it = std::lower_bound(q.begin(), q.end(), x);
      double best = std::numeric_limits<double>::infinity();
      if (it != q.end()) best = *it - x;
      if (it != q.begin()) best = std::min(best, x - *std::prev(it));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

std::vector<double> column(const PointCloud& c, std::size_t j) {
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i][j];
  return out;
}

const ExactPoint P00{0, 0}, P11{1, 1}, P4{rational(4, 9), rational(9, 16)}, P5{rational(5, 9), rational(7, 16)};

Outcome criterion1() {
  const auto t0 = Clock::now();
  const auto fs = fibre(interval_gamma(), interval_lambda(), AlphaMap({1, 2}, 2));
  const auto pts = exact_fibred_points(fs, 2);
  const std::set<ExactPoint> have(pts.begin(), pts.end());
  const double secs = seconds_since(t0);
  bool ok = true;
  for (const auto& p : {P00, P11, P4, P5}) ok = ok && have.count(p) == 1;
  const auto& g1 = fs.product.map(1);
  const auto& g2 = fs.product.map(2);
  ok = ok && g1(P00) == P00 && g2(P11) == P11 && g2(g2(P00)) == P5 && g1(g1(P11)) == P4;
  ok = ok && secs < 1.0;
  return {ok, std::to_string(pts.size()) + " exact points, " + std::to_string(secs) + " s"};
}

Outcome criterion2() {
  const auto report_path = std::filesystem::temp_directory_path() / "ifsmorph_acceptance_search.json";
  const auto t0 = Clock::now();
  std::string out, err;
  const int code = run_cli({"search", system_path("interval_gamma.json"), system_path("interval_lambda.json"), "--mode",
                            "conjugacies", "--depth", "14", "--depth-cap", "14", "--out", report_path.string()},
                           out, err);
  const double secs = seconds_since(t0);
  const auto r = io::parse_report(io::read_file(report_path.string()));
  std::filesystem::remove(report_path);
  const bool ok = code == 0 && out == "conjugacy_refuted=true certified=true alphas=2\n" && r.entries.size() == 2 &&
                  r.summary.conjugacy_refuted && r.summary.all_refutations_certified && audit_report(r).empty() &&
                  secs < 30.0;
  std::string line = out;
  if (!line.empty() && line.back() == '\n') line.pop_back();
  return {ok, "'" + line + "' in " + std::to_string(secs) + " s"};
}

Outcome criterion3() {
  const auto pgm = std::filesystem::temp_directory_path() / "ifsmorph_acceptance_fig.pgm";
  std::string out, err;
  const int code = run_cli({"fibred-graph", system_path("interval_gamma.json"), system_path("interval_lambda.json"), "--alpha",
                            "1,2", "--depth", "14", "--render", pgm.string(), "--px", "400x400"},
                           out, err);
  std::ifstream in(pgm, std::ios::binary);
  const auto img = io::read_pgm(in);
  in.close();
  std::filesystem::remove(pgm);
  if (code != 0 || img.width != 400 || img.height != 400) return {false, "render failed"};
  // Labelled points of the figure on the unit square, origin bottom-left.
  int hits = 0;
  for (const auto& p : {P00, P11, P4, P5}) {
    const long col = std::lround(to_double(p[0]) * 399), row = 399 - std::lround(to_double(p[1]) * 399);
    bool hit = false;
    for (long dr = -1; dr <= 1; ++dr)
      for (long dc = -1; dc <= 1; ++dc) {
        const long r = row + dr, c = col + dc;
        if (r >= 0 && c >= 0 && r < 400 && c < 400 && img.at(static_cast<std::size_t>(c), static_cast<std::size_t>(r)) == 0)
          hit = true;
      }
    hits += hit;
  }
  return {hits == 4, std::to_string(hits) + "/4 labelled points covered"};
}

Outcome criterion4() {
  SplitMix64 rng(2024);
  double worst = -std::numeric_limits<double>::infinity();
  int bad = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t dim = 1 + rng.below(2);
    const auto sys = random_system(rng, dim);
    const auto k1 = random_cloud(rng, dim, 30, 2.0), k2 = random_cloud(rng, dim, 30, 2.0);
    const double lhs = oracle_hausdorff(hutchinson_apply(sys, k1), hutchinson_apply(sys, k2));
    const double rhs = sys.contraction_factor() * oracle_hausdorff(k1, k2) + 1e-9;
    worst = std::max(worst, lhs - rhs);
    bad += lhs > rhs;
  }
  std::ostringstream detail;
  detail << "200 systems, largest lhs - rhs " << worst;
  return {bad == 0, detail.str()};
}

Outcome criterion5() {
  std::vector<double> grid;
  for (int i = 0; i <= 10000; ++i) grid.push_back(i * 1e-4);
  int bad = 0;
  double tightest = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 14; ++k) {
    const auto a = attractor_deterministic(halves(), k);
    const double d = hausdorff_1d(column(a.cloud, 0), grid);
    const double bound = a.epsilon + 2e-4;
    bad += d > bound;
    tightest = std::min(tightest, bound - d);
  }
  return {bad == 0, "k=1..14, smallest margin " + std::to_string(tightest)};
}

Outcome criterion6() {
  const auto base = interval_gamma();
  const auto prod = product_system(base);
  const AffineMap f(ExactMatrix{{1, 0}}, ExactPoint{0});
  const IfsSystem image = image_system(base, AlphaMap({1, 1, 2, 2}, 2));
  SplitMix64 rng(6);
  int bad = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<ExactPoint> k;
    for (std::size_t i = 0, n = 1 + rng.below(20); i < n; ++i)
      k.push_back(ExactPoint{random_rational(rng, 50, 17), random_rational(rng, 50, 17)});
    std::set<ExactPoint> lhs, fk;
    for (const auto& p : hutchinson_apply(prod, std::span<const ExactPoint>(k))) lhs.insert(f(p));
    for (const auto& p : k) fk.insert(f(p));
    const std::vector<ExactPoint> fkv(fk.begin(), fk.end());
    const auto rhs_v = hutchinson_apply(image, std::span<const ExactPoint>(fkv));
    bad += lhs != std::set<ExactPoint>(rhs_v.begin(), rhs_v.end());
  }
  return {bad == 0, "100 clouds, " + std::to_string(bad) + " mismatches"};
}

Outcome criterion7() {
  const ExactScalar r = rational(1351, 780);
  const auto target = gasket(r);
  const auto src = attractor_deterministic(halves(), 10);
  const auto tgt = attractor_deterministic(target, 8);
  const AffineMap f(ExactMatrix{{rational(1, 2)}, {r / 2}}, ExactPoint{0, 0});
  PointCloud image(2);
  for (const auto& p : src.exact_members) image.push_back(f(p).to_doubles());
  double worst = 0.0;
  for (std::size_t i = 0; i < image.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < tgt.cloud.size(); ++j)
      best = std::min(best, std::hypot(image[i][0] - tgt.cloud[j][0], image[i][1] - tgt.cloud[j][1]));
    worst = std::max(worst, best);
  }
  const double bound = src.epsilon + tgt.epsilon + 5e-3;
  return {worst <= bound, "max distance " + std::to_string(worst) + " <= " + std::to_string(bound)};
}

Outcome criterion8() {
  const auto src = attractor_deterministic(interval_gamma(), 14);
  bool ok = true;
  std::string detail;
  for (const auto& alpha : enumerate_alphas(2, 2, AlphaEnumeration::bijections)) {
    const auto d = fibred_attractor(fibre(interval_gamma(), interval_lambda(), alpha), 14);
    const double dist = hausdorff_1d(column(d.cloud, 0), column(src.cloud, 0));
    ok = ok && dist <= d.epsilon + src.epsilon;
    detail += (detail.empty() ? "" : ", ") + alpha.to_string() + ": " + std::to_string(dist);
  }
  return {ok, detail};
}

Outcome criterion9() {
  SplitMix64 rng(9);
  const std::vector<IfsSystem> systems{interval_gamma(), halves(), cantor(), gasket(rational(1351, 780))};
  int bad = 0;
  for (int t = 0; t < 500; ++t) {
    const auto& sys = systems[rng.below(systems.size())];
    const std::size_t n = sys.size();
    const auto letters = random_letters(rng, n, 1 + rng.below(8));
    const Word w(letters, n, rng.below(letters.size()));
    const int i = 1 + static_cast<int>(rng.below(n));
    bad += !(code_map_eval(sys, w.prepend(i)).point == sys.map(i)(code_map_eval(sys, w).point));
  }
  const auto omega = code_space_system(2);
  const auto g = interval_gamma();
  const auto d = fibred_attractor(fibre(omega, g, AlphaMap::identity(2)), 14);
  int off = 0;
  for (int t = 0; t < 20; ++t) {
    const auto letters = random_letters(rng, 2, 1 + rng.below(6));
    const Word w(letters, 2, rng.below(letters.size()));
    const double x = to_double(code_map_eval(omega, w).point[0]);
    const auto v = tabulate_function(d, std::vector<double>{x}, 1, 4 * d.epsilon);
    off += std::abs(v.y[0] - to_double(code_map_eval(g, w).point[0])) > 2 * d.epsilon;
  }
  return {bad == 0 && off == 0,
          "500 words, " + std::to_string(bad) + " shift failures; 20 tabulations, " + std::to_string(off) + " off"};
}

Outcome criterion10() {
  SplitMix64 rng(10);
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.below(5), m = 1 + rng.below(5);
    const AlphaMap alpha(random_letters(rng, m, n), m);
    const auto letters = random_letters(rng, n, 1 + rng.below(12));
    const Word v = rng.below(2) ? Word(letters, n) : Word(letters, n, rng.below(letters.size()));
    const int i = 1 + static_cast<int>(rng.below(n));
    bad += !(lift_to_code_space(alpha, v.prepend(i)) == lift_to_code_space(alpha, v).prepend(alpha(i)));
  }
  return {bad == 0, "1000 pairs, " + std::to_string(bad) + " failures"};
}

}  // namespace

int main() {
  report(1, "exact points of the interval fibring", criterion1);
  report(2, "conjugacy refutation for the interval systems", criterion2);
  report(3, "rendered fibred attractor covers the labelled points", criterion3);
  report(4, "Hutchinson operator contracts by c", criterion4);
  report(5, "certificate soundness on [0,1]", criterion5);
  report(6, "product projection intertwines Hutchinson operators", criterion6);
  report(7, "edge embedding lands near the gasket", criterion7);
  report(8, "projection of the fibred attractor onto the source", criterion8);
  report(9, "code map shift identity and code-space tabulation", criterion9);
  report(10, "lift intertwines the shift", criterion10);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
