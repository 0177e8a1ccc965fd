#pragma once

// File formats: JSON system descriptions, JSON reports, CSV clouds and
// binary PGM renders.

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ifsmorph/cloud.hpp"
#include "ifsmorph/error.hpp"
#include "ifsmorph/exact.hpp"
#include "ifsmorph/fibred.hpp"
#include "ifsmorph/ifs.hpp"
#include "ifsmorph/search.hpp"

namespace ifsmorph::io {

using Json = nlohmann::ordered_json;

// ---- system files -----------------------------------------------------------

inline ExactScalar rational_field(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": expected a rational string \"p/q\"");
  return parse_rational(j.get<std::string>());
}

inline IfsSystem parse_system(const Json& j) {
  try {
    if (!j.is_object()) throw ParseError("system file must be a JSON object");
    const std::string name = j.value("name", std::string("unnamed"));
    if (!j.contains("dimension") || !j["dimension"].is_number_integer() || j["dimension"].get<long>() <= 0) {
      throw ParseError("'dimension' must be a positive integer");
    }
    const auto n = j["dimension"].get<std::size_t>();
    if (!j.contains("maps") || !j["maps"].is_array() || j["maps"].empty()) {
      throw ParseError("'maps' must be a non-empty array");
    }
    std::vector<AffineContraction> maps;
    for (std::size_t k = 0; k < j["maps"].size(); ++k) {
      const Json& m = j["maps"][k];
      const std::string where = "maps[" + std::to_string(k) + "]";
      if (!m.contains("matrix") || !m["matrix"].is_array() || m["matrix"].size() != n) {
        throw ParseError(where + ".matrix must have " + std::to_string(n) + " rows");
      }
      ExactMatrix q(n, n);
      for (std::size_t r = 0; r < n; ++r) {
        const Json& row = m["matrix"][r];
        if (!row.is_array() || row.size() != n) {
          throw ParseError(where + ".matrix row " + std::to_string(r) + " must have " + std::to_string(n) + " entries");
        }
        for (std::size_t c = 0; c < n; ++c) q(r, c) = rational_field(row[c], where + ".matrix");
      }
      if (!m.contains("translation") || !m["translation"].is_array() || m["translation"].size() != n) {
        throw ParseError(where + ".translation must have " + std::to_string(n) + " entries");
      }
      ExactPoint b(n);
      for (std::size_t i = 0; i < n; ++i) b[i] = rational_field(m["translation"][i], where + ".translation");
      std::optional<ExactScalar> declared;
      if (m.contains("lipschitz") && !m["lipschitz"].is_null()) {
        declared = rational_field(m["lipschitz"], where + ".lipschitz");
      }
      maps.push_back(AffineContraction::make(std::move(q), std::move(b), declared));
    }
    return IfsSystem(name, n, std::move(maps));
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed system file: ") + e.what());
  }
}

inline IfsSystem parse_system(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return parse_system(j);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline IfsSystem load_system(const std::string& path) { return parse_system(read_file(path)); }

inline Json system_to_json(const IfsSystem& sys) {
  Json j;
  j["name"] = sys.name();
  j["dimension"] = sys.dimension();
  j["maps"] = Json::array();
  for (const auto& g : sys.maps()) {
    Json m;
    m["matrix"] = Json::array();
    for (std::size_t r = 0; r < sys.dimension(); ++r) {
      Json row = Json::array();
      for (std::size_t c = 0; c < sys.dimension(); ++c) row.push_back(to_string(g.linear()(r, c)));
      m["matrix"].push_back(row);
    }
    m["translation"] = Json::array();
    for (const auto& t : g.translation()) m["translation"].push_back(to_string(t));
    j["maps"].push_back(m);
  }
  return j;
}

// ---- reports ----------------------------------------------------------------

inline Json point_to_json(const ExactPoint& p) {
  Json a = Json::array();
  for (const auto& q : p) a.push_back(to_string(q));
  return a;
}

inline ExactPoint point_from_json(const Json& j) {
  if (!j.is_array()) throw ParseError("exact point must be an array of rational strings");
  ExactPoint p(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) p[i] = rational_field(j[i], "witness");
  return p;
}

inline Json verdict_to_json(const GraphVerdict& v) {
  Json j;
  j["kind"] = to_string(v.kind);
  j["score"] = v.score;
  j["delta"] = v.delta;
  j["eta"] = v.eta;
  j["witness"] = Json::array();
  for (const auto& p : v.witness) j["witness"].push_back(point_to_json(p));
  return j;
}

inline GraphVerdict verdict_from_json(const Json& j) {
  GraphVerdict v;
  v.kind = verdict_kind_from_string(j.at("kind").get<std::string>());
  v.score = j.at("score").get<double>();
  v.delta = j.at("delta").get<double>();
  v.eta = j.at("eta").get<double>();
  for (const auto& p : j.at("witness")) v.witness.push_back(point_from_json(p));
  return v;
}

inline Json entry_to_json(const SearchEntry& e, bool timings) {
  Json j;
  j["alpha"] = e.alpha.table();
  j["alpha_codomain"] = e.alpha.codomain_size();
  j["depth"] = e.depth;
  j["epsilon"] = e.epsilon;
  j["verdict"] = verdict_to_json(e.verdict);
  if (e.transpose_verdict) j["transpose_verdict"] = verdict_to_json(*e.transpose_verdict);
  if (e.injectivity_verdict) j["injectivity_verdict"] = verdict_to_json(*e.injectivity_verdict);
  if (timings) j["runtime_ms"] = e.runtime_ms;
  return j;
}

inline SearchEntry entry_from_json(const Json& j) {
  SearchEntry e{AlphaMap(j.at("alpha").get<std::vector<int>>(), j.at("alpha_codomain").get<std::size_t>()),
                verdict_from_json(j.at("verdict")),
                std::nullopt,
                std::nullopt,
                j.at("depth").get<int>(),
                j.at("epsilon").get<double>(),
                j.value("runtime_ms", 0.0)};
  if (j.contains("transpose_verdict")) e.transpose_verdict = verdict_from_json(j["transpose_verdict"]);
  if (j.contains("injectivity_verdict")) e.injectivity_verdict = verdict_from_json(j["injectivity_verdict"]);
  return e;
}

template <typename T>
Json optional_to_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

inline Json params_to_json(const SearchParams& p) {
  Json j;
  j["depth"] = p.depth;
  j["depth_cap"] = p.depth_cap;
  j["grid"] = p.grid;
  j["delta"] = optional_to_json(p.delta);
  j["eta"] = optional_to_json(p.eta);
  j["max_word_len"] = p.max_word_len;
  j["seed"] = p.seed;
  return j;
}

inline SearchParams params_from_json(const Json& j) {
  SearchParams p;
  p.depth = j.at("depth").get<int>();
  p.depth_cap = j.at("depth_cap").get<int>();
  p.grid = j.at("grid").get<double>();
  if (!j.at("delta").is_null()) p.delta = j["delta"].get<double>();
  if (!j.at("eta").is_null()) p.eta = j["eta"].get<double>();
  p.max_word_len = j.at("max_word_len").get<std::size_t>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

inline Json report_to_json(const SearchReport& r, bool timings = false) {
  Json j;
  j["format"] = "ifsmorph-report/1";
  j["kind"] = "search";
  j["mode"] = to_string(r.mode);
  j["source"] = {{"name", r.source_name}, {"maps", r.source_maps}};
  j["target"] = {{"name", r.target_name}, {"maps", r.target_maps}};
  j["params"] = params_to_json(r.params);
  j["entries"] = Json::array();
  for (const auto& e : r.entries) j["entries"].push_back(entry_to_json(e, timings));
  j["summary"] = {{"any_morphism_candidate", r.summary.any_morphism_candidate},
                  {"conjugacy_refuted", r.summary.conjugacy_refuted},
                  {"all_refutations_certified", r.summary.all_refutations_certified}};
  return j;
}

inline SearchReport report_from_json(const Json& j) {
  try {
    if (j.at("kind").get<std::string>() != "search") throw ParseError("not a search report");
    SearchReport r;
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "morphisms") {
      r.mode = SearchMode::morphisms;
    } else if (mode == "conjugacies") {
      r.mode = SearchMode::conjugacies;
    } else {
      throw ParseError("unknown mode '" + mode + "'");
    }
    r.source_name = j.at("source").at("name").get<std::string>();
    r.source_maps = j.at("source").at("maps").get<std::size_t>();
    r.target_name = j.at("target").at("name").get<std::string>();
    r.target_maps = j.at("target").at("maps").get<std::size_t>();
    r.params = params_from_json(j.at("params"));
    for (const auto& e : j.at("entries")) r.entries.push_back(entry_from_json(e));
    const auto& s = j.at("summary");
    r.summary.any_morphism_candidate = s.at("any_morphism_candidate").get<bool>();
    r.summary.conjugacy_refuted = s.at("conjugacy_refuted").get<bool>();
    r.summary.all_refutations_certified = s.at("all_refutations_certified").get<bool>();
    return r;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

inline std::string serialize(const SearchReport& r, bool timings = false) {
  return report_to_json(r, timings).dump(2) + "\n";
}

inline SearchReport parse_report(const std::string& text) {
  try {
    return report_from_json(Json::parse(text));
  } catch (const Json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

// Single fibring: one entry plus the systems it came from.
struct FibredReport {
  std::string source_name;
  std::string target_name;
  SearchParams params;
  std::size_t cloud_points = 0;
  SearchEntry entry;

  friend bool operator==(const FibredReport& a, const FibredReport& b) {
    return a.source_name == b.source_name && a.target_name == b.target_name && a.params == b.params &&
           a.cloud_points == b.cloud_points && a.entry == b.entry;
  }
};

inline std::string serialize(const FibredReport& r) {
  Json j;
  j["format"] = "ifsmorph-report/1";
  j["kind"] = "fibred-graph";
  j["source"] = {{"name", r.source_name}};
  j["target"] = {{"name", r.target_name}};
  j["params"] = params_to_json(r.params);
  j["cloud_points"] = r.cloud_points;
  j["entry"] = entry_to_json(r.entry, false);
  return j.dump(2) + "\n";
}

inline FibredReport parse_fibred_report(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    if (j.at("kind").get<std::string>() != "fibred-graph") throw ParseError("not a fibred-graph report");
    return FibredReport{j.at("source").at("name").get<std::string>(), j.at("target").at("name").get<std::string>(),
                        params_from_json(j.at("params")), j.at("cloud_points").get<std::size_t>(),
                        entry_from_json(j.at("entry"))};
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

// ---- CSV --------------------------------------------------------------------

// Shortest decimal that round-trips.
inline std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

inline void write_csv(std::ostream& out, const PointCloud& c) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto p = c[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (j) out << ',';
      out << format_double(p[j]);
    }
    out << '\n';
  }
}

inline PointCloud read_csv(std::istream& in) {
  PointCloud c;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> p;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = std::min(line.find(',', pos), line.size());
      double v = 0;
      const auto res = std::from_chars(line.data() + pos, line.data() + comma, v);
      if (res.ec != std::errc() || res.ptr != line.data() + comma) throw ParseError("bad CSV number in '" + line + "'");
      p.push_back(v);
      pos = comma + 1;
    }
    if (first) {
      c = PointCloud(p.size());
      first = false;
    }
    c.push_back(p);
  }
  return c;
}

// ---- PGM --------------------------------------------------------------------

struct ViewBox {
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;

  static ViewBox bounding(const PointCloud& c) {
    ViewBox v{c[0][0], c[0][0], c[0][1], c[0][1]};
    for (std::size_t i = 1; i < c.size(); ++i) {
      v.xmin = std::min(v.xmin, c[i][0]);
      v.xmax = std::max(v.xmax, c[i][0]);
      v.ymin = std::min(v.ymin, c[i][1]);
      v.ymax = std::max(v.ymax, c[i][1]);
    }
    return v;
  }
};

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, row 0 at the top

  std::uint8_t at(std::size_t col, std::size_t row) const { return pixels[row * width + col]; }
};

// Pixel of a point: column round((x - xmin) / (xmax - xmin) * (width - 1)),
// row counted from the bottom. Degenerate extents map to the centre.
inline std::pair<long, long> to_pixel(const ViewBox& v, std::size_t width, std::size_t height, double x, double y) {
  const auto scale = [](double t, double lo, double hi, std::size_t n) -> long {
    if (hi <= lo) return static_cast<long>((n - 1) / 2);
    return std::lround((t - lo) / (hi - lo) * static_cast<double>(n - 1));
  };
  const long col = scale(x, v.xmin, v.xmax, width);
  const long row_from_bottom = scale(y, v.ymin, v.ymax, height);
  return {col, static_cast<long>(height) - 1 - row_from_bottom};
}

// Background 255, each point splatted to its nearest pixel as 0.
inline GrayImage render(const PointCloud& c, std::size_t width, std::size_t height, const ViewBox& view) {
  if (c.dimension() != 2) throw DimensionMismatch("render needs points in the plane");
  if (width == 0 || height == 0) throw BadParams("image size must be positive");
  GrayImage img{width, height, std::vector<std::uint8_t>(width * height, 255)};
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto [col, row] = to_pixel(view, width, height, c[i][0], c[i][1]);
    if (col < 0 || row < 0 || col >= static_cast<long>(width) || row >= static_cast<long>(height)) continue;
    img.pixels[static_cast<std::size_t>(row) * width + static_cast<std::size_t>(col)] = 0;
  }
  return img;
}

inline void write_pgm(std::ostream& out, const GrayImage& img) {
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

inline GrayImage read_pgm(std::istream& in) {
  std::string magic;
  GrayImage img;
  int maxval = 0;
  in >> magic >> img.width >> img.height >> maxval;
  if (magic != "P5" || maxval != 255 || !in) throw ParseError("not a binary 8-bit PGM");
  in.get();
  img.pixels.resize(img.width * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!in) throw ParseError("truncated PGM");
  return img;
}

}  // namespace ifsmorph::io
