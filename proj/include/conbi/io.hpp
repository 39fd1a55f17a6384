#pragma once

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conbi/error.hpp"
#include "conbi/metric.hpp"
#include "conbi/moduli.hpp"
#include "conbi/rational.hpp"
#include "conbi/wasserstein.hpp"

namespace conbi::io {

using json = nlohmann::json;

/// A number or a rational string such as "3/4" or "0.125".
inline Rational parse_scalar(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (j.is_number()) return exact_rational(j.get<double>());
  throw InputError("expected a number or rational string, got " + j.dump());
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  return j.at(key);
}

/// {"labels": [...], "d": [[...], ...]}; validated.
inline FiniteMetric parse_metric(const json& j) {
  const json& rows = field(j, "d");
  if (!rows.is_array()) throw InputError("'d' must be a matrix");
  std::vector<std::vector<Rational>> d;
  for (const auto& row : rows) {
    if (!row.is_array()) throw InputError("'d' must be a matrix");
    std::vector<Rational> r;
    for (const auto& v : row) r.push_back(parse_scalar(v));
    d.push_back(std::move(r));
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
  return validate_metric(std::move(d), std::move(labels));
}

/// {"kind": "finite" | "tightspan", "metric": {...}} (the metric fields may also sit
/// at top level), {"kind": "linf", "dim": n} or {"kind": "halfplane"}.
inline SpaceDescriptor parse_space(const json& j) {
  const std::string kind = field(j, "kind").get<std::string>();
  if (kind == "finite" || kind == "tightspan") {
    const FiniteMetric m = parse_metric(j.contains("metric") ? j.at("metric") : j);
    if (kind == "finite") return FiniteSpace{m};
    return TightSpan(m);
  }
  if (kind == "linf") {
    const int dim = j.value("dim", 2);
    if (dim < 1 || dim > kMaxDim) throw InputError("linf dimension out of range");
    return LinfSpace{dim};
  }
  if (kind == "halfplane") return HalfPlane{};
  throw InputError("unknown space kind '" + kind + "'");
}

inline Vec parse_vec(const json& j) {
  if (!j.is_array() || j.empty() || j.size() > static_cast<std::size_t>(kMaxDim)) {
    throw InputError("expected a coordinate array, got " + j.dump());
  }
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = to_double(parse_scalar(j[i]));
  return v;
}

/// Point index given as an integer or a label.
inline std::size_t parse_index(const FiniteMetric& m, const json& j) {
  if (j.is_number_integer()) {
    const long i = j.get<long>();
    if (i < 0 || static_cast<std::size_t>(i) >= m.size()) throw InputError("point index out of range: " + j.dump());
    return static_cast<std::size_t>(i);
  }
  if (j.is_string()) {
    const auto& labels = m.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == j.get<std::string>()) return i;
    }
  }
  throw InputError("unknown point " + j.dump());
}

inline std::vector<Rational> parse_weights(const json& j, std::size_t n) {
  std::vector<Rational> w;
  if (!j.contains("weights")) {
    w.assign(n, Rational(1, static_cast<long>(n)));
    return w;
  }
  for (const auto& v : j.at("weights")) w.push_back(parse_scalar(v));
  return w;
}

/// {"support": [...], "weights": [...]} with uniform weights when omitted.
inline DiscreteMeasure<Vec> parse_vec_measure(const json& j) {
  std::vector<Vec> pts;
  for (const auto& p : field(j, "support")) pts.push_back(parse_vec(p));
  return DiscreteMeasure<Vec>(std::move(pts), parse_weights(j, field(j, "support").size()));
}

inline DiscreteMeasure<std::size_t> parse_index_measure(const FiniteMetric& m, const json& j) {
  std::vector<std::size_t> pts;
  for (const auto& p : field(j, "support")) pts.push_back(parse_index(m, p));
  return DiscreteMeasure<std::size_t>(std::move(pts), parse_weights(j, pts.size()));
}

inline json to_json(const Vec& v) { return coords(v); }

template <class P>
json to_json(const DiscreteMeasure<P>& mu) {
  json support = json::array(), weights = json::array();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if constexpr (std::is_same_v<P, Vec>) {
      support.push_back(to_json(mu.atom(i)));
    } else {
      support.push_back(mu.atom(i));
    }
    weights.push_back(to_string(mu.weight(i)));
  }
  return {{"support", support}, {"weights", weights}};
}

inline json to_json(const DefectReport& r) {
  return {{"property", r.property},
          {"max_violation", r.max_violation},
          {"max_raw", r.samples ? json(r.max_raw) : json(nullptr)},
          {"tolerance", r.tolerance},
          {"passed", r.passed()},
          {"samples", r.samples},
          {"witness", {{"index", r.witness_index}, {"points", r.witness_points}, {"params", r.witness_params}}}};
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

}  // namespace conbi::io
