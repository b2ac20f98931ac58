#pragma once

// JSON encodings:
//   matrix     {"rows": r, "cols": c, "data": [[re, im], ...]}   (row-major)
//   group      {"dim": p, "name": ..., "elements": [matrix, ...]}
//   structure  {"dim", "m", "components": [[p_i, s_i], ...], "rho", "delta", "basis": matrix}
//   samples    {"dim", "n", "vectors": [[[re, im], ...], ...], "provenance": {...}}
//   report     estimator report with full trajectories

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

#include "symtyler/analysis.hpp"

namespace symtyler {

using json = nlohmann::json;

namespace detail {

inline json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j) {
  require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(),
          ErrorKind::InvalidArgument, "complex entries must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline const json& field(const json& j, const char* key) {
  require(j.is_object() && j.contains(key), ErrorKind::InvalidArgument,
          std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace detail

inline json matrix_to_json(const CMatrix& m) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) data.push_back(detail::complex_to_json(m(i, j)));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline CMatrix matrix_from_json(const json& j) {
  const auto rows = detail::field(j, "rows").get<Index>();
  const auto cols = detail::field(j, "cols").get<Index>();
  const json& data = detail::field(j, "data");
  require(rows >= 0 && cols >= 0 && data.is_array() &&
              data.size() == static_cast<std::size_t>(rows * cols),
          ErrorKind::InvalidArgument, "matrix data length does not match rows*cols");
  CMatrix m(rows, cols);
  std::size_t k = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index c = 0; c < cols; ++c) m(i, c) = detail::complex_from_json(data[k++]);
  return m;
}

inline json group_to_json(const GroupSpec& g) {
  json elements = json::array();
  for (const auto& e : g.elements()) elements.push_back(matrix_to_json(e.matrix()));
  return {{"dim", g.dim()}, {"name", g.name()}, {"order", g.order()}, {"elements", std::move(elements)}};
}

inline GroupSpec group_from_json(const json& j) {
  std::vector<UnitaryMatrix> elements;
  for (const auto& e : detail::field(j, "elements")) elements.emplace_back(matrix_from_json(e));
  std::string name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "";
  GroupSpec g = GroupSpec::from_elements(std::move(elements), std::move(name));
  require(g.dim() == detail::field(j, "dim").get<Index>(), ErrorKind::DimMismatch,
          "group 'dim' disagrees with its elements");
  return g;
}

/// Generator files: {"dim": p, "generators": [matrix, ...]} or a bare array of matrices.
inline std::pair<Index, std::vector<CMatrix>> generators_from_json(const json& j) {
  const json& list = j.is_array() ? j : detail::field(j, "generators");
  std::vector<CMatrix> gens;
  for (const auto& g : list) gens.push_back(matrix_from_json(g));
  Index dim = 0;
  if (j.is_object() && j.contains("dim")) dim = j["dim"].get<Index>();
  if (dim == 0 && !gens.empty()) dim = gens.front().rows();
  require(dim >= 1, ErrorKind::InvalidArgument, "generator file needs 'dim' when the list is empty");
  return {dim, std::move(gens)};
}

inline json structure_to_json(const StructureInfo& s) {
  json comps = json::array();
  for (const auto& c : s.components()) comps.push_back(json::array({c.replication, c.block_size}));
  return {{"dim", s.dim()},   {"m", s.m()},         {"components", std::move(comps)},
          {"rho", s.rho()},   {"delta", s.delta()}, {"basis", matrix_to_json(s.basis())}};
}

inline StructureInfo structure_from_json(const json& j) {
  std::vector<Component> comps;
  for (const auto& c : detail::field(j, "components")) {
    require(c.is_array() && c.size() == 2, ErrorKind::InvalidArgument, "components are [p_i, s_i] pairs");
    comps.push_back({c[0].get<int>(), c[1].get<int>()});
  }
  return StructureInfo(detail::field(j, "dim").get<Index>(), std::move(comps),
                       matrix_from_json(detail::field(j, "basis")));
}

inline json samples_to_json(const SampleSet& x) {
  json vectors = json::array();
  for (Index i = 0; i < x.size(); ++i) {
    json v = json::array();
    for (Index r = 0; r < x.dim(); ++r) v.push_back(detail::complex_to_json(x.vectors()(r, i)));
    vectors.push_back(std::move(v));
  }
  const Provenance& p = x.provenance();
  json prov = {{"distribution", p.distribution}, {"seed", p.seed}};
  if (p.texture_param) prov["texture_param"] = *p.texture_param;
  if (p.truth) prov["truth"] = matrix_to_json(*p.truth);
  return {{"dim", x.dim()}, {"n", x.size()}, {"vectors", std::move(vectors)}, {"provenance", std::move(prov)}};
}

inline SampleSet samples_from_json(const json& j) {
  const auto dim = detail::field(j, "dim").get<Index>();
  const auto n = detail::field(j, "n").get<Index>();
  const json& vectors = detail::field(j, "vectors");
  require(vectors.is_array() && vectors.size() == static_cast<std::size_t>(n),
          ErrorKind::InvalidArgument, "'vectors' length does not match n");
  CMatrix m(dim, n);
  for (Index i = 0; i < n; ++i) {
    const json& v = vectors[static_cast<std::size_t>(i)];
    require(v.is_array() && v.size() == static_cast<std::size_t>(dim), ErrorKind::DimMismatch,
            "vector " + std::to_string(i) + " does not have dim entries");
    for (Index r = 0; r < dim; ++r) m(r, i) = detail::complex_from_json(v[static_cast<std::size_t>(r)]);
  }
  Provenance prov;
  if (j.contains("provenance")) {
    const json& p = j["provenance"];
    if (p.contains("distribution")) prov.distribution = p["distribution"].get<std::string>();
    if (p.contains("seed")) prov.seed = p["seed"].get<std::uint64_t>();
    if (p.contains("texture_param")) prov.texture_param = p["texture_param"].get<double>();
    if (p.contains("truth")) prov.truth = matrix_from_json(p["truth"]);
  }
  return SampleSet(std::move(m), std::move(prov));
}

inline json report_to_json(const EstimatorReport& r) {
  auto numbers = [](const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(std::isfinite(x) ? json(x) : json(nullptr));
    return out;
  };
  json out = {{"status", to_string(r.status)},
              {"iterations", r.iterations},
              {"estimate", matrix_to_json(r.estimate)},
              {"step_norms", numbers(r.step_norms)},
              {"residuals", numbers(r.residuals)},
              {"objective_values", numbers(r.objective_values)}};
  out["fixed_point_residual"] =
      std::isfinite(r.fixed_point_residual) ? json(r.fixed_point_residual) : json(nullptr);
  if (!r.diagnostic.empty()) out["diagnostic"] = r.diagnostic;
  return out;
}

/// Per-iteration CSV: iter, step_norm, objective, residual.
inline void write_trace_csv(std::ostream& out, const EstimatorReport& r) {
  out << "iter,step_norm,objective,residual\n";
  for (std::size_t i = 0; i < r.step_norms.size(); ++i)
    out << i + 1 << ',' << format_double(r.step_norms[i]) << ','
        << format_double(i < r.objective_values.size() ? r.objective_values[i]
                                                       : std::numeric_limits<double>::quiet_NaN())
        << ',' << format_double(r.residuals[i]) << '\n';
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, "cannot parse '" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write '" + path + "'");
  out << text;
  require(static_cast<bool>(out), ErrorKind::Io, "failed writing '" + path + "'");
}

}  // namespace symtyler
