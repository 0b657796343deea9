#include <cmath>
#include <set>
#include <sstream>

#include "pathslice/app.hpp"

namespace pathslice::app {

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

double positive(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key + " must be a number");
  const double v = j.get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key + " must be positive");
  return v;
}

int positive_int(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError(key + " must be an integer");
  const int v = j.get<int>();
  if (v < 1) throw ConfigError(key + " must be at least 1");
  return v;
}

}  // namespace

KernelOptions RunConfig::kernel_options(bool ricci) const {
  KernelOptions o;
  o.cutoff_c = cutoff_c;
  o.ricci_term = ricci;
  return o;
}

ModelManifold parse_manifold(const json& j) {
  if (!j.is_object() || !j.contains("type")) throw ConfigError("manifold needs a \"type\"");
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "torus") {
      reject_unknown(j, {"type", "lengths"}, "manifold");
      std::vector<double> len;
      if (!j.contains("lengths") || !j.at("lengths").is_array()) throw ConfigError("torus needs \"lengths\"");
      for (const auto& v : j.at("lengths")) len.push_back(positive(v, "torus side length"));
      if (len.empty() || len.size() % 2 != 0) throw ConfigError("torus dimension must be even and positive");
      return ModelManifold::torus(len);
    }
    if (type == "sphere2") {
      reject_unknown(j, {"type", "radius"}, "manifold");
      return ModelManifold::sphere2(j.contains("radius") ? positive(j.at("radius"), "sphere radius") : 1.0);
    }
    if (type == "product") {
      reject_unknown(j, {"type", "factors"}, "manifold");
      if (!j.contains("factors") || !j.at("factors").is_array() || j.at("factors").empty())
        throw ConfigError("product needs a nonempty \"factors\" list");
      std::vector<ModelManifold> parts;
      for (const auto& f : j.at("factors")) parts.push_back(parse_manifold(f));
      return ModelManifold::product(parts);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid manifold: ") + e.what());
  }
  throw ConfigError("unknown manifold type '" + type + "' (torus, sphere2, product)");
}

GridSpec parse_grid(const json& j, const ModelManifold& m) {
  GridSpec g;
  if (j.is_null()) {
    if (m.factors().size() > 1) {
      g.type = "product";
      for (std::size_t f = 0; f < m.factors().size(); ++f) g.factors.push_back(parse_grid(json(), m.factor_manifold(f)));
    } else {
      g.type = m.is_flat() ? "uniform" : "gauss_legendre";
    }
    return g;
  }
  if (!j.is_object() || !j.contains("type")) throw ConfigError("grid needs a \"type\"");
  g.type = j.at("type").get<std::string>();
  if (g.type == "uniform") {
    reject_unknown(j, {"type", "per_side"}, "grid");
    if (!m.is_flat()) throw ConfigError("uniform grid needs a torus");
    if (j.contains("per_side")) g.per_side = positive_int(j.at("per_side"), "per_side");
  } else if (g.type == "gauss_legendre" || g.type == "fibonacci") {
    reject_unknown(j, {"type", "nlat", "nlon", "count"}, "grid");
    if (m.factors().size() != 1 || m.is_flat()) throw ConfigError(g.type + " grid needs a sphere");
    if (j.contains("nlat")) g.nlat = positive_int(j.at("nlat"), "nlat");
    if (j.contains("nlon")) g.nlon = positive_int(j.at("nlon"), "nlon");
    if (j.contains("count")) g.count = positive_int(j.at("count"), "count");
  } else if (g.type == "product") {
    reject_unknown(j, {"type", "factors"}, "grid");
    if (!j.contains("factors") || j.at("factors").size() != m.factors().size())
      throw ConfigError("product grid needs one factor grid per manifold factor");
    for (std::size_t f = 0; f < m.factors().size(); ++f)
      g.factors.push_back(parse_grid(j.at("factors")[f], m.factor_manifold(f)));
  } else {
    throw ConfigError("unknown grid type '" + g.type + "' (uniform, gauss_legendre, fibonacci, product)");
  }
  return g;
}

json grid_json(const GridSpec& g) {
  json j;
  j["type"] = g.type;
  if (g.type == "uniform") j["per_side"] = g.per_side;
  if (g.type == "gauss_legendre") {
    j["nlat"] = g.nlat;
    j["nlon"] = g.nlon;
  }
  if (g.type == "fibonacci") j["count"] = g.count;
  if (g.type == "product") {
    j["factors"] = json::array();
    for (const auto& f : g.factors) j["factors"].push_back(grid_json(f));
  }
  return j;
}

GridPtr build_grid(const GridSpec& g, const ModelManifold& m) {
  if (g.type == "uniform") return std::make_shared<const QuadratureGrid>(QuadratureGrid::torus_uniform(m, g.per_side));
  if (g.type == "gauss_legendre")
    return std::make_shared<const QuadratureGrid>(QuadratureGrid::sphere_gauss_legendre(m, g.nlat, g.nlon));
  if (g.type == "fibonacci") return std::make_shared<const QuadratureGrid>(QuadratureGrid::sphere_fibonacci(m, g.count));
  std::vector<QuadratureGrid> parts;
  for (std::size_t f = 0; f < g.factors.size(); ++f) parts.push_back(*build_grid(g.factors[f], m.factor_manifold(f)));
  return std::make_shared<const QuadratureGrid>(QuadratureGrid::product(m, parts));
}

RunConfig parse_config(const json& j) {
  reject_unknown(j,
                 {"manifold", "grid", "epsilon", "kernel", "t_list", "depths", "refine_t", "min_slice", "D_list",
                  "samples", "seed", "output_dir"},
                 "config");
  RunConfig c;
  if (!j.contains("manifold")) throw ConfigError("config needs a \"manifold\"");
  c.manifold_json = j.at("manifold");
  c.manifold = parse_manifold(c.manifold_json);
  c.grid = parse_grid(j.contains("grid") ? j.at("grid") : json(), c.manifold);
  try {
    if (j.contains("epsilon")) {
      if (!j.at("epsilon").is_number()) throw ConfigError("epsilon must be a number");
      c.epsilon = j.at("epsilon").get<double>();
      if (!(c.epsilon > 0.0 && c.epsilon < 0.5))
        throw ConfigError("epsilon = " + format_double(c.epsilon) + " violates the constraint 0 < epsilon < 1/2");
    }
    if (j.contains("kernel")) {
      const json& k = j.at("kernel");
      reject_unknown(k, {"cutoff_c", "fd_delta", "dt_delta"}, "kernel");
      if (k.contains("cutoff_c")) c.cutoff_c = positive(k.at("cutoff_c"), "cutoff_c");
      if (k.contains("fd_delta")) c.fd_delta = positive(k.at("fd_delta"), "fd_delta");
      if (k.contains("dt_delta")) c.dt_delta = positive(k.at("dt_delta"), "dt_delta");
      if (c.fd_delta >= 1.0 || c.dt_delta >= 1.0) throw ConfigError("fd_delta and dt_delta must lie in (0, 1)");
    }
    if (j.contains("t_list")) {
      if (!j.at("t_list").is_array() || j.at("t_list").empty()) throw ConfigError("t_list must be a nonempty list");
      std::vector<double> ts;
      for (const auto& v : j.at("t_list")) ts.push_back(positive(v, "every t in t_list"));
      c.t_list = ts;
    }
    if (j.contains("depths")) {
      if (!j.at("depths").is_array() || j.at("depths").empty()) throw ConfigError("depths must be a nonempty list");
      c.depths.clear();
      for (const auto& v : j.at("depths")) {
        if (!v.is_number_integer() || v.get<int>() < 0) throw ConfigError("depths must be integers >= 0");
        c.depths.push_back(v.get<int>());
      }
    }
    if (j.contains("refine_t")) c.refine_t = positive(j.at("refine_t"), "refine_t");
    if (j.contains("min_slice")) c.min_slice = positive(j.at("min_slice"), "min_slice");
    if (j.contains("D_list")) {
      if (!j.at("D_list").is_array() || j.at("D_list").empty()) throw ConfigError("D_list must be a nonempty list");
      c.d_list.clear();
      for (const auto& v : j.at("D_list")) c.d_list.push_back(positive(v, "every D in D_list"));
    }
    if (j.contains("samples")) c.samples = positive_int(j.at("samples"), "samples");
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
      c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config value: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace pathslice::app
