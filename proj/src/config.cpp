#include "masskit/config.hpp"

#include <fstream>
#include <sstream>

namespace masskit {

namespace {

std::string kind_name(const json& j) {
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_boolean()) return "boolean";
  if (j.is_array()) return "array";
  if (j.is_object()) return "object";
  return "null";
}

}  // namespace

SceneConfig SceneConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("", "cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.parent_path());
}

SceneConfig SceneConfig::parse(const std::string& text, std::filesystem::path base_dir) {
  SceneConfig cfg;
  try {
    cfg.root_ = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("malformed JSON: ") + e.what());
  }
  if (!cfg.root_.is_object()) throw SchemaError("", "top level must be an object");
  cfg.hash_ = hex64(fnv1a(text));
  cfg.base_dir_ = std::move(base_dir);
  if (!cfg.has("/schema")) throw SchemaError("/schema", "missing required field");
  if (cfg.integer("/schema") != 1) throw SchemaError("/schema", "unsupported schema version");
  return cfg;
}

bool SceneConfig::has(const std::string& pointer) const {
  return root_.contains(json::json_pointer(pointer));
}

const json& SceneConfig::at(const std::string& pointer) const {
  if (!has(pointer)) throw SchemaError(pointer, "missing required field");
  return root_.at(json::json_pointer(pointer));
}

double SceneConfig::number(const std::string& pointer) const {
  const json& j = at(pointer);
  if (!j.is_number()) throw SchemaError(pointer, "expected a number, found " + kind_name(j));
  return j.get<double>();
}

double SceneConfig::number(const std::string& pointer, double fallback) const {
  return has(pointer) ? number(pointer) : fallback;
}

double SceneConfig::positive(const std::string& pointer, double fallback) const {
  const double v = number(pointer, fallback);
  if (!(v > 0.0)) throw SchemaError(pointer, "must be positive");
  return v;
}

int SceneConfig::integer(const std::string& pointer) const {
  const json& j = at(pointer);
  if (!j.is_number_integer()) throw SchemaError(pointer, "expected an integer, found " + kind_name(j));
  return j.get<int>();
}

int SceneConfig::integer(const std::string& pointer, int fallback) const {
  return has(pointer) ? integer(pointer) : fallback;
}

bool SceneConfig::boolean(const std::string& pointer, bool fallback) const {
  if (!has(pointer)) return fallback;
  const json& j = at(pointer);
  if (!j.is_boolean()) throw SchemaError(pointer, "expected a boolean, found " + kind_name(j));
  return j.get<bool>();
}

std::string SceneConfig::string(const std::string& pointer) const {
  const json& j = at(pointer);
  if (!j.is_string()) throw SchemaError(pointer, "expected a string, found " + kind_name(j));
  return j.get<std::string>();
}

std::string SceneConfig::string(const std::string& pointer, const std::string& fallback) const {
  return has(pointer) ? string(pointer) : fallback;
}

std::vector<double> SceneConfig::numbers(const std::string& pointer) const {
  const json& j = at(pointer);
  if (!j.is_array()) throw SchemaError(pointer, "expected an array, found " + kind_name(j));
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw SchemaError(pointer + "/" + std::to_string(i), "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

std::vector<double> SceneConfig::numbers(const std::string& pointer,
                                         std::vector<double> fallback) const {
  return has(pointer) ? numbers(pointer) : fallback;
}

std::vector<double> SceneConfig::ladder(const std::string& pointer, std::size_t min_count) const {
  std::vector<double> v = numbers(pointer);
  if (v.size() < min_count) {
    throw SchemaError(pointer, "needs at least " + std::to_string(min_count) + " entries");
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || (i > 0 && !(v[i] > v[i - 1]))) {
      throw SchemaError(pointer, "entries must be positive and strictly increasing");
    }
  }
  return v;
}

int SceneConfig::dimension() const {
  const int n = integer("/dimension", 3);
  if (n < 3 || n > kMaxDim) throw SchemaError("/dimension", "must lie in [3, 8]");
  return n;
}

std::uint64_t SceneConfig::seed() const {
  if (!has("/seed")) return 0;
  const json& j = at("/seed");
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    throw SchemaError("/seed", "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

std::string SceneConfig::output_dir() const { return string("/output", "masskit_out"); }

MetricSpec build_metric(const SceneConfig& cfg, const std::string& p) {
  const int n = cfg.dimension();
  const std::string family = cfg.string(p + "/family");
  if (family == "euclidean") return metrics::euclidean(n);
  if (family == "schwarzschild") return metrics::schwarzschild(n, cfg.number(p + "/m"));
  if (family == "power_factor") return metrics::power_factor(n, cfg.number(p + "/A"));
  if (family == "toy_remainder") {
    return metrics::toy_remainder(n, cfg.number(p + "/m"), cfg.number(p + "/B"));
  }
  if (family == "round_sphere") return metrics::round_sphere(n);
  if (family == "tangential_gauge") return metrics::tangential_gauge(n, cfg.number(p + "/beta"));
  if (family == "radial_projector") {
    return metrics::radial_projector(n, cfg.number(p + "/amplitude"), cfg.number(p + "/power"));
  }
  if (family == "gaussian_bump") {
    if (n != 3) throw SchemaError("/dimension", "gaussian_bump is defined for n = 3");
    return metrics::gaussian_bump(cfg.number(p + "/c"), cfg.positive(p + "/width", 1.0));
  }
  throw SchemaError(p + "/family", "unknown metric family '" + family + "'");
}

DomainModel build_domain(const SceneConfig& cfg, const std::string& p) {
  DomainModel d;
  const std::string kind = cfg.string(p + "/kind", "end_annulus");
  if (kind == "ball") {
    d.kind = DomainModel::Kind::ball;
  } else if (kind != "end_annulus") {
    throw SchemaError(p + "/kind", "expected end_annulus or ball");
  }
  d.r_inner = cfg.positive(p + "/r_inner", d.r_inner);
  d.r_out = cfg.positive(p + "/r_out", d.r_out);
  d.cylinder_l0 = cfg.number(p + "/cylinder_l0", 0.0);
  if (d.cylinder_l0 < 0.0) throw SchemaError(p + "/cylinder_l0", "must be non-negative");
  d.max_cylinder_levels = cfg.integer(p + "/max_cylinder_levels", d.max_cylinder_levels);
  d.nodes_per_decade = cfg.integer(p + "/nodes_per_decade", d.nodes_per_decade);
  if (d.nodes_per_decade < 10) throw SchemaError(p + "/nodes_per_decade", "must be at least 10");
  try {
    d.validate();
  } catch (const ConfigError& e) {
    throw SchemaError(p, e.what());
  }
  return d;
}

Potential build_potential(const SceneConfig& cfg, const std::string& p) {
  const std::string kind = cfg.string(p + "/kind");
  if (kind == "zero") return Potential::zero();
  const double a = cfg.number(p + "/amplitude");
  const double c = cfg.number(p + "/center");
  const double w = cfg.positive(p + "/width", 1.0);
  if (kind == "bump") return bump_potential(a, c, w);
  if (kind == "dipole") return dipole_potential(a, c, w);
  throw SchemaError(p + "/kind", "unknown potential '" + kind + "'");
}

SolverControls build_controls(const SceneConfig& cfg, const std::string& p) {
  SolverControls c;
  c.exhaustion_tolerance = cfg.positive(p + "/exhaustion_tolerance", c.exhaustion_tolerance);
  c.residual_tolerance = cfg.positive(p + "/residual_tolerance", c.residual_tolerance);
  c.extraction_tolerance = cfg.positive(p + "/extraction_tolerance", c.extraction_tolerance);
  c.sobolev_constant = cfg.number(p + "/sobolev_constant", 0.0);
  const std::string outer = cfg.string(p + "/outer", "dirichlet");
  if (outer == "robin") {
    c.outer = OuterCondition::robin;
  } else if (outer != "dirichlet") {
    throw SchemaError(p + "/outer", "expected dirichlet or robin");
  }
  return c;
}

DensityOptions build_density_options(const SceneConfig& cfg, const std::string& p) {
  DensityOptions o;
  if (cfg.has(p + "/s_ladder")) o.s_ladder = cfg.ladder(p + "/s_ladder", 1);
  o.epsilon_target = cfg.number(p + "/epsilon_target", 0.0);
  if (cfg.has(p + "/input_mass_ladder")) o.input_mass_ladder = cfg.ladder(p + "/input_mass_ladder", 3);
  if (cfg.has(p + "/mass_ladder_factors")) {
    o.mass_ladder_factors = cfg.ladder(p + "/mass_ladder_factors", 3);
  }
  o.nodes_per_decade = cfg.integer(p + "/nodes_per_decade", o.nodes_per_decade);
  o.cylinder_l0 = cfg.number(p + "/cylinder_l0", 0.0);
  o.sobolev_constant = cfg.number(p + "/sobolev_constant", 0.0);
  o.verify_adm = cfg.boolean(p + "/verify_adm", true);
  return o;
}

GroupAction build_group(const SceneConfig& cfg, const std::string& p, int n) {
  const std::string kind = cfg.string(p + "/kind", "generators");
  if (kind == "trivial") return trivial_group(n);
  if (kind == "antipodal") return antipodal_group(n);
  if (kind == "hopf") {
    if (n != 4) throw SchemaError(p + "/kind", "hopf groups act on R^4");
    return cyclic_hopf_group(cfg.integer(p + "/k"));
  }
  if (kind != "generators") throw SchemaError(p + "/kind", "unknown group kind '" + kind + "'");
  const json& gens = cfg.at(p + "/generators");
  if (!gens.is_array()) throw SchemaError(p + "/generators", "expected an array of matrices");
  std::vector<Mat> mats;
  for (std::size_t g = 0; g < gens.size(); ++g) {
    const std::string q = p + "/generators/" + std::to_string(g);
    const std::vector<double> flat = cfg.numbers(q);
    if (flat.size() != static_cast<std::size_t>(n * n)) {
      throw SchemaError(q, "expected " + std::to_string(n * n) + " row-major entries");
    }
    Mat T(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) T(i, j) = flat[i * n + j];
    }
    // twelve printed digits leave T^T T off by ~1e-12; project to the nearest orthogonal matrix
    if ((T.transpose() * T - Mat::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-9) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(T), Eigen::ComputeFullU | Eigen::ComputeFullV);
      T = svd.matrixU() * svd.matrixV().transpose();
    }
    mats.push_back(T);
  }
  try {
    return make_group(n, mats);
  } catch (const PreconditionError&) {
    throw;
  } catch (const ConfigError& e) {
    throw SchemaError(p + "/generators", e.what());
  }
}

}  // namespace masskit
