#include "masskit/commands.hpp"

#include "masskit/adm.hpp"
#include "masskit/curvature.hpp"
#include "masskit/decay.hpp"
#include "masskit/parallel.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace masskit {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const PreconditionError*>(&e)) return kExitAudit;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e)) return kExitConfig;
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return kExitConfig;
  return kExitNumerical;
}

std::vector<Vec> seeded_directions(int n, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec> out;
  while (static_cast<int>(out.size()) < count) {
    Vec d(n);
    for (int i = 0; i < n; ++i) d(i) = normal(rng);
    const double norm = d.norm();
    if (norm < 1e-8) continue;
    out.push_back(d / norm);
  }
  return out;
}

ConvergenceStudy scalar_curvature_study(const MetricSpec& g, std::span<const double> radii,
                                        double h0, int levels, std::uint64_t seed,
                                        int directions, std::optional<double> exact) {
  if (levels < 2) throw ConfigError("a convergence study needs at least two levels");
  if (radii.empty()) throw ConfigError("no sample radii");
  const int n = g.dimension();
  std::vector<Vec> points;
  for (double r : radii) {
    for (const Vec& d : seeded_directions(n, directions, seed)) points.push_back(r * d);
  }
  ConvergenceStudy st;
  st.operation = "scalar_curvature_bartnik";
  st.exact_reference = exact.has_value();
  std::vector<double> prev;
  double h = h0;
  const int rows = exact ? levels : levels + 1;
  for (int level = 0; level < rows; ++level, h *= 0.5) {
    std::vector<double> R(points.size());
    parallel_for(points.size(), [&](std::size_t i) { R[i] = scalar_curvature_bartnik(g, points[i], h); });
    double err = 0.0;
    if (exact) {
      for (double v : R) err = std::max(err, std::abs(v - *exact));
    } else if (!prev.empty()) {
      for (std::size_t i = 0; i < R.size(); ++i) err = std::max(err, std::abs(R[i] - prev[i]));
    }
    prev = R;
    if (!exact && level == 0) continue;
    // without a reference the row at h measures the change from 2h
    ConvergenceRow row{exact ? h : 2.0 * h, err, 0.0};
    if (!st.rows.empty() && err > 0.0 && st.rows.back().error > 0.0) {
      row.order = std::log2(st.rows.back().error / err);
    }
    st.rows.push_back(row);
  }
  st.last_order = st.rows.back().order;
  return st;
}

ConvergenceStudy mass_radius_study(const MetricSpec& g, std::span<const double> radii,
                                   std::optional<double> exact, int order) {
  const MassReport rep = adm_mass(g, radii, order);
  const double ref = exact ? *exact : rep.extrapolated;
  ConvergenceStudy st;
  st.operation = "adm_mass";
  st.exact_reference = exact.has_value();
  for (std::size_t i = 0; i < radii.size(); ++i) {
    ConvergenceRow row{radii[i], std::abs(rep.partial_masses[i] - ref), 0.0};
    if (i > 0 && row.error > 0.0 && st.rows.back().error > 0.0) {
      row.order = std::log(st.rows.back().error / row.error) / std::log(radii[i] / radii[i - 1]);
    }
    st.rows.push_back(row);
  }
  st.last_order = st.rows.back().order;
  return st;
}

namespace {

// m_bar is formed as m + shift, so the identity holds up to the rounding of two additions.
double identity_rounding(double m_bar, double m) {
  return 4.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(m_bar), std::abs(m)});
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

std::string tag(const std::string& name, double s) { return name + "_s=" + format_number(s); }

struct Context {
  const SceneConfig& cfg;
  fs::path out;
  std::uint64_t seed;
  RunManifest& manifest;
  json& report;
  std::map<std::string, std::string> files;  // ordered: written in name order
  std::string anchor;

  void write(const std::string& name, std::string content) { files[name] = std::move(content); }
  void stage(const std::string& name, const std::string& anchor_text) {
    anchor = anchor_text;
    manifest.stage(name, "ok");
  }
};

json mass_report_json(const MassReport& m) {
  json j;
  j["metric"] = m.metric_label;
  j["dimension"] = m.dimension;
  j["radii"] = numbers(m.radii);
  j["partial_masses"] = numbers(m.partial_masses);
  j["extrapolated"] = number(m.extrapolated);
  j["observed_order"] = number(m.observed_order);
  j["order_fallback"] = m.order_fallback;
  j["low_confidence"] = m.low_confidence;
  j["quadrature_order"] = m.quadrature_order;
  j["angular_rule"] = m.angular_rule;
  j["angular_points"] = m.angular_points;
  j["group_order"] = m.group_order;
  j["bracketed"] = extrapolation_bracketed(m);
  return j;
}

void cmd_mass(Context& c) {
  const MetricSpec g = build_metric(c.cfg);
  const std::vector<double> radii = c.cfg.ladder("/mass/radii", 3);
  const int order = c.cfg.integer("/mass/quadrature_order", 24);
  if (order < 4) throw SchemaError("/mass/quadrature_order", "must be at least 4");
  const int n = g.dimension();

  c.stage("metric_audit", "metric symmetric and positive definite on the chart");
  const int count = c.cfg.integer("/mass/audit_points", 16);
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<Vec> dirs = seeded_directions(n, count, c.seed);
  double asym = 0.0, min_eig = std::numeric_limits<double>::infinity();
  for (const Vec& d : dirs) {
    const double r = radii.front() + unit(rng) * (radii.back() - radii.front());
    const Mat gx = g(r * d);
    asym = std::max(asym, (gx - gx.transpose()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(gx)};
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
  }
  c.manifest.audit(audit_at_most("metric_symmetry", asym, 0.0, c.anchor));
  c.manifest.audit(audit_at_least("metric_positive_definite", min_eig, 1e-12, c.anchor));

  c.stage("adm_mass", "ADM flux integral over coordinate spheres, extrapolated in radius");
  const MassReport rep = adm_mass(g, radii, order);
  c.report["mass"] = mass_report_json(rep);
  CsvTable table({"radius", "partial_mass"});
  for (std::size_t i = 0; i < radii.size(); ++i) table.add_row({radii[i], rep.partial_masses[i]});
  c.write("mass.csv", table.str());

  if (radii.size() >= 4) {
    c.stage("decay_audit", "decay of h, dh, ddh against the declared order");
    const DecayAudit da = decay_audit(g, radii);
    c.report["decay"] = {{"declared_order", number(da.declared_order)},
                         {"h_exponent", number(da.h.exponent)},
                         {"dh_exponent", number(da.dh.exponent)},
                         {"ddh_exponent", number(da.ddh.exponent)},
                         {"h_constant", number(da.h.constant)},
                         {"violation", da.violation}};
    Audit a = audit_at_most("decay_budget", da.violation ? 1.0 : 0.0, 0.0, c.anchor);
    a.inequality = "measured exponent <= declared order + 0.2";
    c.manifest.audit(a);
  }
  if (c.cfg.has("/mass/expected")) {
    const double expected = c.cfg.number("/mass/expected");
    const double tol = c.cfg.positive("/mass/tolerance", 0.01 * std::max(1.0, std::abs(expected)));
    Audit a = audit_at_most("mass_matches_expected", std::abs(rep.extrapolated - expected), tol,
                            "ADM mass equals the mass parameter of the model");
    a.inequality = "|m - expected| <= tolerance";
    c.manifest.audit(a);
  }
}

double oracle_value(const Context& c) {
  if (c.cfg.has("/solve/oracle/A")) return c.cfg.number("/solve/oracle/A");
  const fs::path file = c.cfg.base_dir() / c.cfg.string("/solve/oracle/file");
  std::ifstream in(file);
  if (!in) throw SchemaError("/solve/oracle/file", "cannot open " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("/solve/oracle/file", std::string("malformed oracle file: ") + e.what());
  }
  if (!j.contains("A") || !j["A"].is_number()) throw SchemaError("/solve/oracle/file", "oracle file lacks a numeric A");
  return j["A"].get<double>();
}

void cmd_solve(Context& c) {
  EllipticProblem problem{build_metric(c.cfg), build_potential(c.cfg, "/solve/potential"),
                          build_domain(c.cfg, "/solve/domain"),
                          build_controls(c.cfg, "/solve/controls")};
  c.stage("solve", "negative part of f small against the Sobolev constant; exhaustion limit");
  const ConformalFactorSolution sol = solve_conformal_factor(problem);

  json r;
  r["potential"] = problem.f.label;
  r["A_integral"] = number(sol.A_integral);
  r["A_fit"] = number(sol.A_fit);
  r["B_fit"] = number(sol.B_fit);
  r["omega_proxy"] = number(sol.omega_proxy);
  r["min_u"] = number(sol.min_u);
  r["energy"] = number(sol.energy);
  r["sobolev_constant"] = number(sol.sobolev_constant);
  r["smallness"] = {{"lhs", number(sol.smallness.lhs)},
                    {"threshold", number(sol.smallness.threshold)},
                    {"ratio", number(sol.smallness.ratio)}};
  r["C0"] = number(sol.C0);
  r["v_critical_norm"] = number(sol.v_critical_norm);
  r["energy_bound_holds"] = sol.energy_bound_holds;
  r["flux"] = {{"boundary_present", sol.flux.boundary_present},
               {"flux", number(sol.flux.flux)},
               {"weighted_flux", number(sol.flux.weighted_flux)},
               {"fd_flux", number(sol.flux.fd_flux)},
               {"fd_weighted_flux", number(sol.flux.fd_weighted_flux)}};
  r["final_truncation"] = number(sol.final_truncation);
  r["final_cylinder_length"] = number(sol.final_cylinder_length);
  r["levels"] = sol.levels;
  c.report["solution"] = r;

  CsvTable table({"region", "coordinate", "r", "t", "u"});
  for (std::size_t k = 0; k < sol.nodes.size(); ++k) {
    const LinePosition& p = sol.nodes[k];
    const char* region = p.region == LineRegion::cylinder ? "cylinder"
                         : p.region == LineRegion::ball   ? "ball"
                                                          : "end";
    table.add_row({region, format_number(sol.x[k]), format_number(p.r), format_number(p.t),
                   format_number(sol.u[k])});
  }
  c.write("solution.csv", table.str());
  std::vector<json> log;
  for (const IterationRecord& it : sol.log) {
    log.push_back({{"level", it.level},
                   {"step", it.step},
                   {"truncation_radius", number(it.truncation_radius)},
                   {"cylinder_length", number(it.cylinder_length)},
                   {"residual", number(it.residual)},
                   {"min_u", number(it.min_u)},
                   {"A_integral", number(it.A_integral)},
                   {"A_fit", number(it.A_fit)},
                   {"change", number(it.change)}});
  }
  c.write("iterations.jsonl", json_lines(log));

  c.stage("audits", "positive solution; flux identities on the inner boundary");
  Audit pos = audit_at_least("min_u_positive", sol.min_u, 0.0, c.anchor);
  pos.pass = sol.min_u > 0.0;
  pos.inequality = "min u > 0";
  c.manifest.audit(pos);
  if (sol.flux.boundary_present) {
    c.manifest.audit(audit_at_most("flux_vanishes", std::abs(sol.flux.flux), 1e-8, c.anchor));
    c.manifest.audit(audit_at_most("weighted_flux_bounded", sol.flux.weighted_flux, 1e-8, c.anchor));
  }
  Audit energy = audit_at_most("energy_bound", sol.energy_bound_holds ? 0.0 : 1.0, 0.0,
                               "critical norm of v bounded by the energy estimate");
  c.manifest.audit(energy);
  if (c.cfg.has("/solve/oracle")) {
    const double A = oracle_value(c);
    const double tol = c.cfg.positive("/solve/oracle/tolerance", 1e-4);
    Audit a = audit_at_most("oracle_match", std::abs(sol.A_integral - A),
                            tol * std::max(std::abs(A), 1e-3),
                            "expansion coefficient from an independent radial shooting run");
    a.inequality = "|A - A_oracle| <= tol max(|A_oracle|, 1e-3)";
    c.manifest.audit(a);
  }
}

void cmd_deform(Context& c) {
  const MetricSpec g = build_metric(c.cfg);
  const DensityOptions opt = build_density_options(c.cfg, "/deform");
  c.stage("density_deform", "nonnegative scalar curvature input; conformal correction per rung");
  const DensityRun run = density_deform(g, opt);

  json r;
  r["input_mass"] = number(run.input_mass);
  r["input_min_scalar"] = number(run.input_min_scalar);
  r["target_met"] = run.target_met;
  r["rungs"] = json::array();
  CsvTable table({"s", "zero_work", "sobolev_constant", "delta", "delta0", "volume", "lp_lhs",
                  "lp_threshold", "lp_margin", "ceiling_margin", "A_integral", "A_fit", "tau",
                  "mass_shift", "m_bar", "identity_residual", "min_scalar", "min_u_tau", "v_sup",
                  "end_norm", "bartnik_gap", "adm_shift", "adm_relative_error",
                  "scaled_transition", "transition_norm"});
  std::vector<json> log;
  for (const DensityPipelineState& st : run.rungs) {
    json j;
    j["s"] = number(st.s);
    j["zero_work"] = st.zero_work;
    j["sobolev_constant"] = number(st.sobolev_constant);
    j["delta"] = {{"delta", number(st.delta.delta)},
                  {"delta0", number(st.delta.delta0)},
                  {"volume", number(st.delta.volume)},
                  {"lhs", number(st.delta.lhs)},
                  {"threshold", number(st.delta.threshold)},
                  {"lp_margin", number(st.delta.lp_margin)},
                  {"ceiling_margin", number(st.delta.ceiling_margin)},
                  {"immediate", st.delta.immediate},
                  {"bisection_steps", st.delta.bisection_steps}};
    j["scalar_bounds"] = {{"min_inner", number(st.scalar.min_inner)},
                          {"max_abs_transition", number(st.scalar.max_abs_transition)},
                          {"scaled_transition", number(st.scalar.scaled_transition)},
                          {"sup_outer", number(st.scalar.sup_outer)},
                          {"transition_norm", number(st.scalar.transition_norm)}};
    j["A_integral"] = number(st.A_integral);
    j["A_fit"] = number(st.A_fit);
    j["tau"] = number(st.tau);
    j["mass_shift"] = number(st.mass_shift);
    j["m_bar"] = number(st.m_bar);
    j["identity_residual"] = number(st.identity_residual);
    j["min_scalar"] = number(st.min_scalar);
    j["min_u_tau"] = number(st.min_u_tau);
    j["v_sup"] = number(st.v_sup);
    j["end_norm"] = number(st.end_norm);
    j["bartnik_gap"] = number(st.bartnik_gap);
    j["bartnik_step"] = number(st.bartnik_step);
    j["adm_input"] = number(st.adm_input);
    j["adm_output"] = number(st.adm_output);
    j["adm_shift"] = number(st.adm_shift);
    j["adm_relative_error"] = number(st.adm_relative_error);
    r["rungs"].push_back(j);
    table.add_row(std::vector<double>{st.s, st.zero_work ? 1.0 : 0.0, st.sobolev_constant,
                                      st.delta.delta, st.delta.delta0, st.delta.volume,
                                      st.delta.lhs, st.delta.threshold, st.delta.lp_margin,
                                      st.delta.ceiling_margin, st.A_integral, st.A_fit, st.tau,
                                      st.mass_shift, st.m_bar, st.identity_residual, st.min_scalar,
                                      st.min_u_tau, st.v_sup, st.end_norm, st.bartnik_gap,
                                      st.adm_shift, st.adm_relative_error,
                                      st.scalar.scaled_transition, st.scalar.transition_norm});
    for (const IterationRecord& it : st.log) {
      log.push_back({{"s", number(st.s)},
                     {"level", it.level},
                     {"step", it.step},
                     {"truncation_radius", number(it.truncation_radius)},
                     {"residual", number(it.residual)},
                     {"min_u", number(it.min_u)},
                     {"A_integral", number(it.A_integral)},
                     {"change", number(it.change)}});
    }
  }
  c.report["deform"] = r;
  c.write("trend.csv", table.str());
  c.write("iterations.jsonl", json_lines(log));

  c.stage("audits", "delta admissibility; mass bookkeeping; sign of R of the output");
  bool any_work = false;
  for (const DensityPipelineState& st : run.rungs) {
    if (st.zero_work) {
      c.manifest.audit(audit_at_most(tag("zero_work_A", st.s), std::abs(st.A_integral), 0.0,
                                     "exact Schwarzschild input needs no correction"));
      continue;
    }
    any_work = true;
    c.manifest.audit(audit_at_least(tag("delta_lp_margin", st.s), st.delta.lp_margin, 0.0,
                                    "negative part of f at most c_S/2"));
    c.manifest.audit(audit_at_least(tag("delta_ceiling", st.s), st.delta.ceiling_margin, 0.0,
                                    "delta (1 + volume) <= 1/s"));
    c.manifest.audit(audit_at_least(tag("min_scalar", st.s), st.min_scalar, -1e-8,
                                    "output scalar curvature nonnegative"));
    c.manifest.audit(audit_at_most(tag("identity_residual", st.s), std::abs(st.identity_residual),
                                   identity_rounding(st.m_bar, run.input_mass),
                                   "m_bar - m = 2 A_s / (1 + tau)"));
    if (opt.verify_adm) {
      c.manifest.audit(audit_at_most(tag("adm_shift", st.s), st.adm_relative_error, 0.01,
                                     "measured ADM shift matches 2 A_s / (1 + tau)"));
    }
  }
  if (any_work && run.rungs.size() > 1) {
    double worst = 0.0;
    for (std::size_t i = 1; i < run.rungs.size(); ++i) {
      worst = std::max(worst, std::abs(run.rungs[i].A_integral) /
                                  std::max(std::abs(run.rungs[i - 1].A_integral), 1e-300));
    }
    Audit a = audit_at_most("A_decreasing", worst, 1.0, "|A_s| decreases as s grows");
    a.pass = worst < 1.0;
    a.inequality = "max |A_{s'}| / |A_s| < 1";
    c.manifest.audit(a);
  }
}

void cmd_compactify(Context& c) {
  const MetricSpec g = build_metric(c.cfg);
  const double s1 = c.cfg.positive("/compactify/s1", 8.0);
  const double side = c.cfg.number("/compactify/cube_side", 0.0);
  const int grid = c.cfg.integer("/compactify/grid", 9);

  c.stage("lohkamp_cutoff", "u < 1 on the sphere r = s1");
  const LohkampInput in = lohkamp_input(g, s1);
  const LohkampCutoffResult cut = lohkamp_cutoff(in);
  c.stage("check_superharmonic", "Delta v = zeta'' |grad u|^2 + zeta' Delta u <= 0");
  const SuperharmonicAudit sa = check_superharmonic(in, cut);
  c.manifest.audit(audit_at_most("superharmonic_max", sa.max_laplacian, 1e-10, c.anchor));
  c.manifest.audit(audit_at_most("superharmonic_strict", sa.min_transition_laplacian, -1e-6, c.anchor));
  c.manifest.audit(audit_at_most("superharmonic_closed_form", sa.closed_form_gap, 1e-8,
                                 "chain rule against the radial closed form"));
  json r;
  r["mass"] = number(in.mass);
  r["s1"] = number(s1);
  r["sup_u_on_sphere"] = number(cut.sup_on_sphere);
  r["epsilon"] = number(cut.epsilon);
  r["zeta"] = {{"lower", number(cut.zeta.lower)}, {"upper", number(cut.zeta.upper)},
               {"cap", number(cut.zeta.cap)}};
  r["superharmonic"] = {{"max_laplacian", number(sa.max_laplacian)},
                        {"min_transition_laplacian", number(sa.min_transition_laplacian)},
                        {"max_identity_laplacian", number(sa.max_identity_laplacian)},
                        {"max_plateau_laplacian", number(sa.max_plateau_laplacian)},
                        {"closed_form_gap", number(sa.closed_form_gap)},
                        {"max_harmonic_residual", number(sa.max_harmonic_residual)},
                        {"transition_inner", number(sa.transition_inner)},
                        {"transition_outer", number(sa.transition_outer)}};
  CsvTable lap({"r", "max_laplacian_v"});
  for (std::size_t i = 0; i < sa.radii.size(); ++i) lap.add_row({sa.radii[i], sa.laplacian[i]});
  c.write("superharmonic.csv", lap.str());
  c.report["compactify"] = r;
  if (!sa.pass) return;

  c.stage("lohkamp_metric", "R(g~) >= 0, positive somewhere, Euclidean beyond r_flat");
  const LohkampMetricResult lm = lohkamp_metric(in, cut, sa);
  c.manifest.audit(audit_at_least("scalar_nonnegative", lm.min_scalar, -1e-8, c.anchor));
  c.manifest.audit(audit_at_least("scalar_witness", lm.max_scalar, 1e-6, c.anchor));
  c.manifest.audit(audit_at_least("flat_outside", lm.constant_outside ? 1.0 : 0.0, 1.0, c.anchor));
  c.report["compactify"]["metric"] = {{"r_flat", number(lm.r_flat)},
                                      {"flat_scale", number(lm.flat_scale)},
                                      {"min_scalar", number(lm.min_scalar)},
                                      {"max_scalar", number(lm.max_scalar)},
                                      {"max_scalar_radius", number(lm.max_scalar_radius)},
                                      {"bartnik_gap", number(lm.bartnik_gap)}};

  c.stage("torus_glue", "opposite cube faces identified on a constant collar");
  const TorusChart tc = torus_glue(lm, side, grid);
  c.manifest.audit(audit_at_most("face_periodicity", tc.max_face_gap, 0.0, c.anchor));
  c.manifest.audit(audit_at_least("torus_scalar_nonnegative", tc.min_scalar, -1e-8, c.anchor));
  c.manifest.audit(audit_at_least("torus_scalar_witness", tc.max_scalar, 1e-6, c.anchor));
  const int n = tc.dimension;
  json header;
  header["schema"] = 1;
  header["dimension"] = n;
  header["cube_side"] = number(tc.side);
  header["grid_shape"] = json::array();
  for (int i = 0; i < n; ++i) header["grid_shape"].push_back(tc.grid);
  header["extra_ray_samples"] = 64;
  header["collar"] = number(tc.collar);
  header["flat_scale"] = number(lm.flat_scale);
  header["sampled"] = tc.sampled;
  header["skipped_interior"] = tc.skipped_interior;
  header["max_face_gap"] = number(tc.max_face_gap);
  header["min_scalar"] = number(tc.min_scalar);
  header["max_scalar"] = number(tc.max_scalar);
  c.write("torus_chart.json", header.dump(2) + "\n");
  std::vector<std::string> cols;
  for (int i = 0; i < n; ++i) cols.push_back("x" + std::to_string(i));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) cols.push_back("g" + std::to_string(i) + std::to_string(j));
  }
  cols.push_back("R");
  CsvTable samples(cols);
  for (const TorusSample& s : tc.samples) {
    std::vector<double> row;
    for (int i = 0; i < n; ++i) row.push_back(s.x(i));
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) row.push_back(s.g(i, j));
    }
    row.push_back(s.scalar);
    samples.add_row(row);
  }
  c.write("torus_chart.csv", samples.str());
}

void cmd_ale(Context& c) {
  const MetricSpec g = build_metric(c.cfg);
  const int n = g.dimension();
  const std::vector<double> radii = c.cfg.ladder("/ale/radii", 3);
  const int order = c.cfg.integer("/ale/quadrature_order", 24);
  c.stage("group", "finite orthogonal group acting freely on the sphere");
  const GroupAction G = build_group(c.cfg, "/ale/group", n);
  c.stage("ale_lift", "cover mass equals |Gamma| times the quotient mass");
  const AleLiftReport rep = ale_lift(g, G, radii, order);
  c.manifest.audit(audit_at_most("invariance", rep.invariance_gap, 1e-12, c.anchor));
  c.manifest.audit(audit_at_most("mass_ratio", rep.ratio_error, 1e-3, c.anchor));
  json r;
  r["group_order"] = rep.group_order;
  r["incompressible_declared"] = c.cfg.boolean("/ale/incompressible", false);
  r["invariance_gap"] = number(rep.invariance_gap);
  r["cover"] = mass_report_json(rep.cover);
  r["quotient"] = mass_report_json(rep.quotient);
  r["ratio"] = number(rep.ratio);
  r["ratio_error"] = number(rep.ratio_error);
  CsvTable table({"radius", "cover_partial_mass", "quotient_partial_mass"});
  for (std::size_t i = 0; i < radii.size(); ++i) {
    table.add_row({radii[i], rep.cover.partial_masses[i], rep.quotient.partial_masses[i]});
  }
  c.write("masses.csv", table.str());

  if (c.cfg.has("/ale/translation")) {
    c.stage("fixed_point", "finite group of affine isometries has a fixed point");
    const std::vector<double> t = c.cfg.numbers("/ale/translation");
    if (t.size() != static_cast<std::size_t>(n)) throw SchemaError("/ale/translation", "wrong length");
    Vec tv(n);
    for (int i = 0; i < n; ++i) tv(i) = t[i];
    const FixedPointResult fp = fixed_point_of_finite_group(conjugate_by_translation(G, tv));
    std::vector<double> p(fp.point.data(), fp.point.data() + n);
    r["fixed_point"] = {{"point", numbers(p)}, {"max_displacement", number(fp.max_displacement)}};
    c.manifest.audit(audit_at_most("fixed_point", (fp.point - tv).cwiseAbs().maxCoeff(), 1e-12, c.anchor));
  }
  c.report["ale"] = r;
}

void cmd_converge(Context& c) {
  const MetricSpec g = build_metric(c.cfg);
  const std::string op = c.cfg.string("/converge/operation", "scalar_curvature_bartnik");
  std::optional<double> exact;
  if (c.cfg.has("/converge/exact")) exact = c.cfg.number("/converge/exact");
  ConvergenceStudy st;
  c.stage(op, "observed order under refinement");
  if (op == "scalar_curvature_bartnik") {
    if (!exact && (g.family() == MetricFamily::schwarzschild || g.family() == MetricFamily::euclidean)) {
      exact = 0.0;
    }
    const std::vector<double> radii = c.cfg.numbers("/converge/radii", {2.0, 4.0, 8.0});
    st = scalar_curvature_study(g, radii, c.cfg.positive("/converge/h", 0.08),
                                c.cfg.integer("/converge/levels", 4), c.seed,
                                c.cfg.integer("/converge/directions", 4), exact);
  } else if (op == "adm_mass") {
    if (!exact && g.mass_parameter()) exact = *g.mass_parameter();
    st = mass_radius_study(g, c.cfg.ladder("/converge/radii", 3), exact,
                           c.cfg.integer("/converge/quadrature_order", 24));
  } else {
    throw SchemaError("/converge/operation", "unknown operation '" + op + "'");
  }
  CsvTable table({"step", "error", "order"});
  json rows = json::array();
  for (const ConvergenceRow& r : st.rows) {
    table.add_row({r.step, r.error, r.order});
    rows.push_back({{"step", number(r.step)}, {"error", number(r.error)}, {"order", number(r.order)}});
  }
  c.write("convergence.csv", table.str());
  c.report["converge"] = {{"operation", st.operation},
                          {"exact_reference", st.exact_reference},
                          {"rows", rows},
                          {"last_order", number(st.last_order)}};
  const double expected = c.cfg.number("/converge/expected_order", op == "adm_mass" ? 1.0 : 2.0);
  const double band = c.cfg.positive("/converge/order_tolerance", 0.2);
  c.manifest.audit(audit_at_least("order_lower", st.last_order, expected - band, c.anchor));
  c.manifest.audit(audit_at_most("order_upper", st.last_order, expected + band, c.anchor));
}

const std::map<std::string, std::function<void(Context&)>>& command_table() {
  static const std::map<std::string, std::function<void(Context&)>> table{
      {"mass", cmd_mass},         {"solve", cmd_solve}, {"deform", cmd_deform},
      {"compactify", cmd_compactify}, {"ale", cmd_ale}, {"converge", cmd_converge}};
  return table;
}

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const RegimeError*>(&e)) return "regime";
  if (dynamic_cast<const GluingError*>(&e)) return "gluing";
  if (dynamic_cast<const ConstructionError*>(&e)) return "construction";
  if (dynamic_cast<const InvarianceError*>(&e)) return "invariance";
  if (dynamic_cast<const PipelineError*>(&e)) return "pipeline";
  if (dynamic_cast<const PreconditionError*>(&e)) return "precondition";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const SolverError*>(&e)) return "solver";
  if (dynamic_cast<const EstimationError*>(&e)) return "estimation";
  if (dynamic_cast<const ExtractionError*>(&e)) return "extraction";
  if (dynamic_cast<const PositivityError*>(&e)) return "positivity";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "convergence";
  if (dynamic_cast<const DegeneracyError*>(&e)) return "degeneracy";
  return "internal";
}

}  // namespace

int run_command(const RunOptions& options, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& table = command_table();
  const auto cmd = table.find(options.command);
  if (cmd == table.end()) {
    err << "masskit: unknown command '" << options.command << "'\n";
    return kExitConfig;
  }
  std::optional<SceneConfig> cfg;
  try {
    cfg = SceneConfig::load(options.config);
  } catch (const SchemaError& e) {
    err << "masskit: config error at '" << e.pointer() << "': " << e.what() << "\n";
    return kExitConfig;
  }
  int threads = 1;
  if (options.threads) {
    threads = *options.threads;
  } else if (const char* env = std::getenv("MASSKIT_THREADS")) {
    threads = std::atoi(env);
  }
  if (threads < 1) {
    err << "masskit: thread count must be positive\n";
    return kExitConfig;
  }
  set_thread_count(threads);

  std::uint64_t seed = 0;
  fs::path out_dir;
  try {
    seed = options.seed ? *options.seed : cfg->seed();
    out_dir = options.out ? *options.out : fs::path(cfg->output_dir());
  } catch (const SchemaError& e) {
    err << "masskit: config error at '" << e.pointer() << "': " << e.what() << "\n";
    return kExitConfig;
  }

  RunManifest manifest(options.command, cfg->hash());
  json report;
  report["schema"] = 1;
  report["command"] = options.command;
  report["config_hash"] = cfg->hash();
  report["seed"] = seed;
  Context ctx{*cfg, out_dir, seed, manifest, report, {}, {}};
  int code = kExitOk;
  try {
    cmd->second(ctx);
  } catch (const std::exception& e) {
    code = exit_code_for(e);
    json error{{"kind", error_kind(e)}, {"message", e.what()}, {"exit_code", code}};
    std::ostringstream line;
    line << "masskit: " << error_kind(e) << " error: " << e.what();
    if (const auto* p = dynamic_cast<const PreconditionError*>(&e); p && !p->inequality().empty()) {
      error["inequality"] = p->inequality();
      error["lhs"] = number(p->lhs());
      error["rhs"] = number(p->rhs());
      error["margin"] = number(p->rhs() - p->lhs());
      line << "; violated " << p->inequality() << " with lhs = " << format_number(p->lhs())
           << ", rhs = " << format_number(p->rhs());
    }
    if (const auto* s = dynamic_cast<const SchemaError*>(&e)) error["pointer"] = s->pointer();
    if (!ctx.anchor.empty()) {
      error["anchor"] = ctx.anchor;
      line << " [" << ctx.anchor << "]";
    }
    report["error"] = error;
    manifest.stage(options.command, "error", e.what());
    err << line.str() << "\n";
  }
  if (code == kExitOk && !manifest.all_pass()) {
    code = kExitAudit;
    for (const Audit& a : manifest.audits()) {
      if (a.pass) continue;
      err << "masskit: audit FAIL " << a.name << ": " << a.inequality << " with lhs = "
          << format_number(a.lhs) << ", rhs = " << format_number(a.rhs) << " [" << a.anchor << "]\n";
    }
  }
  report["exit_code"] = code;

  try {
    for (const auto& [name, content] : ctx.files) atomic_write(out_dir / name, content);
    atomic_write(out_dir / "report.json", report.dump(2) + "\n");
    atomic_write(out_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json timing{{"command", options.command}, {"wall_seconds", wall}, {"threads", threads}};
    atomic_write(out_dir / "timing.json", timing.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "masskit: cannot write outputs: " << e.what() << "\n";
    return kExitConfig;
  }
  out << "masskit " << options.command << ": " << (code == kExitOk ? "PASS" : "FAIL") << " ("
      << manifest.audits().size() << " audits) -> " << out_dir.string() << "\n";
  return code;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"masskit: ADM mass, conformal factor and end-surgery workbench"};
  app.require_subcommand(1, 1);
  RunOptions opt;
  std::string out_dir;
  int threads = 0;
  std::uint64_t seed = 0;
  for (const char* name : {"mass", "solve", "deform", "compactify", "ale", "converge"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config, "scene configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "seed for sampled audit points");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int rc = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return rc == 0 ? kExitOk : kExitConfig;
  }
  CLI::App* sub = app.get_subcommands().front();
  opt.command = sub->get_name();
  if (sub->count("--out")) opt.out = out_dir;
  if (sub->count("--threads")) opt.threads = threads;
  if (sub->count("--seed")) opt.seed = seed;
  return run_command(opt, out, err);
}

}  // namespace masskit
