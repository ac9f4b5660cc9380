#include "bcpp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bcpp/config.hpp"
#include "bcpp/csv.hpp"
#include "bcpp/errors.hpp"
#include "bcpp/hydro.hpp"
#include "bcpp/kernels.hpp"
#include "bcpp/manifest.hpp"
#include "bcpp/moments.hpp"
#include "bcpp/pde.hpp"
#include "bcpp/process.hpp"

namespace bcpp {

namespace fs = std::filesystem;

namespace {

struct RunContext {
  fs::path dir;
  std::ostream& out;
  std::vector<std::string> outputs;
  std::vector<CheckResult> checks;

  void write(const std::string& file, const std::vector<CsvRow>& rows, const CsvSchema& schema) {
    write_csv(rows, schema, dir / file);
    outputs.push_back(file);
  }

  void check(std::string name, bool passed, double value, double threshold, std::string detail = {}) {
    out << (passed ? "[PASS] " : "[FAIL] ") << name << " value=" << format_real(value)
        << " threshold=" << format_real(threshold) << (detail.empty() ? "" : " " + detail) << "\n";
    checks.push_back({std::move(name), passed, value, threshold, std::move(detail)});
  }
};

Cell I(std::int64_t v) { return v; }
Cell R(double v) { return v; }
Cell T(std::string v) { return v; }

using Runner = std::function<void(const ConfigReader&, RunContext&)>;

struct Subcommand {
  std::string name;
  std::string description;
  Schema schema;
  Runner run;
};

KeySpec key(std::string name, ValueType type, std::string fallback, std::string help) {
  return {std::move(name), type, std::move(fallback), std::move(help)};
}

int as_int(const ConfigReader& r, const std::string& k) {
  const std::int64_t v = r.integer(k);
  if (v < -1000000000 || v > 1000000000) throw ConfigError("value of '" + k + "' is out of range", std::nullopt, k);
  return static_cast<int>(v);
}

std::uint64_t as_count(const ConfigReader& r, const std::string& k, std::uint64_t min) {
  const std::int64_t v = r.integer(k);
  if (v < static_cast<std::int64_t>(min)) {
    throw ConfigError("'" + k + "' must be >= " + std::to_string(min), std::nullopt, k);
  }
  return static_cast<std::uint64_t>(v);
}

std::vector<double> center_or_origin(const ConfigReader& r, const std::string& k, int d) {
  if (!r.has(k)) return std::vector<double>(static_cast<std::size_t>(std::max(d, 0)), 0.0);
  return r.real_list(k);
}

DensityProfile read_profile(const ConfigReader& r, int d) {
  DensityProfile p;
  try {
    p.kind = parse_profile_kind(r.text("profile.kind"));
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), std::nullopt, "profile.kind");
  }
  p.center = center_or_origin(r, "profile.center", d);
  p.radius = r.real("profile.radius");
  p.width = r.real("profile.width");
  p.height = r.real("profile.height");
  if (p.dim() != d) throw ConfigError("profile.center must have d components", std::nullopt, "profile.center");
  p.validate();
  return p;
}

TestFunction read_test_fn(const ConfigReader& r, int d) {
  TestFunction g;
  try {
    g.kind = parse_test_function_kind(r.text("test_fn.kind"));
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), std::nullopt, "test_fn.kind");
  }
  g.center = center_or_origin(r, "test_fn.center", d);
  g.radius = r.real("test_fn.radius");
  g.inner_radius = r.real("test_fn.inner_radius");
  if (g.dim() != d) throw ConfigError("test_fn.center must have d components", std::nullopt, "test_fn.center");
  g.validate();
  return g;
}

std::vector<KeySpec> profile_keys(const std::string& kind, const std::string& width) {
  return {key("profile.kind", ValueType::text, kind, "constant_bump, gaussian_bump or smooth_box"),
          key("profile.center", ValueType::real_list, "", "profile center (default: origin)"),
          key("profile.radius", ValueType::real, "0.5", "bump radius"),
          key("profile.width", ValueType::real, width, "gaussian width or fall-off width"),
          key("profile.height", ValueType::real, "1", "profile height")};
}

std::vector<KeySpec> test_fn_keys() {
  return {key("test_fn.kind", ValueType::text, "cosine_bump", "cosine_bump or polynomial_bump"),
          key("test_fn.center", ValueType::real_list, "", "test function center (default: origin)"),
          key("test_fn.radius", ValueType::real, "0.5", "support radius"),
          key("test_fn.inner_radius", ValueType::real, "0.25", "quadratic core radius (polynomial_bump)")};
}

Schema concat(Schema a, const std::vector<KeySpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void add_coordinate_columns(CsvSchema& schema, const std::string& prefix, int d) {
  for (int i = 0; i < d; ++i) schema.push_back({prefix + std::to_string(i), ColumnType::integer});
}

// simulate -------------------------------------------------------------------

void run_simulate(const ConfigReader& r, RunContext& ctx) {
  const int d = as_int(r, "d");
  const TorusGeometry geom(d, as_int(r, "L"));
  const double lambda = r.real("lambda");
  const int n = as_int(r, "N");
  const double t = r.real("t");
  if (!(t >= 0.0)) throw ConfigError("t must be >= 0", std::nullopt, "t");
  const DensityProfile profile = read_profile(r, d);
  ProcessState st = init_process(geom, lambda, profile, n, r.unsigned_integer("master_seed"));
  const double initial_mass = total_mass(st);
  st.advance(t);
  const std::vector<double> eta = field_values(st);
  const std::vector<std::uint8_t> xi = project_contact(st);

  CsvSchema field_schema;
  add_coordinate_columns(field_schema, "x", d);
  field_schema.push_back({"eta", ColumnType::real});
  field_schema.push_back({"xi", ColumnType::integer});
  std::vector<CsvRow> rows;
  for (std::size_t x = 0; x < eta.size(); ++x) {
    CsvRow row;
    for (int c : geom.coord_of_index(x)) row.push_back(I(c));
    row.push_back(R(eta[x]));
    row.push_back(I(xi[x]));
    rows.push_back(std::move(row));
  }
  ctx.write("simulate_field.csv", rows, field_schema);

  const CsvSchema summary_schema = {{"d", ColumnType::integer},          {"L", ColumnType::integer},
                                    {"lambda", ColumnType::real},        {"N", ColumnType::integer},
                                    {"t", ColumnType::real},             {"deaths", ColumnType::integer},
                                    {"infections", ColumnType::integer}, {"renormalizations", ColumnType::integer},
                                    {"initial_mass", ColumnType::real},  {"total_mass", ColumnType::real}};
  const EventCounts& c = st.event_counts();
  ctx.write("simulate_summary.csv",
            {{I(d), I(geom.side()), R(lambda), I(n), R(t), I(static_cast<std::int64_t>(c.deaths)),
              I(static_cast<std::int64_t>(c.infections)), I(static_cast<std::int64_t>(c.renormalizations)),
              R(initial_mass), R(total_mass(st))}},
            summary_schema);
}

// kernel ---------------------------------------------------------------------

void run_kernel(const ConfigReader& r, RunContext& ctx) {
  const int d = as_int(r, "d");
  const TorusGeometry geom(d, as_int(r, "L"));
  const double lambda = r.real("lambda");
  const double t = r.real("t");
  const KernelTable table = make_kernel_table(t, geom, lambda);
  CsvSchema schema = {{"d", ColumnType::integer}, {"L", ColumnType::integer}, {"lambda", ColumnType::real},
                      {"t", ColumnType::real}};
  add_coordinate_columns(schema, "dx", d);
  schema.push_back({"probability", ColumnType::real});
  std::vector<CsvRow> rows;
  double total = 0.0;
  for (std::size_t y = 0; y < geom.n_sites(); ++y) {
    CsvRow row = {I(d), I(geom.side()), R(lambda), R(t)};
    for (int c : geom.coord_of_index(y)) row.push_back(I(c));
    const double p = table.probability(0, y);
    total += p;
    row.push_back(R(p));
    rows.push_back(std::move(row));
  }
  ctx.write("kernel.csv", rows, schema);
  ctx.check("kernel_normalized", std::abs(total - 1.0) <= 1e-12, std::abs(total - 1.0), 1e-12);
}

// gamma ----------------------------------------------------------------------

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
  return s;
}

void run_gamma(const ConfigReader& r, RunContext& ctx) {
  const int d = as_int(r, "d");
  const std::vector<int> radii = r.int_list("R");
  ReturnMethod method;
  try {
    method = parse_return_method(r.text("method"));
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), std::nullopt, "method");
  }
  ReturnParams params;
  params.tolerance = r.real("tolerance");
  params.walks = as_count(r, "walks", 1);
  params.workers = as_int(r, "workers");
  if (radii.empty()) throw ConfigError("R must list one or two radii", std::nullopt, "R");
  double k = 0.0;
  double ci = 0.0;
  if (method == ReturnMethod::linear_solve) {
    params.solve_radii = radii;
    const ReturnTable table = return_table(d, 2, method, params, r.unsigned_integer("master_seed"));
    k = table.k_e1();
  } else {
    if (radii.size() != 1) throw ConfigError("monte_carlo takes a single escape radius", std::nullopt, "R");
    params.escape_radius = radii[0];
    std::vector<int> e1(static_cast<std::size_t>(d), 0);
    e1[0] = 1;
    const ReturnEstimate est = mc_return_probability(d, e1, params, r.unsigned_integer("master_seed"));
    k = est.k;
    ci = 1.96 * est.standard_error;
  }
  const double gamma = 1.0 - k;
  const CsvSchema schema = {{"d", ColumnType::integer},  {"R_solve", ColumnType::text}, {"method", ColumnType::text},
                            {"k_e1", ColumnType::real}, {"gamma", ColumnType::real},   {"ci", ColumnType::real}};
  ctx.write("gamma.csv", {{I(d), T(join_ints(radii)), T(std::string(to_string(method))), R(k), R(gamma), R(ci)}},
            schema);

  const double lambda = r.real("lambda");
  const CsvSchema cschema = {{"d", ColumnType::integer},          {"gamma", ColumnType::real},
                             {"lambda_critical", ColumnType::real}, {"lambda", ColumnType::real},
                             {"h_lambda", ColumnType::real},         {"h_positive", ColumnType::integer}};
  if (gamma > 0.5) {
    const HLambda h = h_lambda(lambda, d, gamma);
    ctx.write("constants.csv",
              {{I(d), R(gamma), R(lambda_critical_bound(d, gamma)), R(lambda), R(h.value), I(h.positive ? 1 : 0)}},
              cschema);
  } else {
    ctx.out << "gamma <= 1/2: no critical bound or h_lambda in this dimension\n";
  }
}

// moments --------------------------------------------------------------------

void run_moments(const ConfigReader& r, RunContext& ctx) {
  const int d = as_int(r, "d");
  const TorusGeometry geom(d, as_int(r, "L"));
  const double lambda = r.real("lambda");
  const std::vector<double> t_list = r.real_list("t_list");
  std::vector<double> eta0;
  if (r.has("eta0")) {
    eta0 = r.real_list("eta0");
    if (eta0.size() != geom.n_sites()) {
      throw ConfigError("eta0 must list L^d = " + std::to_string(geom.n_sites()) + " values", std::nullopt, "eta0");
    }
  } else {
    for (std::size_t x = 0; x < geom.n_sites(); ++x) eta0.push_back(0.5 + 0.5 * static_cast<double>(x % 3));
  }
  const double z_limit = r.real("z_limit");
  const PairGenerator gen = build_pair_generator(lambda, geom, PairKind::M_lambda);
  const std::vector<double> gamma0 = product_pairs(eta0);
  const PairMomentEstimate mc = mc_pair_moments(geom, lambda, eta0, t_list, as_count(r, "replicas", 2),
                                                r.unsigned_integer("master_seed"), as_int(r, "workers"));
  CsvSchema schema = {{"x", ColumnType::integer}, {"y", ColumnType::integer}};
  add_coordinate_columns(schema, "dx", d);
  for (const char* c : {"t", "gamma", "mc_mean", "se", "z"}) schema.push_back({c, ColumnType::real});
  std::vector<CsvRow> rows;
  double worst = 0.0;
  const std::size_t n = geom.n_sites();
  for (std::size_t ti = 0; ti < t_list.size(); ++ti) {
    const std::vector<double> g = evolve_pair_moments(gamma0, t_list[ti], gen);
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t y = 0; y < n; ++y) {
        const std::size_t p = x * n + y;
        const double se = mc.standard_error[ti][p];
        const double z = se > 0.0 ? (mc.mean[ti][p] - g[p]) / se : 0.0;
        worst = std::max(worst, std::abs(z));
        CsvRow row = {I(static_cast<std::int64_t>(x)), I(static_cast<std::int64_t>(y))};
        for (int c : geom.displacement(x, y)) row.push_back(I(c));
        for (double v : {t_list[ti], g[p], mc.mean[ti][p], se, z}) row.push_back(R(v));
        rows.push_back(std::move(row));
      }
    }
  }
  ctx.write("moments.csv", rows, schema);
  ctx.check("pair_moment_z", worst <= z_limit, worst, z_limit, "max |z| over pairs and times");
}

// bound-check ----------------------------------------------------------------

void run_bound_check(const ConfigReader& r, RunContext& ctx) {
  const int d = as_int(r, "d");
  const double lambda = r.real("lambda");
  const int radius = as_int(r, "R");
  const std::vector<double> t_list = r.real_list("t_list");
  ReturnParams params;
  params.solve_radii = r.int_list("R_solve");
  const ReturnTable k = return_table(d, radius, ReturnMethod::linear_solve, params, 0);
  const double gamma = gamma_d(k);
  const SecondMomentBound bound = second_moment_bound_table(lambda, d, gamma);
  const double h = bound.h;
  const PsiOperator psi = build_psi(lambda, d, radius);
  const PsiOperator psi2 = build_psi(lambda, d, 2 * radius);
  const BoxIndexer ball = psi.indexer();
  const BoxIndexer ball2 = psi2.indexer();
  const double tol = r.real("tolerance");
  const double delta_tol = r.real("delta_tolerance");

  CsvSchema schema;
  add_coordinate_columns(schema, "x", d);
  for (const char* c : {"t", "J", "bound", "ratio"}) schema.push_back({c, ColumnType::real});
  schema.push_back({"R", ColumnType::integer});
  schema.push_back({"R_doubled_delta", ColumnType::real});
  std::vector<CsvRow> rows;
  double worst_ratio = 0.0;
  double worst_delta = 0.0;
  for (double t : t_list) {
    const std::vector<double> j = evolve_J(t, psi);
    const std::vector<double> j2 = evolve_J(t, psi2);
    for (std::size_t i = 0; i < ball.size(); ++i) {
      const SiteCoord x = ball.coord(i);
      if (2 * linf_norm(x) > radius) continue;
      const double b = (k.at(x) + h) / h;
      const double delta = std::abs(j2[ball2.index(x)] - j[i]);
      worst_ratio = std::max(worst_ratio, j[i] / b);
      worst_delta = std::max(worst_delta, delta);
      CsvRow row;
      for (int c : x) row.push_back(I(c));
      for (double v : {t, j[i], b, j[i] / b}) row.push_back(R(v));
      row.push_back(I(radius));
      row.push_back(R(delta));
      rows.push_back(std::move(row));
    }
  }
  ctx.write("bound_check.csv", rows, schema);
  ctx.check("J_within_bound", worst_ratio <= 1.0 + tol, worst_ratio, 1.0 + tol, "max J/bound on the inner half-ball");
  ctx.check("R_doubling_delta", worst_delta < delta_tol, worst_delta, delta_tol,
            "max |J_2R - J_R| on the inner half-ball");
}

// positivity -----------------------------------------------------------------

void run_positivity(const ConfigReader& r, RunContext& ctx) {
  const int d = as_int(r, "d");
  const TorusGeometry geom(d, as_int(r, "L"));
  const double lambda = r.real("lambda");
  const double tol = r.real("tolerance");
  const CsvSchema schema = {{"d", ColumnType::integer}, {"L", ColumnType::integer}, {"lambda", ColumnType::real},
                            {"t", ColumnType::real},    {"min_entry", ColumnType::real}};
  std::vector<CsvRow> rows;
  double worst = std::numeric_limits<double>::infinity();
  for (double t : r.real_list("t_list")) {
    const double m = check_eq23_positivity(t, lambda, geom);
    worst = std::min(worst, m);
    rows.push_back({I(d), I(geom.side()), R(lambda), R(t), R(m)});
  }
  ctx.write("positivity.csv", rows, schema);
  ctx.check("min_entry", worst >= -tol, worst, -tol, "min entry of exp(tM) - exp(tC)");
}

// pde ------------------------------------------------------------------------

void run_pde(const ConfigReader& r, RunContext& ctx) {
  const int d = as_int(r, "d");
  const double lambda = r.real("lambda");
  const DensityProfile profile = read_profile(r, d);
  const TestFunction g = read_test_fn(r, d);
  const std::vector<double> t_list = r.real_list("t_list");
  const double h = r.real("grid_step");
  const int order = as_int(r, "gh_order");
  const int time_steps = as_int(r, "time_steps");
  const double weak_tol = r.real("weak_tolerance");
  double t_max = 0.0;
  for (double t : t_list) t_max = std::max(t_max, t);
  double box = r.real("box");
  if (box <= 0.0) box = std::ceil(2.0 * (profile.support_halfwidth() + 4.0 * std::sqrt(2.0 * lambda * t_max))) / 2.0;
  const HeatSolution rho(profile, lambda, order);
  const double fd_tol = std::max(1e-3, 3.0 * h * h);
  const bool gaussian = profile.kind == ProfileKind::gaussian_bump;

  CsvSchema schema = {{"t", ColumnType::real}};
  for (int i = 0; i < d; ++i) schema.push_back({"u" + std::to_string(i), ColumnType::real});
  for (const char* c : {"rho_explicit", "rho_fd", "abs_diff"}) schema.push_back({c, ColumnType::real});
  std::vector<CsvRow> rows;
  double worst_fd = 0.0;
  double worst_gauss = 0.0;
  const int stride = std::max(1, as_int(r, "sample_stride"));
  for (double t : t_list) {
    const GridSolution grid = fd_heat_solver(profile, t, lambda, h, box);
    // Cells along axis 0 through the cell nearest the profile center.
    std::size_t base = 0;
    std::size_t mul = 1;
    for (int a = 0; a < d; ++a) {
      if (a > 0) {
        const double c = profile.center[static_cast<std::size_t>(a)];
        const auto idx = static_cast<std::size_t>(
            std::clamp(static_cast<int>(std::floor((c + grid.half_width) / grid.step)), 0, grid.cells - 1));
        base += idx * mul;
      }
      mul *= static_cast<std::size_t>(grid.cells);
    }
    const double reach = profile.support_halfwidth() + 2.0 * std::sqrt(2.0 * lambda * t);
    for (int i = 0; i < grid.cells; i += stride) {
      const std::size_t idx = base + static_cast<std::size_t>(i);
      const std::vector<double> u = grid.cell_center(idx);
      if (std::abs(u[0] - profile.center[0]) > std::min(reach, grid.half_width - 4.0 * h)) continue;
      const double explicit_v = rho(t, u);
      const double diff = std::abs(explicit_v - grid.values[idx]);
      worst_fd = std::max(worst_fd, diff);
      if (gaussian) {
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
          const double du = u[static_cast<std::size_t>(a)] - profile.center[static_cast<std::size_t>(a)];
          r2 += du * du;
        }
        const double var = profile.width * profile.width + 2.0 * lambda * t;
        const double closed = profile.height * std::pow(profile.width * profile.width / var, 0.5 * d) *
                              std::exp(-0.5 * r2 / var);
        worst_gauss = std::max(worst_gauss, std::abs(closed - explicit_v));
      }
      CsvRow row = {R(t)};
      for (double v : u) row.push_back(R(v));
      for (double v : {explicit_v, grid.values[idx], diff}) row.push_back(R(v));
      rows.push_back(std::move(row));
    }
  }
  ctx.write("pde.csv", rows, schema);

  WeakQuadrature quad;
  quad.gh_order = order;
  const CsvSchema wschema = {{"t", ColumnType::real}, {"weak_residual", ColumnType::real}};
  std::vector<CsvRow> wrows;
  double worst_weak = 0.0;
  for (double t : t_list) {
    const double res = weak_residual(profile, g, t, lambda, time_steps, quad);
    worst_weak = std::max(worst_weak, std::abs(res));
    wrows.push_back({R(t), R(res)});
  }
  ctx.write("weak_residual.csv", wrows, wschema);
  ctx.check("fd_agreement", worst_fd <= fd_tol, worst_fd, fd_tol, "max |explicit - finite difference|");
  ctx.check("weak_residual", worst_weak <= weak_tol, worst_weak, weak_tol);
  if (gaussian) ctx.check("gaussian_closed_form", worst_gauss <= 1e-8, worst_gauss, 1e-8);
}

// hydro, variance, martingale -------------------------------------------------

std::vector<double> distinct_times(const ExperimentConfig& cfg) {
  std::vector<double> out;
  for (double t : cfg.t_list) {
    if (t > 0.0 && std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

template <class Row, class Get>
bool strictly_decreasing_in_N(const std::vector<Row>& rows, double t, Get get, double& last_value) {
  std::vector<std::pair<int, double>> pts;
  for (const Row& row : rows) {
    if (row.t == t) pts.emplace_back(row.N, get(row));
  }
  std::sort(pts.begin(), pts.end());
  bool ok = true;
  for (std::size_t i = 1; i < pts.size(); ++i) ok = ok && pts[i].second < pts[i - 1].second;
  last_value = pts.empty() ? 0.0 : pts.back().second;
  return ok;
}

std::string t_label(double t) { return "t=" + format_real(t); }

void run_hydro(const ConfigReader& r, RunContext& ctx) {
  const ExperimentConfig cfg = experiment_from(r);
  const std::vector<CellSample> cells = simulate_cells(cfg, false);
  const std::vector<ReportRow> rows = report_rows(cfg, cells);
  const CsvSchema schema = {{"d", ColumnType::integer},     {"lambda", ColumnType::real},
                            {"N", ColumnType::integer},     {"t", ColumnType::real},
                            {"replicas", ColumnType::integer}, {"mean_pairing", ColumnType::real},
                            {"variance", ColumnType::real}, {"target", ColumnType::real},
                            {"abs_error", ColumnType::real}, {"se", ColumnType::real}};
  std::vector<CsvRow> out;
  for (const ReportRow& row : rows) {
    out.push_back({I(cfg.d), R(cfg.lambda), I(row.N), R(row.t), I(static_cast<std::int64_t>(row.replicas)),
                   R(row.mean_pairing), R(row.variance), R(row.target), R(row.abs_error), R(row.standard_error)});
  }
  ctx.write("hydro.csv", out, schema);

  const std::vector<MassRow> mass = mass_rows(cfg, cells);
  const CsvSchema mschema = {{"d", ColumnType::integer},        {"lambda", ColumnType::real},
                             {"N", ColumnType::integer},        {"t", ColumnType::real},
                             {"replicas", ColumnType::integer}, {"mean_mass", ColumnType::real},
                             {"initial_mass", ColumnType::real}, {"se", ColumnType::real},
                             {"z", ColumnType::real}};
  std::vector<CsvRow> mout;
  double worst_z = 0.0;
  for (const MassRow& row : mass) {
    worst_z = std::max(worst_z, std::abs(row.z));
    mout.push_back({I(cfg.d), R(cfg.lambda), I(row.N), R(row.t), I(static_cast<std::int64_t>(row.replicas)),
                    R(row.mean_mass), R(row.initial_mass), R(row.standard_error), R(row.z)});
  }
  ctx.write("mass.csv", mout, mschema);
  ctx.check("mass_z", worst_z <= 3.0, worst_z, 3.0, "max |z| of mean total mass");
  if (cfg.N_list.size() >= 2) {
    for (double t : distinct_times(cfg)) {
      double last = 0.0;
      const bool err_ok = strictly_decreasing_in_N(rows, t, [](const ReportRow& x) { return x.abs_error; }, last);
      ctx.check("abs_error_decreasing_" + t_label(t), err_ok, last, 0.0, "abs error at the largest N");
      const bool var_ok = strictly_decreasing_in_N(rows, t, [](const ReportRow& x) { return x.variance; }, last);
      ctx.check("variance_decreasing_" + t_label(t), var_ok, last, 0.0, "variance at the largest N");
    }
  }
}

void run_variance(const ConfigReader& r, RunContext& ctx) {
  const ExperimentConfig cfg = experiment_from(r);
  const std::vector<VarianceRow> rows = variance_sweep(cfg);
  const CsvSchema schema = {{"d", ColumnType::integer},        {"lambda", ColumnType::real},
                            {"N", ColumnType::integer},        {"t", ColumnType::real},
                            {"replicas", ColumnType::integer}, {"variance", ColumnType::real},
                            {"ci_lower", ColumnType::real},    {"ci_upper", ColumnType::real}};
  std::vector<CsvRow> out;
  for (const VarianceRow& row : rows) {
    out.push_back({I(cfg.d), R(cfg.lambda), I(row.N), R(row.t), I(static_cast<std::int64_t>(row.replicas)),
                   R(row.variance), R(row.ci.lower), R(row.ci.upper)});
  }
  ctx.write("variance.csv", out, schema);
  const std::vector<EnvelopeFit> fits = fit_variance_envelope(rows, cfg.d);
  const CsvSchema eschema = {{"t", ColumnType::real}, {"c1", ColumnType::real}, {"c2", ColumnType::real}};
  std::vector<CsvRow> eout;
  for (const EnvelopeFit& f : fits) eout.push_back({R(f.t), R(f.c1), R(f.c2)});
  ctx.write("variance_envelope.csv", eout, eschema);
  for (double t : distinct_times(cfg)) {
    if (cfg.N_list.size() < 2) break;
    double last = 0.0;
    const bool ok = strictly_decreasing_in_N(rows, t, [](const VarianceRow& x) { return x.variance; }, last);
    ctx.check("variance_decreasing_" + t_label(t), ok, last, 0.0, "variance at the largest N");
  }
  for (const EnvelopeFit& f : fits) {
    if (f.t == 0.0) continue;
    ctx.check("envelope_nonnegative_" + t_label(f.t), f.c1 >= 0.0 && f.c2 >= 0.0, std::min(f.c1, f.c2), 0.0,
              "min(c1, c2)");
  }
}

void run_martingale(const ConfigReader& r, RunContext& ctx) {
  const ExperimentConfig cfg = experiment_from(r);
  const std::vector<MartingaleRow> rows = martingale_diagnostics(cfg);
  const CsvSchema schema = {{"d", ColumnType::integer},        {"lambda", ColumnType::real},
                            {"N", ColumnType::integer},        {"t", ColumnType::real},
                            {"replicas", ColumnType::integer}, {"mart_mean", ColumnType::real},
                            {"mart_var", ColumnType::real},    {"predicted_qv", ColumnType::real},
                            {"z_mean", ColumnType::real}};
  std::vector<CsvRow> out;
  double worst_z = 0.0;
  for (const MartingaleRow& row : rows) {
    worst_z = std::max(worst_z, std::abs(row.z_mean));
    out.push_back({I(cfg.d), R(cfg.lambda), I(row.N), R(row.t), I(static_cast<std::int64_t>(row.replicas)),
                   R(row.mean), R(row.variance), R(row.predicted_qv), R(row.z_mean)});
  }
  ctx.write("martingale.csv", out, schema);
  ctx.check("martingale_mean_z", worst_z <= 3.0, worst_z, 3.0, "max |mean / SE|");
  if (cfg.N_list.size() >= 3) {
    for (double t : distinct_times(cfg)) {
      std::vector<double> ns;
      std::vector<double> vs;
      for (const MartingaleRow& row : rows) {
        if (row.t == t) {
          ns.push_back(row.N);
          vs.push_back(row.variance);
        }
      }
      const double slope = loglog_slope(ns, vs);
      const double target = 2.0 - cfg.d;
      ctx.check("variance_slope_" + t_label(t), std::abs(slope - target) <= 0.5, slope, target,
                "log-log slope of Var(M) in N, tolerance 0.5");
    }
  }
}

// report ---------------------------------------------------------------------

void run_report(const ConfigReader& r, RunContext& ctx) {
  const fs::path runs = r.text("runs");
  const std::vector<fs::path> manifests = find_manifests(runs);
  const CsvSchema schema = {{"manifest", ColumnType::text}, {"subcommand", ColumnType::text},
                            {"config_hash", ColumnType::text}, {"check", ColumnType::text},
                            {"passed", ColumnType::integer}, {"value", ColumnType::real},
                            {"threshold", ColumnType::real}};
  std::vector<CsvRow> rows;
  std::size_t failed = 0;
  for (const fs::path& p : manifests) {
    const RunManifest m = read_manifest(p);
    if (m.subcommand == "report") continue;
    for (const CheckResult& c : m.checks) {
      rows.push_back({T(p.filename().string()), T(m.subcommand), T(m.config_hash), T(c.name), I(c.passed ? 1 : 0),
                      R(c.value), R(c.threshold)});
      ctx.out << (c.passed ? "[PASS] " : "[FAIL] ") << m.subcommand << " " << c.name << " value=" << format_real(c.value)
              << " threshold=" << format_real(c.threshold) << "\n";
      if (!c.passed) ++failed;
    }
  }
  ctx.write("report.csv", rows, schema);
  ctx.check("all_checks_passed", failed == 0, static_cast<double>(failed), 0.0,
            std::to_string(manifests.size()) + " manifests");
}

std::vector<Subcommand> subcommands() {
  const KeySpec output = key("output", ValueType::text, "out", "output directory");
  const KeySpec seed = key("master_seed", ValueType::integer, "1", "master seed (BCPP_SEED overrides)");
  const KeySpec workers = key("workers", ValueType::integer, "1", "worker threads");
  std::vector<Subcommand> subs;
  subs.push_back({"simulate", "run one BCPP path and write the final field",
                  concat({key("d", ValueType::integer, "3", "dimension"), key("L", ValueType::integer, "32", "torus side"),
                          key("lambda", ValueType::real, "0.6", "infection rate"),
                          key("N", ValueType::integer, "4", "scale: eta_0(x) = rho_0(x/N)"),
                          key("t", ValueType::real, "1", "microscopic time"), seed, output},
                         profile_keys("gaussian_bump", "0.25")),
                  run_simulate});
  subs.push_back({"kernel", "random-walk transition probabilities from the origin",
                  {key("d", ValueType::integer, "2", "dimension"), key("L", ValueType::integer, "5", "torus side"),
                   key("lambda", ValueType::real, "0.5", "jump rate per edge"),
                   key("t", ValueType::real, "1", "time"), output},
                  run_kernel});
  subs.push_back({"gamma", "return probability k(e1) and escape probability gamma_d",
                  {key("d", ValueType::integer, "3", "dimension"),
                   key("R", ValueType::int_list, "[40]", "solve radius, or two radii to extrapolate"),
                   key("method", ValueType::text, "linear_solve", "linear_solve or monte_carlo"),
                   key("walks", ValueType::integer, "1000000", "walks (monte_carlo)"),
                   key("tolerance", ValueType::real, "1e-12", "relative solver tolerance"),
                   key("lambda", ValueType::real, "0.6", "lambda for h_lambda"), seed, workers, output},
                  run_gamma});
  subs.push_back({"moments", "pair moments: uniformization against Monte Carlo",
                  {key("d", ValueType::integer, "1", "dimension"), key("L", ValueType::integer, "5", "torus side"),
                   key("lambda", ValueType::real, "0.5", "infection rate"),
                   key("t_list", ValueType::real_list, "[0.5, 1]", "microscopic times"),
                   key("replicas", ValueType::integer, "10000", "replicas"),
                   key("eta0", ValueType::real_list, "", "initial field, L^d values (default 0.5, 1, 1.5 repeating)"),
                   key("z_limit", ValueType::real, "4", "largest accepted |z|"), seed, workers, output},
                  run_moments});
  subs.push_back({"bound-check", "J_t against the second-moment bound on a truncated ball",
                  {key("d", ValueType::integer, "3", "dimension"), key("lambda", ValueType::real, "0.6", "infection rate"),
                   key("R", ValueType::integer, "8", "ball radius"),
                   key("t_list", ValueType::real_list, "[0.5, 1, 2]", "microscopic times"),
                   key("R_solve", ValueType::int_list, "[30, 40]", "solve radii for k"),
                   key("tolerance", ValueType::real, "1e-6", "relative slack on the bound"),
                   key("delta_tolerance", ValueType::real, "1e-4", "largest accepted R-doubling change"), output},
                  run_bound_check});
  subs.push_back({"positivity", "minimum entry of exp(tM) - exp(tC)",
                  {key("d", ValueType::integer, "1", "dimension"), key("L", ValueType::integer, "4", "torus side"),
                   key("lambda", ValueType::real, "0.5", "infection rate"),
                   key("t_list", ValueType::real_list, "[1]", "times"),
                   key("tolerance", ValueType::real, "1e-9", "accepted negative slack"), output},
                  run_positivity});
  subs.push_back({"pde", "explicit heat solution against finite differences and the weak form",
                  concat(concat({key("d", ValueType::integer, "2", "dimension"),
                                 key("lambda", ValueType::real, "0.7", "diffusion coefficient"),
                                 key("t_list", ValueType::real_list, "[0.5]", "times"),
                                 key("grid_step", ValueType::real, "0.025", "finite-difference step"),
                                 key("box", ValueType::real, "0", "box half-width (0: automatic)"),
                                 key("gh_order", ValueType::integer, "40", "Gauss-Hermite order"),
                                 key("time_steps", ValueType::integer, "21", "Simpson nodes in time"),
                                 key("sample_stride", ValueType::integer, "4", "compare every k-th cell"),
                                 key("weak_tolerance", ValueType::real, "1e-4", "largest accepted weak residual"),
                                 output},
                                profile_keys("gaussian_bump", "0.5")),
                         test_fn_keys()),
                  run_pde});
  subs.push_back({"hydro", "empirical-measure pairings against the heat solution", experiment_schema(), run_hydro});
  subs.push_back({"variance", "variance of the pairing across replicas", experiment_schema(), run_variance});
  subs.push_back({"martingale", "Dynkin martingale diagnostics", experiment_schema(), run_martingale});
  subs.push_back({"report", "summarize checks from run manifests",
                  {key("runs", ValueType::text, "out", "directory holding manifests"), output}, run_report});
  return subs;
}

std::string json_line(const nlohmann::json& j) { return j.dump(); }

}  // namespace

std::vector<std::string> subcommand_names() {
  std::vector<std::string> names;
  for (const Subcommand& s : subcommands()) names.push_back(s.name);
  return names;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv = {"bcpp"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const std::vector<Subcommand> subs = subcommands();
  CLI::App app{"Binary contact path process laboratory", "bcpp"};
  app.require_subcommand(1, 1);
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  std::map<std::string, std::string> config_paths;
  for (const Subcommand& s : subs) {
    CLI::App* sc = app.add_subcommand(s.name, s.description);
    sc->add_option("--config", config_paths[s.name], "key = value config file");
    for (const KeySpec& k : s.schema) {
      const std::string shown = k.fallback.empty() ? "derived" : k.fallback;
      options[s.name][k.key] = sc->add_option("--" + k.key, values[s.name][k.key], k.help + " [" + shown + "]");
    }
  }

  std::string sub_name = "?";
  auto fail = [&](int code, std::string_view kind, const std::string& message, std::optional<int> line = std::nullopt,
                  const std::string& bad_key = {}) {
    nlohmann::json j = {{"level", "error"}, {"subcommand", sub_name}, {"kind", kind},
                        {"message", message}, {"exit_code", code}};
    if (line) j["line"] = *line;
    if (!bad_key.empty()) j["key"] = bad_key;
    err << "error: " << message << "\n" << json_line(j) << "\n";
    return code;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << app.help();
    return fail(kExitConfig, "usage", e.what());
  }

  const auto it = std::find_if(subs.begin(), subs.end(), [&](const Subcommand& s) { return app.got_subcommand(s.name); });
  if (it == subs.end()) {
    err << app.help();
    return fail(kExitConfig, "usage", "no subcommand given");
  }
  const Subcommand& sub = *it;
  sub_name = sub.name;

  try {
    ConfigDocument doc;
    if (!config_paths[sub.name].empty()) {
      std::ifstream f(config_paths[sub.name], std::ios::binary);
      if (!f) throw ConfigError("cannot read config file " + config_paths[sub.name], std::nullopt, "config");
      std::stringstream ss;
      ss << f.rdbuf();
      doc = ConfigDocument::parse(ss.str());
    }
    for (const KeySpec& k : sub.schema) {
      if (options[sub.name][k.key]->count() > 0) doc.set(k.key, values[sub.name][k.key]);
    }
    if (const char* env = std::getenv("BCPP_SEED"); env != nullptr && *env != '\0') {
      const bool has_seed =
          std::any_of(sub.schema.begin(), sub.schema.end(), [](const KeySpec& k) { return k.key == "master_seed"; });
      if (has_seed) {
        if (!parse_integer(env)) throw ConfigError("BCPP_SEED is not an integer: '" + std::string(env) + "'", std::nullopt, "master_seed");
        doc.set("master_seed", env);
      }
    }
    const ConfigReader reader(doc, sub.schema);
    RunContext ctx{reader.text("output"), out, {}, {}};
    RunManifest manifest;
    manifest.subcommand = sub.name;
    manifest.canonical_config = reader.canonical();
    manifest.config_hash = sha256_hex(sub.name + "\n" + manifest.canonical_config);
    manifest.version = code_version();
    manifest.started = utc_timestamp();
    try {
      sub.run(reader, ctx);
    } catch (const ConfigError& e) {
      reader.rethrow_with_line(e);
    }
    manifest.finished = utc_timestamp();
    manifest.outputs = ctx.outputs;
    manifest.checks = ctx.checks;
    const std::string manifest_name = sub.name + "-" + manifest.config_hash.substr(0, 12) + ".manifest.json";
    write_manifest(manifest, ctx.dir / manifest_name);
    const int code = manifest.all_passed() ? kExitOk : kExitCheckFailed;
    nlohmann::json j = {{"level", code == kExitOk ? "info" : "warning"},
                        {"subcommand", sub.name},
                        {"kind", code == kExitOk ? "ok" : "check_failed"},
                        {"manifest", (ctx.dir / manifest_name).string()},
                        {"outputs", ctx.outputs},
                        {"exit_code", code}};
    err << json_line(j) << "\n";
    return code;
  } catch (const ConfigError& e) {
    return fail(kExitConfig, dynamic_cast<const DomainError*>(&e) ? "domain" : "config", e.what(), e.line(), e.key());
  } catch (const NumericError& e) {
    return fail(kExitInternal, "numeric", e.what());
  } catch (const InternalError& e) {
    return fail(kExitInternal, "internal", e.what());
  } catch (const std::exception& e) {
    return fail(kExitInternal, "internal", e.what());
  }
}

}  // namespace bcpp
