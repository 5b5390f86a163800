#include "fembem/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fembem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

std::shared_ptr<BoundaryCurve> make_curve(const ExperimentConfig& c) {
  if (c.geometry == "circle") return make_circle(c.radius);
  if (c.geometry == "kite") return make_kite();
  throw std::invalid_argument("unknown geometry preset: " + c.geometry);
}

double index_inside(const ExperimentConfig& c) { return c.coefficients == "free" ? 1.0 : c.n0; }

NormKind theorem_norm(Formulation f) { return f == Formulation::DG ? NormKind::DGPlus : NormKind::EnergyN; }
NormKind garding_norm(Formulation f) { return f == Formulation::DG ? NormKind::DG : NormKind::EnergyN; }

RunRecord base_record(const std::string& experiment, const ExperimentConfig& c, double k, int level, int p) {
  RunRecord r;
  r.experiment = experiment;
  r.formulation = to_string(c.formulation);
  r.geometry = c.geometry;
  r.coefficients = c.coefficients;
  r.realization = to_string(c.realization);
  r.k = k;
  r.level = level;
  r.p = p;
  r.n0 = index_inside(c);
  r.pen_a = c.pen.a;
  r.pen_b = c.pen.b;
  r.pen_d = c.pen.d;
  r.seed = c.seed;
  return r;
}

void fill_sizes(RunRecord& r, const Discretization& d) {
  r.h = d.mesh.max_h();
  r.khp = r.k * r.h / r.p;
  r.ndof_u = d.spaces.V.ndof;
  r.ndof_m = d.spaces.W.ndof;
  r.ndof_ext = d.spaces.Z.ndof;
  r.t_volume = d.t_volume;
  r.t_bem = d.t_bem;
}

struct Truth {
  AnalyticTriple triple;
  std::function<cplx(const Vec2&)> f;
  std::function<cplx(double)> g, h;
};

Truth make_truth(const ExperimentConfig& c, double k, const CurvedMesh& mesh) {
  if (c.geometry != "circle") throw std::invalid_argument("exact solutions need the circle geometry");
  Truth t;
  if (c.coefficients == "disk" || c.coefficients == "free") {
    auto sol = std::make_shared<DiskTransmissionSolution>(
        solve_disk_series(k, c.radius, index_inside(c), c.incident_angle));
    t.triple = mie_triple(*sol);
    t.g = [sol](double th) { return sol->data_g(th); };
    t.h = [sol](double th) { return sol->data_h(th); };
    return t;
  }
  if (c.coefficients == "smooth") {
    SmoothField u = plane_wave_field(k * c.n0, c.incident_angle);
    auto ms = std::make_shared<ManufacturedSolution>(manufactured_solution(u, k, mesh.curve, mesh.partition));
    t.triple = smooth_triple(u, k, mesh.curve, mesh.partition);
    t.f = [ms](const Vec2& x) { return ms->f(x); };
    t.g = [ms](double s) { return ms->g(s); };
    t.h = [ms](double s) { return ms->h(s); };
    return t;
  }
  throw std::invalid_argument("unknown coefficient preset: " + c.coefficients);
}

// Solve one (k, level, p) problem and measure error and best approximation in the theorem norm.
RunRecord solve_and_measure(const std::string& experiment, const ExperimentConfig& c, double k, int level, int p) {
  Discretization d = discretize(c, k, level, p);
  RunRecord r = base_record(experiment, c, k, level, p);
  fill_sizes(r, d);
  Truth truth = make_truth(c, k, d.mesh);
  auto t0 = Clock::now();
  d.T.rhs = assemble_rhs(d.mesh, d.bmesh, d.spaces, truth.f, truth.g, truth.h);
  SolveResult s = solve_system(d.T, c.solver);
  r.t_solve = seconds_since(t0);
  r.residual = s.residual;
  r.valid = s.valid ? 1 : 0;
  t0 = Clock::now();
  EnergyNormContext ctx = make_norm_context(d.forms, d.mesh, d.bmesh, d.spaces, d.ops0, c.realization);
  NormKind nk = theorem_norm(c.formulation);
  ErrorParts e = error_parts(ctx, truth.triple, ThreeFieldVector::split(s.x, d.T.nu, d.T.nm, d.T.ne), nk);
  r.error = std::sqrt(e.total());
  r.error_vol = std::sqrt(e.vol);
  r.error_m = std::sqrt(e.m);
  r.error_ext = std::sqrt(e.ext);
  r.best = best_approximation_error(ctx, truth.triple, nk);
  r.ratio = r.error / r.best;
  r.t_measure = seconds_since(t0);
  return r;
}

double variation(const std::vector<double>& v) {
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo - 1.0;
}

}  // namespace

std::string to_string(DegreeRule r) { return r == DegreeRule::Fixed ? "fixed" : "log"; }

int ExperimentConfig::degree(double k) const {
  if (degree_rule == DegreeRule::Fixed) return p;
  return std::max(p_min, static_cast<int>(std::ceil(c2 * std::log(k))) + p_offset);
}

int ExperimentConfig::resolved_level(double k, int deg) const {
  std::vector<int> ls = levels;
  std::sort(ls.begin(), ls.end());
  auto part = single_subdomain(n0);
  for (int l : ls) {
    double h = build_disk_mesh(make_curve(*this), l, part).max_h();
    if (k * h / deg <= c1) return l;
  }
  return ls.back();
}

void ExperimentConfig::validate() const {
  if (ks.empty()) throw std::invalid_argument("config: k list is empty");
  for (double k : ks)
    if (!(k > 0.0)) throw std::invalid_argument("config: wavenumbers must be positive");
  if (levels.empty()) throw std::invalid_argument("config: level list is empty");
  for (int l : levels)
    if (l < 0 || l > 6) throw std::invalid_argument("config: levels must lie in 0..6");
  if (p < 1 || p_min < 1) throw std::invalid_argument("config: degrees must be at least 1");
  if (!(radius > 0.0) || !(n0 > 0.0)) throw std::invalid_argument("config: radius and n0 must be positive");
  if (!(c1 > 0.0) || !(c2 >= 0.0)) throw std::invalid_argument("config: resolution constants must be positive");
  if (eps_grid < 1) throw std::invalid_argument("config: eps grid needs at least one value");
  if (formulation == Formulation::DG) pen.validate();
}

ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  ExperimentConfig c = std::move(base);
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  if (j.contains("formulation")) c.formulation = formulation_from_string(j["formulation"].get<std::string>());
  get("geometry", c.geometry);
  get("radius", c.radius);
  get("coefficients", c.coefficients);
  get("n0", c.n0);
  get("incident_angle", c.incident_angle);
  get("k", c.ks);
  get("levels", c.levels);
  if (j.contains("degree_rule")) {
    std::string r = j["degree_rule"].get<std::string>();
    if (r == "fixed") c.degree_rule = DegreeRule::Fixed;
    else if (r == "log") c.degree_rule = DegreeRule::Log;
    else throw std::invalid_argument("config: unknown degree rule " + r);
  }
  get("p", c.p);
  get("p_min", c.p_min);
  get("p_offset", c.p_offset);
  get("c1", c.c1);
  get("c2", c.c2);
  if (j.contains("penalty")) {
    const auto& pj = j["penalty"];
    if (pj.contains("a")) c.pen.a = pj["a"].get<double>();
    if (pj.contains("b")) c.pen.b = pj["b"].get<double>();
    if (pj.contains("d")) c.pen.d = pj["d"].get<double>();
  }
  if (j.contains("realization")) c.realization = realization_from_string(j["realization"].get<std::string>());
  if (j.contains("solver")) c.solver = solver_from_string(j["solver"].get<std::string>());
  get("out", c.out_dir);
  get("seed", c.seed);
  get("ratio_bound", c.ratio_bound);
  get("eoc_min", c.eoc_min);
  get("eoc_max", c.eoc_max);
  get("garding_ratio_bound", c.garding_ratio_bound);
  get("continuity_exponent_bound", c.continuity_exponent_bound);
  get("t_exponent_bound", c.t_exponent_bound);
  get("eps_grid", c.eps_grid);
  get("control_k", c.control_k);
  get("control_p", c.control_p);
  get("control_khp", c.control_khp);
  get("assert_garding", c.assert_garding);
  c.validate();
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["formulation"] = to_string(c.formulation);
  j["geometry"] = c.geometry;
  j["radius"] = c.radius;
  j["coefficients"] = c.coefficients;
  j["n0"] = c.n0;
  j["incident_angle"] = c.incident_angle;
  j["k"] = c.ks;
  j["levels"] = c.levels;
  j["degree_rule"] = to_string(c.degree_rule);
  j["p"] = c.p;
  j["p_min"] = c.p_min;
  j["p_offset"] = c.p_offset;
  j["c1"] = c.c1;
  j["c2"] = c.c2;
  j["penalty"] = {{"a", c.pen.a}, {"b", c.pen.b}, {"d", c.pen.d}};
  j["realization"] = to_string(c.realization);
  j["solver"] = to_string(c.solver);
  j["out"] = c.out_dir;
  j["seed"] = c.seed;
  j["ratio_bound"] = c.ratio_bound;
  j["eoc_min"] = c.eoc_min;
  j["eoc_max"] = c.eoc_max;
  j["garding_ratio_bound"] = c.garding_ratio_bound;
  j["continuity_exponent_bound"] = c.continuity_exponent_bound;
  j["t_exponent_bound"] = c.t_exponent_bound;
  j["eps_grid"] = c.eps_grid;
  j["control_k"] = c.control_k;
  j["control_p"] = c.control_p;
  j["control_khp"] = c.control_khp;
  j["assert_garding"] = c.assert_garding;
  return j.dump(2);
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), std::move(base));
}

bool ExperimentResult::pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass || !v.asserted; });
}

double fit_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_exponent: need two or more points");
  double n = static_cast<double>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("fit_exponent: values must be positive");
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double den = n * sxx - sx * sx;
  if (den <= 0.0) throw std::invalid_argument("fit_exponent: x values must differ");
  return (n * sxy - sx * sy) / den;
}

Discretization discretize(const ExperimentConfig& c, double k, int level, int p) {
  Discretization d;
  auto t0 = Clock::now();
  d.mesh = build_disk_mesh(make_curve(c), level, single_subdomain(index_inside(c)));
  d.bmesh = induced_boundary_mesh(d.mesh);
  d.spaces = make_spaces(d.mesh, d.bmesh, c.formulation, p);
  d.forms = assemble_volume_forms(k, d.mesh, d.spaces, c.pen);
  d.t_volume = seconds_since(t0);
  t0 = Clock::now();
  d.ops = assemble_bem(k, d.bmesh, d.spaces.W, d.spaces.Z);
  d.ops0 = assemble_bem(0.0, d.bmesh, d.spaces.W, d.spaces.Z);
  d.mu = mean_vector(d.bmesh, d.spaces.Z);
  d.t_bem = seconds_since(t0);
  d.T = assemble_coupled(d.forms, d.ops);
  return d;
}

ExperimentResult run_convergence_study(const ExperimentConfig& c) {
  c.validate();
  ExperimentResult res;
  std::vector<int> ls = c.levels;
  std::sort(ls.begin(), ls.end());
  for (double k : c.ks) {
    const int p = c.degree(k);
    std::vector<RunRecord> rows;
    for (int l : ls) {
      RunRecord r = solve_and_measure("converge", c, k, l, p);
      if (!rows.empty()) {
        const RunRecord& q = rows.back();
        r.eoc = std::log(q.error / r.error) / std::log(q.h / r.h);
        r.eoc_best = std::log(q.best / r.best) / std::log(q.h / r.h);
      }
      rows.push_back(r);
    }
    bool eoc_ok = rows.size() >= 2, curve_ok = true, valid = true;
    double eoc_lo = 1e300, eoc_hi = -1e300, worst = 0.0;
    for (const RunRecord& r : rows) {
      valid = valid && r.valid;
      worst = std::max(worst, r.ratio);
      curve_ok = curve_ok && r.ratio <= 3.0;
      if (std::isnan(r.eoc)) continue;
      eoc_lo = std::min(eoc_lo, r.eoc);
      eoc_hi = std::max(eoc_hi, r.eoc);
      eoc_ok = eoc_ok && r.eoc >= c.eoc_min && r.eoc <= c.eoc_max;
    }
    std::string tag = to_string(c.formulation) + " k=" + fmt(k) + " p=" + std::to_string(p);
    res.verdicts.push_back({"EOC in [" + fmt(c.eoc_min) + ", " + fmt(c.eoc_max) + "] (" + tag + ")", eoc_ok,
                            "EOC range " + fmt(eoc_lo) + " .. " + fmt(eoc_hi)});
    res.verdicts.push_back({"error within 3x best approximation (" + tag + ")", curve_ok,
                            "largest ratio " + fmt(worst)});
    res.verdicts.push_back({"solver residual <= 1e-10 (" + tag + ")", valid, ""});
    res.records.insert(res.records.end(), rows.begin(), rows.end());
  }
  return res;
}

ExperimentResult run_quasioptimality_sweep(const ExperimentConfig& c) {
  c.validate();
  ExperimentResult res;
  double worst = 0.0, at_control = RunRecord::kNaN;
  bool valid = true;
  for (double k : c.ks) {
    const int p = c.degree(k);
    RunRecord r = solve_and_measure("quasiopt", c, k, c.resolved_level(k, p), p);
    valid = valid && r.valid;
    worst = std::max(worst, r.ratio);
    if (k == c.control_k) at_control = r.ratio;
    res.records.push_back(r);
  }
  res.verdicts.push_back({"ratios <= " + fmt(c.ratio_bound), worst <= c.ratio_bound, "largest ratio " + fmt(worst)});
  res.verdicts.push_back({"solver residual <= 1e-10", valid, ""});
  if (c.control_p > 0) {
    ExperimentConfig cc = c;
    cc.degree_rule = DegreeRule::Fixed;
    cc.p = c.control_p;
    int best_level = c.levels.front();
    double best_gap = 1e300;
    auto part = single_subdomain(c.n0);
    for (int l : c.levels) {
      double khp = c.control_k * build_disk_mesh(make_curve(c), l, part).max_h() / c.control_p;
      if (std::abs(khp - c.control_khp) < best_gap) {
        best_gap = std::abs(khp - c.control_khp);
        best_level = l;
      }
    }
    RunRecord r = solve_and_measure("quasiopt-control", cc, c.control_k, best_level, c.control_p);
    res.records.push_back(r);
    bool larger = !std::isnan(at_control) && r.ratio > at_control;
    res.verdicts.push_back({"negative control ratio exceeds the resolved ratio", larger,
                            "control " + fmt(r.ratio) + " (kh/p " + fmt(r.khp) + ") vs resolved " + fmt(at_control)});
  }
  return res;
}

ExperimentResult run_garding_experiment(const ExperimentConfig& c) {
  c.validate();
  ExperimentResult res;
  std::vector<double> mins;
  bool positive = true;
  for (double k : c.ks) {
    const int p = c.degree(k);
    const int level = c.resolved_level(k, p);
    Discretization d = discretize(c, k, level, p);
    RunRecord r = base_record("garding", c, k, level, p);
    fill_sizes(r, d);
    auto t0 = Clock::now();
    CoupledSystem A = d.T + assemble_theta(d.forms, d.ops, d.ops0, d.mu);
    EnergyNormContext ctx = make_norm_context(d.forms, d.mesh, d.bmesh, d.spaces, d.ops0, c.realization);
    GramSolver G(ctx, garding_norm(c.formulation));
    LanczosOptions opt;
    opt.seed = c.seed;
    ExtremeEigen best;
    double best_eps = 0.0;
    if (c.formulation == Formulation::Conforming) {
      best = generalized_extremes(garding_part(A, 0.0), G, 400, opt);
    } else {
      LanczosOptions screen = opt;
      screen.settle = 1e-5;
      best.min = -1e300;
      for (int j = 1; j <= c.eps_grid; ++j) {
        double eps = double(j) / (c.eps_grid + 1);
        ExtremeEigen e = generalized_extremes(garding_part(A, eps), G, 400, screen);
        if (e.min > best.min) {
          best = e;
          best_eps = eps;
        }
      }
      best = generalized_extremes(garding_part(A, best_eps), G, 400, opt);
    }
    r.garding_min = best.min;
    r.garding_max = best.max;
    r.eps = best_eps;
    r.valid = best.converged ? 1 : 0;
    r.t_measure = seconds_since(t0);
    positive = positive && best.min > 0.0;
    mins.push_back(best.min);
    res.records.push_back(r);
  }
  double lo = *std::min_element(mins.begin(), mins.end()), hi = *std::max_element(mins.begin(), mins.end());
  res.verdicts.push_back({"Garding eigenvalue > 0 at every k", positive, "smallest " + fmt(lo), c.assert_garding});
  res.verdicts.push_back({"Garding eigenvalue max/min <= " + fmt(c.garding_ratio_bound),
                          lo > 0.0 && hi / lo <= c.garding_ratio_bound, "ratio " + fmt(hi / lo), c.assert_garding});
  return res;
}

ExperimentResult run_continuity_experiment(const ExperimentConfig& c) {
  c.validate();
  ExperimentResult res;
  std::vector<double> ks, nT, nA;
  for (double k : c.ks) {
    const int p = c.degree(k);
    const int level = c.resolved_level(k, p);
    Discretization d = discretize(c, k, level, p);
    RunRecord r = base_record("continuity", c, k, level, p);
    fill_sizes(r, d);
    auto t0 = Clock::now();
    CoupledSystem A = d.T + assemble_theta(d.forms, d.ops, d.ops0, d.mu);
    EnergyNormContext ctx = make_norm_context(d.forms, d.mesh, d.bmesh, d.spaces, d.ops0, c.realization);
    GramSolver G(ctx, garding_norm(c.formulation));
    LanczosOptions opt;
    opt.seed = c.seed;
    opt.which = LanczosOptions::Which::Max;
    r.norm_T = energy_operator_norm(d.T, G, 400, opt);
    r.norm_T_theta = energy_operator_norm(A, G, 400, opt);
    r.t_measure = seconds_since(t0);
    ks.push_back(k);
    nT.push_back(r.norm_T);
    nA.push_back(r.norm_T_theta);
    res.records.push_back(r);
  }
  if (ks.size() >= 2) {
    double eA = fit_exponent(ks, nA), eT = fit_exponent(ks, nT);
    for (RunRecord& r : res.records) {
      r.value = eA;
      r.value2 = eT;
    }
    res.verdicts.push_back({"T + Theta growth exponent <= " + fmt(c.continuity_exponent_bound),
                            eA <= c.continuity_exponent_bound, "exponent " + fmt(eA)});
    res.verdicts.push_back({"T + Theta norms within a factor 2", 1.0 + variation(nA) <= 2.0,
                            "max/min " + fmt(1.0 + variation(nA))});
    res.verdicts.push_back({"T growth exponent <= " + fmt(c.t_exponent_bound), eT <= c.t_exponent_bound,
                            "exponent " + fmt(eT)});
  }
  return res;
}

ExperimentResult run_filter_experiment(const ExperimentConfig& c) {
  c.validate();
  ExperimentResult res;
  const int N = 256;
  const double eta = 0.5;
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
  CVector f(2 * N + 1);
  for (int n = -N; n <= N; ++n) f(n + N) = std::polar(1.0 / (1.0 + double(n) * n), ph(rng));
  double worst_split = 0.0, worst_mean = 0.0;
  std::vector<double> consts;
  for (double k : c.ks) {
    RunRecord r = base_record("filters", c, k, -1, 0);
    for (auto v : {FilterVariant::Plus, FilterVariant::Minus}) {
      auto hi = boundary_filter(f, c.radius, FilterKind::High, v, eta, k);
      auto lo = boundary_filter(f, c.radius, FilterKind::Low, v, eta, k);
      worst_split = std::max(worst_split, (hi.modes + lo.modes - f).norm() / f.norm());
      if (v == FilterVariant::Minus) worst_mean = std::max(worst_mean, std::abs(hi.modes(N)) / f.norm());
    }
    r.value = filter_bound_ratio(f, 1.5, 0.5, FilterVariant::Plus, eta, k);
    r.value2 = worst_split;
    consts.push_back(r.value);
    res.records.push_back(r);
  }
  res.verdicts.push_back({"high + low = identity to 1e-13", worst_split <= 1e-13, "error " + fmt(worst_split)});
  res.verdicts.push_back({"minus high-pass mean <= 1e-13", worst_mean <= 1e-13, "mean " + fmt(worst_mean)});
  double var = 1.0 + variation(consts);
  res.verdicts.push_back({"(3/2, 1/2) bound constant stable within a factor 2", var <= 2.0, "max/min " + fmt(var)});
  return res;
}

ExperimentResult run_jump_experiment(const ExperimentConfig& c) {
  c.validate();
  ExperimentResult res;
  const double k = c.ks.front();
  auto f = [](double t) { return cplx(std::exp(std::cos(t)), std::sin(2.0 * t)); };
  std::vector<int> ls = c.levels;
  std::sort(ls.begin(), ls.end());
  std::vector<double> errs;
  for (int l : ls) {
    auto mesh = build_disk_mesh(make_curve(c), l, single_subdomain(c.n0));
    auto bm = induced_boundary_mesh(mesh);
    RunRecord r = base_record("jumps", c, k, l, c.p);
    r.h = mesh.max_h();
    auto t0 = Clock::now();
    JumpErrors e = measure_jumps(k, bm, c.p, f);
    r.t_measure = seconds_since(t0);
    r.value = e.max();
    r.error_vol = e.single_value;
    r.error_m = e.single_flux;
    r.error_ext = e.double_value;
    r.value2 = e.double_flux;
    errs.push_back(r.value);
    res.records.push_back(r);
  }
  bool decay = true;
  for (size_t i = 1; i < errs.size(); ++i) decay = decay && errs[i] < errs[i - 1];
  res.verdicts.push_back({"jump errors decay under refinement", decay, ""});
  res.verdicts.push_back({"final jump error <= 1e-3", errs.back() <= 1e-3, "error " + fmt(errs.back())});
  return res;
}

ExperimentResult run_calderon_experiment(const ExperimentConfig& c) {
  c.validate();
  ExperimentResult res;
  const double k = c.ks.front();
  std::vector<int> ls = c.levels;
  std::sort(ls.begin(), ls.end());
  std::vector<double> vals;
  for (int l : ls) {
    auto mesh = build_disk_mesh(make_curve(c), l, single_subdomain(c.n0));
    auto bm = induced_boundary_mesh(mesh);
    RunRecord r = base_record("calderon", c, k, l, c.p);
    r.h = mesh.max_h();
    auto t0 = Clock::now();
    r.value = calderon_residual(k, bm, c.p);
    r.t_measure = seconds_since(t0);
    vals.push_back(r.value);
    res.records.push_back(r);
  }
  bool decay = true;
  for (size_t i = 1; i < vals.size(); ++i) decay = decay && vals[i] < vals[i - 1];
  res.verdicts.push_back({"Calderon residual decays monotonically", decay, ""});
  res.verdicts.push_back({"final Calderon residual <= 1e-4", vals.back() <= 1e-4, "residual " + fmt(vals.back())});
  return res;
}

ExperimentResult run_adjoint_experiment(const ExperimentConfig& c) {
  c.validate();
  ExperimentResult res;
  const double k = c.ks.front();
  const int level = c.levels.front();
  Discretization d = discretize(c, k, level, c.p);
  RunRecord r = base_record("adjoint", c, k, level, c.p);
  fill_sizes(r, d);
  auto rfun = [](const Vec2& x) { return cplx(1.0 + x[0], x[1] * x[1]); };
  auto Rm = [](double t) { return cplx(std::cos(t), std::sin(2.0 * t)); };
  auto Re = [](double t) { return cplx(0.5, std::cos(3.0 * t)); };
  auto t0 = Clock::now();
  CVector load = load_vector(d.mesh, d.bmesh, d.spaces, rfun, Rm, Re);
  CoupledSystem adj = assemble_adjoint(d.T, load);
  SolveResult psi = solve_system(adj, c.solver);
  r.residual = psi.residual;
  r.valid = psi.valid ? 1 : 0;
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    CVector phi(d.T.size());
    for (int i = 0; i < phi.size(); ++i) phi(i) = cplx(g(rng), g(rng));
    cplx lhs = d.T.form(phi, psi.x);
    cplx rhs = load.dot(phi);
    worst = std::max(worst, std::abs(lhs - rhs) / (phi.norm() * load.norm()));
  }
  r.value = worst;
  r.t_measure = seconds_since(t0);
  res.records.push_back(r);
  res.verdicts.push_back({"adjoint-consistency residual <= 1e-10", worst <= 1e-10 && psi.valid,
                          "residual " + fmt(worst)});
  return res;
}

ExperimentResult run_inverse_experiment(const ExperimentConfig& c) {
  c.validate();
  ExperimentResult res;
  std::vector<int> ls = c.levels;
  std::sort(ls.begin(), ls.end());
  auto part = single_subdomain(c.n0);
  std::vector<double> by_level, by_p;
  for (int l : ls) {
    auto bm = induced_boundary_mesh(build_disk_mesh(make_curve(c), l, part));
    RunRecord r = base_record("inverse", c, 0.0, l, c.p);
    r.inverse_constant = measure_inverse_inequality(bm, c.p, c.realization);
    by_level.push_back(r.inverse_constant);
    res.records.push_back(r);
  }
  const int mid = ls[ls.size() / 2];
  auto bm = induced_boundary_mesh(build_disk_mesh(make_curve(c), mid, part));
  for (int p = 1; p <= 4; ++p) {
    RunRecord r = base_record("inverse-p", c, 0.0, mid, p);
    r.inverse_constant = measure_inverse_inequality(bm, p, c.realization);
    by_p.push_back(r.inverse_constant);
    res.records.push_back(r);
  }
  double vl = variation(by_level), vp = variation(by_p);
  res.verdicts.push_back({"inverse constant varies <= 25% across levels", vl <= 0.25, "variation " + fmt(vl)});
  res.verdicts.push_back({"inverse constant varies <= 50% across p = 1..4", vp <= 0.5, "variation " + fmt(vp)});
  return res;
}

std::vector<std::string> experiment_names() {
  return {"converge", "quasiopt", "garding", "continuity", "filters", "jumps", "calderon", "adjoint", "inverse"};
}

ExperimentConfig default_config(const std::string& name) {
  ExperimentConfig c;
  const std::vector<double> sweep{2.0, 4.0, 8.0, 16.0};
  if (name == "converge") {
    c.ks = {4.0};
    c.levels = {1, 2, 3, 4};
    c.p = 2;
  } else if (name == "quasiopt" || name == "garding" || name == "continuity") {
    c.ks = sweep;
    c.levels = {0, 1, 2, 3};
    c.degree_rule = DegreeRule::Log;
  } else if (name == "filters") {
    c.ks = {4.0, 8.0, 16.0};
  } else if (name == "jumps" || name == "calderon") {
    c.ks = {2.0};
    c.levels = {1, 2, 3};
    c.p = 3;
  } else if (name == "adjoint") {
    c.formulation = Formulation::DG;
    c.ks = {4.0};
    c.levels = {2};
    c.p = 2;
  } else if (name == "inverse") {
    c.levels = {1, 2, 3};
    c.p = 2;
  } else {
    throw std::invalid_argument("unknown experiment: " + name);
  }
  return c;
}

ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& c) {
  if (name == "converge") return run_convergence_study(c);
  if (name == "quasiopt") return run_quasioptimality_sweep(c);
  if (name == "garding") return run_garding_experiment(c);
  if (name == "continuity") return run_continuity_experiment(c);
  if (name == "filters") return run_filter_experiment(c);
  if (name == "jumps") return run_jump_experiment(c);
  if (name == "calderon") return run_calderon_experiment(c);
  if (name == "adjoint") return run_adjoint_experiment(c);
  if (name == "inverse") return run_inverse_experiment(c);
  throw std::invalid_argument("unknown experiment: " + name);
}

}  // namespace fembem
