#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conbi/conbi.hpp"

using namespace conbi;
using io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDefect = 1;
constexpr int kExitInput = 2;
constexpr int kExitBudget = 3;

struct RunConfig {
  std::string space;
  std::vector<std::string> measures;
  std::string bicombing;
  std::string point;
  std::vector<std::string> properties;
  int n = 5;
  int max_size = 6;
  std::size_t samples = 200;
  double eps = 1e-9;
  std::uint64_t seed = 1;
  int grid = kDefaultGrid;
  long budget = kRetractBudget;
  std::string out;
  std::string csv;

  json echo(const std::string& command) const {
    return {{"command", command},     {"space", space},   {"measures", measures},       {"bicombing", bicombing},
            {"point", point},         {"properties", properties}, {"n", n},              {"max_size", max_size}, {"samples", samples},
            {"eps", eps},             {"seed", seed},     {"grid", grid},               {"budget", budget}};
  }
};

/// Collects results and defect reports into one document.
class Report {
 public:
  Report(const std::string& command, const RunConfig& cfg) : command_(command) {
    doc_["config"] = cfg.echo(command);
    doc_["results"] = json::object();
    doc_["reports"] = json::array();
  }

  json& results() { return doc_["results"]; }

  void add(const DefectReport& r) {
    doc_["reports"].push_back(io::to_json(r));
    if (!r.passed()) failed_ = true;
    std::cout << (r.passed() ? "[ok]   " : "[FAIL] ") << r.property << ": " << r.max_violation
              << " (tol " << r.tolerance << ", " << r.samples << " samples)\n";
  }

  void fail(const std::string& why) {
    failed_ = true;
    doc_["failures"].push_back(why);
    std::cout << "[FAIL] " << why << "\n";
  }

  int finish(const RunConfig& cfg) {
    doc_["status"] = failed_ ? "defect" : "ok";
    const std::string text = doc_.dump(2) + "\n";
    std::string path = cfg.out;
    if (path.empty()) {
      if (const char* dir = std::getenv("CONBI_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
        std::filesystem::create_directories(dir);
        path = (std::filesystem::path(dir) / (command_ + ".json")).string();
      }
    }
    if (path.empty()) {
      std::cout << text;
    } else {
      io::write_text(path, text);
      std::cout << "report: " << path << "\n";
    }
    return failed_ ? kExitDefect : kExitOk;
  }

  /// CSV next to the report unless a path is given.
  void write_csv(const RunConfig& cfg, const std::string& text) {
    std::string path = cfg.csv;
    if (path.empty() && !cfg.out.empty()) path = std::filesystem::path(cfg.out).replace_extension(".csv").string();
    if (path.empty()) {
      if (const char* dir = std::getenv("CONBI_OUTPUT_DIR"); dir != nullptr && *dir != '\0') {
        std::filesystem::create_directories(dir);
        path = (std::filesystem::path(dir) / (command_ + ".csv")).string();
      }
    }
    if (path.empty()) {
      doc_["csv"] = text;
      return;
    }
    io::write_text(path, text);
    std::cout << "csv: " << path << "\n";
  }

 private:
  std::string command_;
  json doc_;
  bool failed_ = false;
};

SpaceDescriptor load_space(const RunConfig& cfg, const char* fallback) {
  if (cfg.space.empty()) return io::parse_space(json{{"kind", fallback}});
  return io::parse_space(io::read_json_file(cfg.space));
}

TightSpan as_tight_span(const SpaceDescriptor& s) {
  if (const auto* f = std::get_if<FiniteSpace>(&s)) return TightSpan(f->metric);
  if (const auto* t = std::get_if<TightSpan>(&s)) return *t;
  throw InputError("this command needs a finite metric (kind 'finite' or 'tightspan')");
}

Bicombing<HalfPlane> halfplane_bicombing(const std::string& name, int grid) {
  if (name.empty() || name == "sigma-h") return sigma_h(grid);
  if (name == "linear") return linear_halfplane(grid);
  if (name.rfind("interp:", 0) == 0) {
    const double t = to_double(parse_rational(name.substr(7)));
    if (t < 0 || t > 1) throw InputError("interpolation parameter outside [0,1]");
    return interpolate(linear_halfplane(grid), sigma_h(grid), t, linear_halfplane(grid));
  }
  throw InputError("unknown bicombing '" + name + "' on the half-plane (linear, sigma-h, interp:<t>)");
}

Bicombing<LinfSpace> linf_bicombing(const LinfSpace& s, const std::string& name, int grid) {
  if (name.empty() || name == "linear") return linear_bicombing(s, grid);
  if (name == "twisted") {
    if (s.dim < 2) throw InputError("twisted bicombing needs dimension >= 2");
    return twisted_bicombing(s, 0.5, grid);
  }
  throw InputError("unknown bicombing '" + name + "' on linf (linear, twisted)");
}

Bicombing<TightSpan> tightspan_bicombing(const TightSpan& ts, const std::string& name, int grid) {
  if (name.empty() || name == "ex") return ex_bicombing(ts, kRetractTolerance, grid);
  throw InputError("unknown bicombing '" + name + "' on a tight span (ex)");
}

std::function<Vec()> point_sampler(const SpaceDescriptor& s, Rng& rng, double box = 4.0) {
  if (const auto* l = std::get_if<LinfSpace>(&s)) {
    const int dim = l->dim;
    return [&rng, dim, box] { return random_vec(rng, dim, box); };
  }
  if (std::holds_alternative<HalfPlane>(s)) return [&rng, box] { return random_halfplane_point(rng, box); };
  const TightSpan ts = as_tight_span(s);
  return [&rng, ts] { return random_tightspan_point(rng, ts); };
}

json vec_json(const Vec& v) { return io::to_json(v); }

// ---------------------------------------------------------------------------

int cmd_w1(const RunConfig& cfg) {
  if (cfg.measures.size() != 2) throw InputError("w1 needs exactly two --measure files");
  Report rep("w1", cfg);
  const auto space = load_space(cfg, "linf");
  const json a = io::read_json_file(cfg.measures[0]);
  const json b = io::read_json_file(cfg.measures[1]);
  if (const auto* f = std::get_if<FiniteSpace>(&space)) {
    const auto mu = io::parse_index_measure(f->metric, a);
    const auto nu = io::parse_index_measure(f->metric, b);
    const auto primal = w1_general(*f, mu, nu);
    const auto dual = kantorovich_dual(*f, mu, nu);
    json plan = json::array();
    for (const auto& row : primal.plan) {
      json r = json::array();
      for (const auto& v : row) r.push_back(to_string(v));
      plan.push_back(r);
    }
    rep.results() = {{"w1", to_string(primal.value)},
                     {"w1_double", to_double(primal.value)},
                     {"plan", plan},
                     {"dual_value", to_string(dual.value)},
                     {"dual_matches", dual.value == primal.value}};
    if (dual.value != primal.value) rep.fail("dual value differs from the primal optimum");
    std::cout << "W1 = " << to_string(primal.value) << " (" << to_double(primal.value) << ")\n";
    return rep.finish(cfg);
  }
  const auto mu = io::parse_vec_measure(a);
  const auto nu = io::parse_vec_measure(b);
  const double value = std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, FiniteSpace>) {
          return 0.0;
        } else {
          require_support(s, mu);
          require_support(s, nu);
          return w1_general(s, mu, nu).value;
        }
      },
      space);
  rep.results() = {{"w1", value}, {"space", kind_of(space)}};
  std::cout << "W1 = " << value << "\n";
  return rep.finish(cfg);
}

int cmd_tightspan(const RunConfig& cfg) {
  if (cfg.space.empty()) throw InputError("tightspan needs --space with a finite metric");
  Report rep("tightspan", cfg);
  const TightSpan ts = as_tight_span(load_space(cfg, "finite"));
  Rng rng(cfg.seed);
  json embedded = json::array();
  for (int i = 0; i < ts.base_size(); ++i) embedded.push_back(vec_json(embed(ts, static_cast<std::size_t>(i))));
  rep.results()["labels"] = ts.metric().labels();
  rep.results()["embedded"] = embedded;

  const double diam = ts.d().maxCoeff();
  auto raw = [&] {
    Vec f(ts.base_size());
    for (int i = 0; i < ts.base_size(); ++i) f[i] = uniform_real(rng, -diam, 2 * diam);
    return f;
  };
  std::vector<Sample<Vec>> pts, pairs;
  for (std::size_t k = 0; k < cfg.samples; ++k) pts.push_back({{random_tightspan_point(rng, ts)}, {}});
  for (std::size_t k = 0; k < cfg.samples; ++k) pairs.push_back({{raw(), raw()}, {}});
  rep.add(sweep("retract is the identity on E(X)", pts, 1e-12,
                [&](const Sample<Vec>& q) { return sup_distance(retract(ts, q.points[0]), q.points[0]); }));
  rep.add(sweep("retract is 1-Lipschitz", pairs, 1e-9, [&](const Sample<Vec>& q) {
    return sup_distance(retract(ts, q.points[0]), retract(ts, q.points[1])) - sup_distance(q.points[0], q.points[1]);
  }));
  rep.add(sweep("retract output is extremal", pairs, 1e-8, [&](const Sample<Vec>& q) {
    const Vec r = retract(ts, q.points[0]);
    return std::max(ts.residual(r), -ts.delta_slack(r));
  }));
  const auto ex = ex_bicombing(ts, kRetractTolerance, cfg.grid);
  auto gen = [&] { return random_tightspan_point(rng, ts); };
  rep.add(conical_defect(ex, make_samples<Vec>(rng, cfg.samples, 4, 1, cfg.grid, gen), 1e-8));
  rep.add(geodesic_defect(ex, make_samples<Vec>(rng, cfg.samples, 2, 2, cfg.grid, gen), 1e-8));
  return rep.finish(cfg);
}

int cmd_barycenter(const RunConfig& cfg) {
  if (cfg.measures.size() != 1) throw InputError("barycenter needs one --measure file");
  Report rep("barycenter", cfg);
  const auto space = load_space(cfg, "halfplane");
  const auto mu = io::parse_vec_measure(io::read_json_file(cfg.measures[0]));
  BarycenterConfig bc;
  bc.max_size = cfg.max_size;
  bc.inner_budget = cfg.budget;
  bc.eps = std::max(cfg.eps, 1e-12);
  auto emit = [&](const auto& r) {
    rep.results()["beta"] = vec_json(r.point);
    rep.results()["increments"] = r.increments;
    rep.results()["levels"] = r.levels;
    rep.results()["converged"] = r.converged;
    std::cout << "beta = " << vec_json(r.point).dump() << (r.converged ? "" : " (replication increments not settled)")
              << "\n";
  };
  if (std::holds_alternative<HalfPlane>(space)) {
    require_support(HalfPlane{}, mu);
    BarycenterEngine<HalfPlane> eng(halfplane_bicombing(cfg.bicombing, cfg.grid), bc);
    const auto r = beta_rational(mu, eng);
    emit(r);
    const Vec closed = beta_h(mu);
    rep.results()["beta_h"] = vec_json(closed);
    rep.results()["distance_to_beta_h"] = sup_distance(closed, r.point);
  } else if (const auto* l = std::get_if<LinfSpace>(&space)) {
    require_support(*l, mu);
    BarycenterEngine<LinfSpace> eng(linf_bicombing(*l, cfg.bicombing, cfg.grid), bc);
    emit(beta_rational(mu, eng));
  } else {
    throw InputError("barycenter supports the half-plane and linf spaces");
  }
  return rep.finish(cfg);
}

int cmd_halfplane_demo(const RunConfig& cfg) {
  Report rep("halfplane-demo", cfg);
  const auto [a, b] = halfplane_witness_pair();
  const Vec w = beta_h(DiscreteMeasure<Vec>({a, b}, {Rational(1, 2), Rational(1, 2)}));
  rep.results()["witness_barycenter"] = vec_json(w);
  std::cout << "beta((1/2) delta(-1,0) + (1/2) delta(1,0)) = " << vec_json(w).dump() << "\n";
  if (sup_distance(w, make_vec({0, 1})) > 1e-9) rep.fail("witness barycenter differs from (0,1)");
  const auto cert = distinctness_certificate(cfg.grid);
  rep.results()["sigma_h_midpoint"] = vec_json(cert.sigma_h_midpoint);
  rep.results()["linear_midpoint"] = vec_json(cert.linear_midpoint);
  rep.results()["d_o_lower_bound"] = cert.d_o_lower_bound;
  std::cout << "D_o(sigma_H, linear) >= " << cert.d_o_lower_bound << "\n";
  if (cert.d_o_lower_bound < 1.0 - 1e-9) rep.fail("D_o lower bound below 1");

  Rng rng(cfg.seed);
  auto gen = [&] { return random_halfplane_point(rng, 4); };
  const auto sh = sigma_h(cfg.grid);
  rep.add(conical_defect(sh, make_samples<Vec>(rng, cfg.samples, 4, 1, cfg.grid, gen), 1e-8));
  rep.add(geodesic_defect(sh, make_samples<Vec>(rng, cfg.samples, 2, 2, cfg.grid, gen), 1e-8));
  rep.add(reversibility_defect(sh, make_samples<Vec>(rng, cfg.samples, 2, 1, cfg.grid, gen), 1e-9));

  const int k = std::max(2, cfg.n);
  const auto fam = interpolation_family(k, cfg.grid);
  json dists = json::array();
  for (int i = 0; i + 1 < k; ++i) dists.push_back(d_o(fam[i], fam[i + 1], make_vec({0, 0}), {{a, b}}, 0).value);
  rep.results()["family_size"] = k;
  rep.results()["family_consecutive_d_o"] = dists;
  return rep.finish(cfg);
}

int cmd_doss(const RunConfig& cfg) {
  if (cfg.measures.size() != 1) throw InputError("doss needs one --measure file");
  Report rep("doss", cfg);
  const auto space = load_space(cfg, "linf");
  const json mj = io::read_json_file(cfg.measures[0]);
  std::optional<json> zj;
  if (!cfg.point.empty()) {
    try {
      zj = json::parse(cfg.point);
    } catch (const json::exception& e) {
      throw InputError(std::string("--point: ") + e.what());
    }
  }
  if (const auto* f = std::get_if<FiniteSpace>(&space)) {
    const auto mu = io::parse_index_measure(f->metric, mj);
    const auto set = doss_set_finite(*f, mu);
    json labels = json::array();
    for (auto i : set) labels.push_back(f->metric.labels()[i]);
    rep.results()["doss_set"] = labels;
    std::cout << "Doss set: " << labels.dump() << "\n";
    if (zj) {
      std::vector<std::size_t> all(f->size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      const auto c = doss_membership(*f, io::parse_index(f->metric, *zj), mu, all);
      rep.results()["member"] = c.member;
      rep.results()["witness"] = c.violating ? json(f->metric.labels()[*c.violating]) : json("none");
    }
    return rep.finish(cfg);
  }
  if (!zj) throw InputError("doss on a coordinate space needs --point");
  const Vec z = io::parse_vec(*zj);
  const auto mu = io::parse_vec_measure(mj);
  if (const auto* l = std::get_if<LinfSpace>(&space)) {
    require_support(*l, mu);
    if (!l->contains(z)) throw InputError("--point is not in the space");
    if (mu.size() <= 2) {
      WitnessSearchOptions opt;
      opt.seed = cfg.seed;
      opt.random_probes = cfg.samples;
      const Vec x = mu.atom(0), y = mu.atom(mu.size() - 1);
      const double t = mu.size() == 2 ? to_double(mu.weight(1)) : 0.0;
      const auto r = banach_witness_search(x, y, t, z, opt);
      rep.results()["probes"] = r.probes;
      rep.results()["witness"] = r.witness ? vec_json(*r.witness) : json("none within budget");
      if (r.witness) rep.results()["excess"] = r.excess;
      std::cout << "witness: " << rep.results()["witness"].dump() << "\n";
      return rep.finish(cfg);
    }
  }
  // General measures: atoms, z, far probes and random points of the space.
  Rng rng(cfg.seed);
  const auto gen = point_sampler(space, rng);
  std::vector<Vec> witnesses = mu.support();
  witnesses.push_back(z);
  for (double m : {10.0, 100.0, 1000.0}) {
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      for (double sgn : {-1.0, 1.0}) {
        Vec w = z;
        w[i] += sgn * m;
        witnesses.push_back(w);
      }
    }
  }
  for (std::size_t k = 0; k < cfg.samples; ++k) witnesses.push_back(gen());
  const bool ok = std::visit(
      [&](const auto& s) -> bool {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, FiniteSpace>) {
          return true;
        } else {
          require_support(s, mu);
          if (!s.contains(z)) throw InputError("--point is not in the space");
          std::vector<Vec> inside;
          for (const auto& w : witnesses) {
            if (s.contains(w)) inside.push_back(w);
          }
          const auto c = doss_membership(s, z, mu, inside);
          rep.results()["probes"] = c.witnesses;
          rep.results()["max_excess"] = c.max_excess;
          rep.results()["witness"] = c.violating ? vec_json(*c.violating) : json("none within budget");
          return c.member;
        }
      },
      space);
  rep.results()["member_on_probes"] = ok;
  std::cout << "witness: " << rep.results()["witness"].dump() << "\n";
  return rep.finish(cfg);
}

template <class Space>
void certify_properties(Report& rep, const RunConfig& cfg, const Bicombing<Space>& s, Rng& rng,
                        const std::function<Vec()>& gen) {
  std::vector<std::string> props = cfg.properties;
  if (props.empty()) props = {"conical", "geodesic", "reversibility"};
  const double tol = cfg.eps;
  const int m = cfg.grid;
  for (const auto& p : props) {
    if (p == "conical") {
      rep.add(conical_defect(s, make_samples<Vec>(rng, cfg.samples, 4, 1, m, gen), tol));
    } else if (p == "geodesic") {
      rep.add(geodesic_defect(s, make_samples<Vec>(rng, cfg.samples, 2, 2, m, gen), tol));
    } else if (p == "reversibility") {
      rep.add(reversibility_defect(s, make_samples<Vec>(rng, cfg.samples, 2, 1, m, gen), tol));
    } else if (p == "consistency") {
      rep.add(consistency_defect(s, make_samples<Vec>(rng, cfg.samples, 2, 3, m, gen), tol));
    } else if (p == "straightness") {
      rep.add(straightness_defect(s, make_samples<Vec>(rng, cfg.samples, 3, 2, m, gen), tol));
    } else if (p == "convexity") {
      rep.add(convexity_defect(s, make_samples<Vec>(rng, cfg.samples, 4, 2, m, gen), false, tol));
    } else if (p == "strengthened") {
      try {
        rep.add(strengthened_defect(s, make_samples<Vec>(rng, cfg.samples, 4, 1, m, gen), tol));
      } catch (const PreconditionError& e) {
        rep.fail(std::string("strengthened: refused: ") + e.what());
      }
    } else {
      throw InputError("unknown property '" + p +
                       "' (conical, geodesic, reversibility, consistency, straightness, convexity, strengthened)");
    }
  }
}

int cmd_certify(const RunConfig& cfg) {
  Report rep("certify", cfg);
  const bool on_tightspan = cfg.bicombing == "ex";
  const auto space = load_space(cfg, on_tightspan ? "tightspan" : (cfg.bicombing == "twisted" ? "linf" : "halfplane"));
  Rng rng(cfg.seed);
  const auto gen = point_sampler(space, rng);
  if (std::holds_alternative<HalfPlane>(space)) {
    const auto s = halfplane_bicombing(cfg.bicombing, cfg.grid);
    rep.results()["bicombing"] = s.name();
    certify_properties(rep, cfg, s, rng, gen);
  } else if (const auto* l = std::get_if<LinfSpace>(&space)) {
    const auto s = linf_bicombing(*l, cfg.bicombing, cfg.grid);
    rep.results()["bicombing"] = s.name();
    certify_properties(rep, cfg, s, rng, gen);
  } else {
    const auto s = tightspan_bicombing(as_tight_span(space), cfg.bicombing, cfg.grid);
    rep.results()["bicombing"] = s.name();
    certify_properties(rep, cfg, s, rng, gen);
  }
  return rep.finish(cfg);
}

template <class Space>
void improve_run(Report& rep, const RunConfig& cfg, const Bicombing<Space>& sigma, const Vec& o, Rng& rng,
                 const std::function<Vec()>& near) {
  if (cfg.n < 1) throw InputError("--n must be positive");
  auto cache = std::make_shared<ChainCache<Space>>(sigma);
  const auto& sp = sigma.space();

  // Chain uniqueness and spacing.
  double uniq = 0.0, spacing = 0.0;
  for (int n = 2; n <= std::min(cfg.n, 8); ++n) {
    for (int k = 0; k < 5; ++k) {
      const Vec x = near(), y = near();
      const auto c = cache->get(x, y, n);
      ChainOptions<Vec> opt;
      opt.initial = random_chain_init(sigma, x, y, n, rng);
      const auto c2 = chain_fixed_point(sigma, x, y, n, opt);
      for (int i = 0; i <= n; ++i) uniq = std::max(uniq, sp.distance(c.points[i], c2.points[i]));
      spacing = std::max(spacing, chain_spacing_defect(sp, c));
    }
  }
  rep.results()["chain_uniqueness"] = uniq;
  rep.results()["chain_spacing"] = spacing;
  if (uniq > 1e-7) rep.fail("chain fixed points from two initializations differ by " + std::to_string(uniq));
  if (spacing > 1e-8) rep.fail("chain spacing defect " + std::to_string(spacing));

  rep.add(composition_defect(cache, cfg.n, std::max(1, cfg.n / 2),
                             make_samples<Vec>(rng, std::min<std::size_t>(cfg.samples, 100), 2, 1, cfg.grid, near)));

  std::ostringstream csv;
  csv << "n,consistency,bound_2_over_n,d_o_next,bound_1_over_n_plus_1\n";
  std::vector<std::pair<Vec, Vec>> pairs;
  for (std::size_t k = 0; k < std::min<std::size_t>(cfg.samples, 60); ++k) pairs.push_back({near(), near()});
  for (int n = 1; n <= cfg.n; ++n) {
    auto cons = consistency_bound_check(cache, n, make_samples<Vec>(rng, cfg.samples, 2, 3, cfg.grid, near));
    auto cauchy = cauchy_check(cache, n, o, pairs);
    if (n == cfg.n) {
      rep.add(cons);
      rep.add(cauchy);
    } else if (!cons.passed() || !cauchy.passed()) {
      rep.add(cons);
      rep.add(cauchy);
    }
    csv << n << "," << cons.max_violation << "," << 2.0 / n << "," << cauchy.max_violation << "," << 1.0 / (n + 1)
        << "\n";
  }
  rep.write_csv(cfg, csv.str());
}

int cmd_improve(const RunConfig& cfg) {
  Report rep("improve", cfg);
  const bool on_tightspan = cfg.bicombing == "ex";
  const auto space = load_space(cfg, on_tightspan ? "tightspan" : "halfplane");
  Rng rng(cfg.seed);
  if (std::holds_alternative<HalfPlane>(space)) {
    const auto s = halfplane_bicombing(cfg.bicombing, cfg.grid);
    rep.results()["bicombing"] = s.name();
    improve_run(rep, cfg, s, make_vec({0, 0}), rng, [&] { return random_halfplane_point(rng, 1); });
  } else if (const auto* l = std::get_if<LinfSpace>(&space)) {
    const auto s = linf_bicombing(*l, cfg.bicombing, cfg.grid);
    rep.results()["bicombing"] = s.name();
    const int dim = l->dim;
    improve_run(rep, cfg, s, Vec::Zero(dim), rng, [&] { return random_vec(rng, dim, 1); });
  } else {
    const TightSpan ts = as_tight_span(space);
    const auto s = tightspan_bicombing(ts, cfg.bicombing, cfg.grid);
    rep.results()["bicombing"] = s.name();
    improve_run(rep, cfg, s, embed(ts, 0), rng, [&] { return random_tightspan_point(rng, ts); });
  }
  return rep.finish(cfg);
}

int cmd_extend(const RunConfig& cfg) {
  if (cfg.space.empty()) throw InputError("extend needs --space with a finite metric");
  Report rep("extend", cfg);
  const TightSpan ts = as_tight_span(load_space(cfg, "finite"));
  const auto sigma = tightspan_bicombing(ts, cfg.bicombing, cfg.grid);
  const double tol = std::max(cfg.eps, 1e-8);
  auto built = build_store(sigma, tol);
  rep.add(built.reversibility);
  if (built.strengthened.samples > 0) rep.add(built.strengthened);
  if (!built.store) {
    rep.fail("store gates failed; no extension attempted");
    return rep.finish(cfg);
  }
  auto store = std::make_shared<ConstraintStore>(std::move(*built.store));
  const std::size_t seeded = store->size();
  Rng rng(cfg.seed);
  auto gen = [&] { return random_tightspan_point(rng, ts); };
  const auto quads = make_samples<Vec>(rng, cfg.samples, 4, 1, cfg.grid, gen);
  const auto pairs = make_samples<Vec>(rng, std::max<std::size_t>(1, cfg.samples / 4), 2, 2, cfg.grid, gen);
  for (const auto& r : certify_extension(store, sigma, quads, pairs, std::max(cfg.eps, 1e-6))) rep.add(r);
  json entries = json::array();
  for (const auto& e : store->entries()) entries.push_back({{"measure", io::to_json(e.measure)}, {"value", vec_json(e.value)}});
  rep.results()["seeded_entries"] = seeded;
  rep.results()["store"] = entries;
  return rep.finish(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conical bicombings: Wasserstein tools, tight spans, barycenters and certification"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--space", cfg.space, "space description (JSON file)");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--samples", cfg.samples, "sample count")->check(CLI::PositiveNumber);
    sub->add_option("--grid", cfg.grid, "parameter grid denominator")->check(CLI::PositiveNumber);
    sub->add_option("--eps", cfg.eps, "tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--budget", cfg.budget, "iteration budget")->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out, "report path (default: $CONBI_OUTPUT_DIR/<command>.json or stdout)");
  };

  std::map<std::string, std::function<int(const RunConfig&)>> handlers;
  auto sub = [&](const std::string& name, const std::string& help, std::function<int(const RunConfig&)> fn) {
    CLI::App* s = app.add_subcommand(name, help);
    add_common(s);
    handlers[name] = std::move(fn);
    return s;
  };

  sub("w1", "W1 distance between two measures", cmd_w1)->add_option("--measure", cfg.measures, "measure file")->required();
  sub("tightspan", "tight span checks for a finite metric", cmd_tightspan);
  {
    auto* s = sub("barycenter", "barycenter of a measure from a bicombing", cmd_barycenter);
    s->add_option("--measure", cfg.measures, "measure file")->required();
    s->add_option("--bicombing", cfg.bicombing, "linear | sigma-h | interp:<t> | twisted");
    s->add_option("--n", cfg.max_size, "largest multiset size")->check(CLI::PositiveNumber);
  }
  sub("halfplane-demo", "half-plane barycenter witness and distinctness", cmd_halfplane_demo)
      ->add_option("--n", cfg.n, "interpolation family size");
  {
    auto* s = sub("doss", "Doss expectation membership", cmd_doss);
    s->add_option("--measure", cfg.measures, "measure file")->required();
    s->add_option("--point", cfg.point, "query point as JSON (index, label or coordinates)");
  }
  {
    auto* s = sub("certify", "defect report for a bicombing", cmd_certify);
    s->add_option("--bicombing", cfg.bicombing, "linear | sigma-h | interp:<t> | twisted | ex");
    s->add_option("--property", cfg.properties, "properties to check (repeatable)");
  }
  {
    auto* s = sub("improve", "chain fixed points, s^(n) consistency and D_o bounds", cmd_improve);
    s->add_option("--bicombing", cfg.bicombing, "linear | sigma-h | interp:<t> | twisted | ex");
    s->add_option("--n", cfg.n, "largest n")->check(CLI::PositiveNumber);
    s->add_option("--csv", cfg.csv, "CSV path for the per-n bounds");
  }
  {
    auto* s = sub("extend", "certified partial extension to the tight span", cmd_extend);
    s->add_option("--bicombing", cfg.bicombing, "ex");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    for (auto* s : app.get_subcommands()) return handlers.at(s->get_name())(cfg);
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
