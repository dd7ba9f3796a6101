#include "cli_common.hpp"

#include "cocycle/evc.hpp"
#include "cocycle/odometer.hpp"
#include "cocycle/squashable_odometer.hpp"

#include <memory>
#include <random>

namespace cocycle::cli {

namespace {

struct EvcCliOptions {
  std::string system = "odometer";
  // odometer
  std::vector<std::uint64_t> mu{1, 1}, nu{2, 3};
  std::size_t level = 1;
  std::optional<double> gamma;
  std::optional<std::string> eps;  // default 3/5 (odometer: rigid times give half of each cell), 1/10 (hopf)
  std::int64_t N = 0;
  std::string mode = "rigid";
  bool greedy = false;
  // accumulation
  std::string control = "none";
  // return machine
  std::uint64_t Q = 100000;
  double density = 0.5;
  double c = 1.0;
  std::uint64_t p = 100, q = 20;
};

Json histogram_json(const std::map<std::int64_t, std::uint64_t>& h) {
  Json out = Json::array();
  for (const auto& [n, cnt] : h) out.push_back({{"n", n}, {"count", cnt}});
  return out;
}

Json certificate_json(const evc::EvcCertificate& cert) {
  Json cells = Json::array();
  for (const auto& c : cert.cells) {
    cells.push_back({{"cell", c.cell},
                     {"cell_size", c.cell_size},
                     {"domain_size", c.domain_size},
                     {"domain_mass", exact_json(count_measure(c.domain_size, cert.space_size))},
                     {"witnessed", c.witnessed},
                     {"return_times", histogram_json(c.n_histogram)}});
  }
  return {{"window", {cert.window.lo, cert.window.hi}},
          {"slack", {{"eps", exact_json(cert.slack.eps)}, {"delta_sq", exact_json(cert.slack.delta_sq)}}},
          {"N", cert.N},
          {"failure_mass", exact_json(cert.failure_mass)},
          {"pass", cert.pass},
          {"cells", cells}};
}

void run_odometer_evc(const EvcCliOptions& o, const GlobalOptions& g, Report& r) {
  using namespace cocycle::odometer;
  if (o.mu.size() != o.nu.size() || o.mu.empty()) throw UsageError("--mu and --nu need the same positive length");
  const auto con = build_squashable_odometer({o.mu, o.nu});
  if (o.level < 1 || o.level > con.levels.size()) throw UsageError("--level out of range");
  const auto& lvl = con.levels[o.level - 1];
  const double target = o.gamma.value_or(lvl.g);
  const OdometerSystem sys(con.spec, con.cocycle);
  const auto alpha = level_partition(con, lvl.k);
  const auto rigid = [&](std::uint32_t cell) { return std::vector<std::int64_t>{level_rigid_time(con, lvl.k, cell)}; };
  Json& d = r.data();
  d["level"] = {{"k", lvl.k}, {"m", lvl.m}, {"a", lvl.a}, {"g", lvl.g}, {"target", target},
                {"cells", alpha.cell_count()}, {"space_size", sys.size()}};

  if (o.mode == "rigid") {
    const Rational delta(1, static_cast<long>(lvl.m));
    const auto rep = evc::check_rigid_evc(sys, Window::ball(target, g.tolerance_or(1e-6)), alpha, delta, rigid,
                                          evc::MassRatio{Rational(1, 2), false});
    Json cells = Json::array();
    Rational worst_sd = 0;
    for (const auto& c : rep.cells) {
      worst_sd = std::max(worst_sd, c.symmetric_difference);
      Json e = {{"cell", c.cell}, {"cell_size", c.cell_size}, {"returns", c.returns}, {"hits", c.hits},
                {"symmetric_difference", exact_json(c.symmetric_difference)}, {"pass", c.pass}};
      if (c.n) e["n"] = *c.n;
      cells.push_back(std::move(e));
    }
    d["rigid"] = {{"delta", exact_json(delta)}, {"covered_mass", exact_json(rep.covered_mass)},
                  {"failure_mass", exact_json(rep.failure_mass)}, {"min_hit_ratio", rep.min_hit_ratio},
                  {"cells", cells}};
    r.verdict("coverage", "m(union of cells) >= 1 - 1/m_k", rep.coverage_pass, exact_json(rep.covered_mass), ">=",
              exact_json(1 - delta));
    r.verdict("rigid return", "m(a Δ T^{-n} a) < m(a)/m_k", worst_sd < delta, exact_json(worst_sd), "<",
              exact_json(delta));
    r.verdict("rigid mass", "m(a ∩ [phi_n in N(gamma, eps)]) >= m(a)/2 off a set of mass <= 1/m_k", rep.pass,
              exact_json(rep.failure_mass), "<=", exact_json(delta));
    return;
  }

  const Rational eps = parse_rational(o.eps.value_or("3/5"));
  if (!(eps > 0)) throw UsageError("--eps must be positive");
  std::int64_t N = o.N;
  if (N == 0) N = static_cast<std::int64_t>(lvl.witness.back() * to_u64(con.spec.q(lvl.k), "q_k"));
  evc::EvcOptions opt;
  opt.keep_witnesses = false;
  if (!o.greedy) opt.candidates = rigid;
  const auto cert = evc::check_evc_finite(sys, Window::ball(target, to_double(eps)), evc::Slack{eps, 0}, alpha, N, opt);
  d["certificate"] = certificate_json(cert);
  r.verdict("EVC certificate", "m(a \\ dom R_a) < eps m(a) off a set of mass <= eps", cert.pass,
            exact_json(cert.failure_mass), "<=", exact_json(eps));
}

void run_accumulation(const EvcCliOptions& o, const GlobalOptions& g, Report& r) {
  using evc::AccumulationControl;
  std::mt19937_64 rng(g.seed);
  const auto control = o.control == "small-eps" ? AccumulationControl::small_first_epsilon
                       : o.control == "noisy"   ? AccumulationControl::noisy_second_level
                                                : AccumulationControl::none;
  const auto in = evc::desk_accumulation(control, rng);
  const auto rep = evc::accumulate_coboundaries(in);
  Json levels = Json::array();
  for (const auto& L : rep.levels) {
    const std::string k = std::to_string(L.k);
    Json e = {{"k", L.k},
              {"N", in.N[L.k - 1]},
              {"eps", exact_json(in.eps[L.k - 1])},
              {"certificate", certificate_json(L.partial)},
              {"expected_window", {L.expected_window.lo, L.expected_window.hi}}};
    r.verdict("partial sum EVC, level " + k, "sum_{j<=k} d_j has EVC(alpha_k, N(g, eps_k), eps_k)", L.evc_pass,
              exact_json(L.partial.failure_mass), "<=", exact_json(in.eps[L.k - 1]));
    if (L.k > 1) {
      e["tail"] = {{"mass", exact_json(L.tail_mass)}, {"bound", exact_json(L.tail_bound)}};
      r.verdict("tail mass, level " + k, "m(|d_k| >= eps_{k-1}/N_{k-1}) <= eps_{k-1}^2/N_{k-1}", L.tail_pass,
                exact_json(L.tail_mass), "<=", exact_json(L.tail_bound));
    }
    if (L.chained) {
      const auto& cw = L.chained->output_window;
      e["chained"] = {{"window", {cw.lo, cw.hi}}, {"bad_mass", exact_json(L.chained->bad_mass)},
                      {"hypothesis_bound", exact_json(L.chained->hypothesis_bound)},
                      {"failure_mass", exact_json(L.chained->certificate.failure_mass)}};
    }
    if (L.evc_pass) {
      r.verdict("full sum EVC, level " + k, "sum_j d_j has EVC(alpha_k, N(g, sum_{j>=k} eps_j), slack)", L.chain_pass,
                L.chained ? Json{L.chained->output_window.lo, L.chained->output_window.hi} : Json("none"), "within",
                Json{L.expected_window.lo, L.expected_window.hi});
    }
    levels.push_back(std::move(e));
  }
  r.data()["control"] = o.control;
  r.data()["levels"] = levels;
  if (rep.failed_level) r.data()["failed_level"] = *rep.failed_level;
  r.data()["failure"] = rep.failure;
}

void run_hopf(const EvcCliOptions& o, const GlobalOptions& g, Report& r) {
  std::mt19937_64 rng(g.seed);
  const auto A = evc::random_subset(o.Q, o.density, rng);
  const double eps = to_double(parse_rational(o.eps.value_or("1/10")));
  Json& d = r.data();
  d["set_size"] = A.size();
  try {
    const auto h = evc::hopf_return_machine(o.Q, A, o.c, eps, o.p, o.q);
    std::vector<std::uint8_t> in_A(o.Q, 0);
    for (auto x : A) in_A[x] = 1;
    const evc::PartialCheck chk =
        evc::verify_partial(CyclicSystem(std::vector<double>(o.Q, 0.0)), h.map, [&](Point x) { return in_A[x] == 1; });
    d["block_shift"] = h.block_shift;
    d["domain_size"] = h.map.size();
    d["ratio_range"] = {h.min_ratio, h.max_ratio};
    r.verdict("partial transformation", "R in [T]_+ with dom R, R(dom R) subset A", chk.ok(), chk.ok(), "==", true,
              chk.detail.empty() ? Json() : Json{{"detail", chk.detail}});
    const bool in_range = h.map.size() == 0 || (h.min_ratio >= 1 - eps && h.max_ratio <= 1 + eps);
    r.verdict("return times", "n_R(x) / (c p q) in [1 - eps, 1 + eps]", in_range, Json{h.min_ratio, h.max_ratio},
              "within", Json{1 - eps, 1 + eps});
    r.verdict("deficiency", "m(A \\ dom R) < eps", h.deficiency < exact(eps), exact_json(h.deficiency), "<", eps);
  } catch (const std::runtime_error& e) {
    r.verdict("deficiency", "m(A \\ dom R) < eps", false, e.what(), "<", eps);
  }
}

int run_evc(const EvcCliOptions& o, const GlobalOptions& g) {
  Report r("evc");
  stamp(r, g);
  Json par = {{"system", o.system}};
  if (o.system == "odometer") {
    par.update({{"mu", o.mu}, {"nu", o.nu}, {"level", o.level}, {"mode", o.mode}});
    if (o.gamma) par["gamma"] = *o.gamma;
    if (o.mode == "certificate") par.update({{"eps", o.eps.value_or("3/5")}, {"N", o.N}, {"greedy", o.greedy}});
    r.provenance()["parameters"] = par;
    run_odometer_evc(o, g, r);
  } else if (o.system == "accumulation") {
    par["control"] = o.control;
    r.provenance()["parameters"] = par;
    run_accumulation(o, g, r);
  } else {
    par.update({{"Q", o.Q}, {"density", o.density}, {"c", o.c}, {"eps", o.eps.value_or("1/10")}, {"p", o.p},
                {"q", o.q}});
    r.provenance()["parameters"] = par;
    run_hopf(o, g, r);
  }
  return emit(g, r);
}

}  // namespace

Runner add_evc(CLI::App& app) {
  auto o = std::make_shared<EvcCliOptions>();
  auto* sub = app.add_subcommand("evc", "Certify essential values on a finite system");
  sub->add_option("--system", o->system, "odometer, accumulation or hopf")
      ->check(CLI::IsMember({"odometer", "accumulation", "hopf"}))
      ->capture_default_str();
  sub->add_option("--mu", o->mu, "odometer: comma-separated mu_k")->delimiter(',')->capture_default_str();
  sub->add_option("--nu", o->nu, "odometer: comma-separated nu_k")->delimiter(',')->capture_default_str();
  sub->add_option("--level", o->level, "odometer: level k whose partition is used")->capture_default_str();
  sub->add_option("--gamma", o->gamma, "odometer: target value (default g_k)");
  sub->add_option("--eps", o->eps, "eps as p/q or decimal (odometer certificate 3/5, hopf 1/10)");
  sub->add_option("--N", o->N, "odometer certificate: return-time bound (default the largest rigid time)");
  sub->add_option("--mode", o->mode, "odometer: rigid or certificate")
      ->check(CLI::IsMember({"rigid", "certificate"}))
      ->capture_default_str();
  sub->add_flag("--greedy", o->greedy, "odometer certificate: try every n <= N instead of the rigid times");
  sub->add_option("--control", o->control, "accumulation: none, small-eps or noisy")
      ->check(CLI::IsMember({"none", "small-eps", "noisy"}))
      ->capture_default_str();
  sub->add_option("--Q", o->Q, "hopf: cycle order")->capture_default_str();
  sub->add_option("--density", o->density, "hopf: m(A) of the random set")->capture_default_str();
  sub->add_option("--c", o->c, "hopf: time factor")->capture_default_str();
  sub->add_option("--p", o->p, "hopf: block length")->capture_default_str();
  sub->add_option("--q", o->q, "hopf: block multiplier")->capture_default_str();
  return [o](const GlobalOptions& g) { return run_evc(*o, g); };
}

}  // namespace cocycle::cli
