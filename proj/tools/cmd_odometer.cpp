#include "cli_common.hpp"

#include "cocycle/evc.hpp"
#include "cocycle/odometer.hpp"
#include "cocycle/squashable_odometer.hpp"

#include <memory>
#include <random>

namespace cocycle::cli {

namespace {

struct OdometerOptions {
  std::vector<std::uint64_t> mu, nu;
  double c = 2.0;
  std::size_t samples = 100;
  bool evc = false;
  std::string trace;
  std::size_t trace_length = 1000;
};

// points above this are too many for the exhaustive rigid check
constexpr std::uint64_t max_evc_period = 50'000'000;

int run_odometer(const OdometerOptions& o, const GlobalOptions& g) {
  using namespace cocycle::odometer;
  if (o.mu.size() != o.nu.size() || o.mu.empty()) throw UsageError("--mu and --nu need the same positive length");
  const auto con = build_squashable_odometer({o.mu, o.nu});
  const auto s = squash_translation(con, o.c);
  std::mt19937_64 rng(g.seed);

  Report r("odometer");
  stamp(r, g);
  r.provenance()["parameters"] = {{"mu", o.mu}, {"nu", o.nu}, {"c", o.c}, {"samples", o.samples}, {"evc", o.evc}};
  Json& d = r.data();
  d["digits"] = con.spec.digits();
  d["period"] = to_fraction_string(Rational(con.spec.period_big()));
  d["squash"] = {{"r", s.r}, {"shift", s.shift.coords}, {"overflow_levels", s.overflow_levels}};
  d["levels"] = Json::array();

  std::vector<double> max_term(con.levels.size(), 0.0);
  std::vector<std::size_t> regular(con.levels.size(), 0);
  for (std::size_t t = 0; t < o.samples; ++t) {
    const auto x = random_point(con.spec, rng);
    for (const auto& def : coboundary_defect(con, s, x)) {
      if (!def.regular()) continue;
      ++regular[def.k - 1];
      max_term[def.k - 1] = std::max(max_term[def.k - 1], def.term);
    }
  }

  for (const auto& lvl : con.levels) {
    Json L = {{"k", lvl.k}, {"m", lvl.m}, {"a", lvl.a}, {"g", lvl.g}, {"witness", lvl.witness},
              {"window_matches", lvl.window_matches}};
    const std::string k = std::to_string(lvl.k);
    std::uint64_t min_matches = lvl.block_len;
    for (auto m : lvl.window_matches) min_matches = std::min(min_matches, m);
    r.verdict("window witnesses, level " + k, "#{v in window j : beta_k(v + n(j,k)) - beta_k(v) = g_k} >= 4^m/2",
              2 * min_matches >= lvl.block_len, min_matches, ">=", lvl.block_len / 2);

    const double bound = o.c * std::pow(static_cast<double>(lvl.m), 0.75) / static_cast<double>(lvl.nu);
    L["defect"] = {{"regular_samples", regular[lvl.k - 1]}, {"max_term", max_term[lvl.k - 1]}, {"bound", bound}};
    r.verdict("coboundary defect, level " + k, "|beta_k((Sx)_k) - c beta_k(x_k)| <= c m_k^{3/4} / nu_k",
              max_term[lvl.k - 1] <= bound, max_term[lvl.k - 1], "<=", bound,
              Json{{"regular_samples", regular[lvl.k - 1]}});

    const auto e = exceptional_mass(con, lvl.k);
    L["exceptional"] = {{"count", e.count}, {"bound", e.bound_count}, {"mass", exact_json(e.mass())}};
    r.verdict("exceptional mass, level " + k, "#{v : |beta_k(v)| >= m_k^{3/4}} <= e^{2 mu_k} a_k / sqrt(m_k)", e.pass,
              e.count, "<=", e.bound_count);
    d["levels"].push_back(std::move(L));
  }

  if (o.evc) {
    if (con.spec.period_big() > max_evc_period) {
      r.skipped("rigid EVC", "m(a Δ T^{-n} a) < m(a)/m_k and m(a ∩ [phi_n = g_k]) >= m(a)/2",
                "period " + to_fraction_string(Rational(con.spec.period_big())) + " above " +
                    std::to_string(max_evc_period));
    } else {
      const OdometerSystem sys(con.spec, con.cocycle);
      for (const auto& lvl : con.levels) {
        const auto alpha = level_partition(con, lvl.k);
        const Rational delta(1, static_cast<long>(lvl.m));
        const auto rep = evc::check_rigid_evc(
            sys, Window::ball(lvl.g, g.tolerance_or(1e-6)), alpha, delta,
            [&](std::uint32_t cell) { return std::vector<std::int64_t>{level_rigid_time(con, lvl.k, cell)}; },
            evc::MassRatio{Rational(1, 2), false});
        Rational worst_sd = 0;
        for (const auto& c : rep.cells) worst_sd = std::max(worst_sd, c.symmetric_difference);
        const std::string k = std::to_string(lvl.k);
        r.verdict("rigid EVC coverage, level " + k, "m(union of cells) >= 1 - 1/m_k", rep.coverage_pass,
                  exact_json(rep.covered_mass), ">=", exact_json(1 - delta));
        r.verdict("rigid EVC return, level " + k, "m(a Δ T^{-n} a) < m(a)/m_k", worst_sd < delta,
                  exact_json(worst_sd), "<", exact_json(delta));
        r.verdict("rigid EVC mass, level " + k, "m(a ∩ [phi_n in N(g_k, eps)]) >= m(a)/2", rep.failure_mass == 0,
                  rep.min_hit_ratio, ">=", 0.5, Json{{"failure_mass", exact_json(rep.failure_mass)}});
      }
    }
  }

  if (!o.trace.empty()) {
    auto f = open_csv(o.trace);
    const OdometerSystem sys(con.spec, con.cocycle);
    const auto x0 = con.spec.encode(random_point(con.spec, rng)).convert_to<Point>();
    f << "n,point,phi_n\n";
    for (std::size_t n = 0; n <= o.trace_length; ++n) {
      f << n << ',' << sys.advance(x0, static_cast<std::int64_t>(n)) << ','
        << sys.cocycle_sum(x0, static_cast<std::int64_t>(n)) << '\n';
    }
  }
  return emit(g, r);
}

}  // namespace

Runner add_odometer(CLI::App& app) {
  auto o = std::make_shared<OdometerOptions>();
  auto* sub = app.add_subcommand("odometer", "Build the squashable odometer cocycle and check its levels");
  sub->add_option("--mu", o->mu, "Comma-separated mu_k")->delimiter(',')->required();
  sub->add_option("--nu", o->nu, "Comma-separated nu_k")->delimiter(',')->required();
  sub->add_option("--c", o->c, "Squash factor in (1, e)")->capture_default_str();
  sub->add_option("--samples", o->samples, "Random points for the defect check")->capture_default_str();
  sub->add_flag("--evc", o->evc, "Run the rigid EVC check on every level");
  sub->add_option("--trace", o->trace, "Write an orbit trace CSV (n, point, phi_n)");
  sub->add_option("--trace-length", o->trace_length, "Steps in the orbit trace")->capture_default_str();
  return [o](const GlobalOptions& g) { return run_odometer(*o, g); };
}

}  // namespace cocycle::cli
