#include "cli_common.hpp"

#include "cocycle/rotation.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <set>

namespace cocycle::cli {

namespace {

struct RotationOptions {
  std::vector<std::uint64_t> pq;
  std::vector<std::size_t> huge;
  std::uint64_t huge_threshold = 100;
  std::size_t p = 1;
  std::optional<double> c;
  std::string profile = "toy";
  std::size_t samples = 10000;
  std::size_t telescoping_samples = 20;
  std::uint64_t telescoping_max = 100000;
  std::size_t block_samples = 20;
  std::size_t rigid_samples = 30;
  std::uint64_t work_budget = 20'000'000;  // orbit steps per level for block and rigid sums
  std::string csv;
};

void write_bump_csv(const std::string& path, const rotation::RotationLevel& L) {
  auto f = open_csv(path);
  const auto& bump = L.bump;
  const long double W = bump.width_grid() / 4;
  const double Q = static_cast<double>(L.tower.Q());
  // breakpoints of the ramp on [0, W] and its mirror on [3W, 4W]
  std::set<long double> breaks = {0, 3 * W, 4 * W};
  for (const auto& b : bump.ramp().breaks()) {
    breaks.insert(static_cast<long double>(to_double(b)) * W);
    breaks.insert((4 - static_cast<long double>(to_double(b))) * W);
  }
  std::set<long double> points = breaks;
  for (std::size_t i = 0; i <= 2000; ++i) points.insert(4 * W * static_cast<long double>(i) / 2000);
  f << "position,value,derivative,is_breakpoint\n";
  f.precision(17);
  for (long double pos : points) {
    f << static_cast<double>(pos) / Q << ',' << bump.value(pos) << ',' << bump.derivative(1, pos) << ','
      << (breaks.count(pos) ? 1 : 0) << '\n';
  }
}

int run_rotation(const RotationOptions& o, const GlobalOptions& g) {
  using namespace cocycle::rotation;
  RotationParams params;
  params.quotients = o.pq;
  params.level_indices = o.huge.empty() ? huge_indices(o.pq, o.huge_threshold) : o.huge;
  params.p = o.p;
  params.profile = o.profile == "toy" ? Profile::toy : Profile::asymptotic;
  if (params.level_indices.empty()) throw UsageError("no quotient reaches --huge-threshold; pass --huge");
  const auto con = build_rotation_cocycle(params);
  std::mt19937_64 rng(g.seed);
  const double tol = g.tolerance_or(1e-10);

  Report r("rotation");
  stamp(r, g);
  Json par = {{"pq", o.pq},
              {"huge", params.level_indices},
              {"p", o.p},
              {"profile", o.profile},
              {"samples", o.samples},
              {"telescoping_samples", o.telescoping_samples},
              {"telescoping_max", o.telescoping_max},
              {"block_samples", o.block_samples},
              {"rigid_samples", o.rigid_samples},
              {"work_budget", o.work_budget}};
  if (o.c) par["c"] = *o.c;
  r.provenance()["parameters"] = par;
  Json& d = r.data();
  d["padded_quotients"] = con.padded;
  d["alpha"] = {{"P", con.rot.P()}, {"Q", con.rot.Q()}};
  d["levels"] = Json::array();

  std::vector<double> d_bar_ek;
  for (const auto& L : con.levels) {
    const std::string k = std::to_string(L.k);
    const double ek = std::exp(static_cast<double>(L.k));
    Json J = {{"k", L.k},       {"n", L.n},         {"a_n", L.tower.a_n()}, {"q", L.q()},
              {"q_n", L.tower.q_n()}, {"c", L.c},   {"r", L.r},             {"ell", L.ell},
              {"d", L.d},       {"d_bar", L.d_bar}, {"locatable", L.tower.locatable()}};
    if (params.profile == Profile::asymptotic) J["unrounded"] = {{"c", L.c_exact}, {"r", L.r_exact}};

    const auto ex = L.tower.verify();
    J["tower"] = {{"shift_ok", ex.shift_ok}, {"identity_ok", ex.identity_ok}, {"columns_checked", ex.columns_checked},
                  {"contiguous", ex.contiguous}, {"adjacency", ex.adjacency}, {"total", exact_json(ex.total)}};
    r.verdict("tower exactness, level " + k, "q_n ||q_{n-1} alpha|| + q_{n-1} ||q_n alpha|| = 1", ex.ok(),
              exact_json(ex.total), "==", "1/1");

    const auto br = bump_report(L);
    J["bump"] = {{"plateau", br.plateau}, {"cp_norm", br.cp_norm}, {"cp_over_d_bar", br.ratio},
                 {"continuity_defect", exact_json(br.continuity_defect)},
                 {"edge_derivatives", exact_json(br.edge_derivatives)}};
    r.verdict("bump C^p, level " + k, "jumps of F-bar^{(i)}, i <= p", br.cp_ok, exact_json(br.continuity_defect), "==",
              "0/1", Json{{"edge_derivatives", exact_json(br.edge_derivatives)}});

    r.verdict("sup F, level " + k, "sup |F_k| <= d_k e^k", L.sup_F() <= L.d * ek, L.sup_F(), "<=", L.d * ek);

    const auto sg = sup_G(L);
    J["sup_G"] = {{"grid_max", sg.grid_max}, {"upper", sg.upper}, {"bound", sg.bound5}};
    r.verdict("sup G, level " + k, "sup |G_k| <= l_k q_{n_k-1} sup |F_k|", sg.pass, sg.upper, "<=", sg.bound5);

    if (!L.tower.locatable()) {
      const std::string why = "q_{n_k-1} = " + std::to_string(L.q()) + " too large for pointwise location";
      r.skipped("transfer identity, level " + k, "F_k = G_k - G_k∘T", why);
      r.skipped("block sums, level " + k, "sum_{i < l q} F_k(T^{j l q + i} x) = 0 on I_0", why);
    } else {
      double worst = 0;
      for (std::size_t s = 0; s < o.samples; ++s) {
        const auto x = con.rot.random_point(rng);
        worst = std::max(worst, std::abs(L.F(x) - (L.G(x) - L.G(con.rot.advance(x, 1)))));
      }
      r.verdict("transfer identity, level " + k, "F_k = G_k - G_k∘T", worst <= tol, worst, "<=", tol,
                Json{{"samples", o.samples}});

      std::uniform_int_distribution<std::uint64_t> pick_n(1, std::min(L.tower.q_n(), o.telescoping_max));
      double tele = 0;
      for (std::size_t s = 0; s < o.telescoping_samples; ++s) {
        const auto x = con.rot.random_point(rng);
        const auto n = pick_n(rng);
        long double sum = 0;
        auto z = x;
        for (std::uint64_t i = 0; i < n; ++i, z = con.rot.advance(z, 1)) sum += L.F(z);
        tele = std::max(tele, std::abs(static_cast<double>(sum) - (L.G(x) - L.G(z))));
      }
      r.verdict("telescoping, level " + k, "sum_{i<n} F_k∘T^i = G_k - G_k∘T^n", tele <= tol, tele, "<=", tol,
                Json{{"samples", o.telescoping_samples}});

      std::uniform_int_distribution<std::uint64_t> pick_j(0, L.r - 1), pick_g(0, L.tower.D() - 1);
      std::uniform_real_distribution<double> pick_f(0.0, 1.0);
      const std::uint64_t block = L.ell * L.q();
      const std::size_t block_samples =
          std::min<std::uint64_t>(o.block_samples, std::max<std::uint64_t>(1, o.work_budget / block));
      double block_worst = 0;
      for (std::size_t s = 0; s < block_samples; ++s) {
        const auto j = pick_j(rng);
        auto z = con.rot.advance(L.tower.orient({pick_g(rng), pick_f(rng)}), static_cast<std::int64_t>(j * block));
        long double sum = 0;
        for (std::uint64_t i = 0; i < block; ++i, z = con.rot.advance(z, 1)) sum += L.F(z);
        block_worst = std::max(block_worst, std::abs(static_cast<double>(sum)));
      }
      r.verdict("block sums, level " + k, "sum_{i < l q} F_k(T^{j l q + i} x) = 0 on I_0", block_worst <= tol,
                block_worst, "<=", tol, Json{{"samples", block_samples}});
    }

    const std::uint64_t i_max = rigid_time_count(L);
    const std::uint64_t rigid_steps = std::max<std::uint64_t>(1, i_max * (i_max + 1) / 2 * L.q());
    const std::size_t rigid_samples =
        std::min<std::uint64_t>(o.rigid_samples, std::max<std::uint64_t>(1, o.work_budget / rigid_steps));
    const auto rt = rigid_time_report(con, L.k, rigid_samples, rng);
    Json times = Json::array();
    for (const auto& t : rt.times) {
      times.push_back({{"i", t.i}, {"overlap", exact_json(t.overlap_ratio)}, {"closed_form_abs", t.closed_form_abs},
                       {"max_error", t.max_error}, {"samples", t.samples}});
    }
    J["rigid_times"] = {{"i_max", rt.i_max}, {"times", times}};
    if (rt.times.empty()) {
      r.skipped("rigid times, level " + k, "lambda(E ∩ T^{-iq}E) > 0.9 lambda(E)",
                "l_k = " + std::to_string(L.ell) + " admits no rigid time");
    } else {
      Rational worst_overlap = 1;
      double worst_err = 0;
      for (const auto& t : rt.times) {
        worst_overlap = std::min(worst_overlap, t.overlap_ratio);
        worst_err = std::max(worst_err, t.max_error);
      }
      r.verdict("rigid overlap, level " + k, "lambda(E ∩ T^{-iq}E) / lambda(E) > 9/10", rt.overlap_ok,
                exact_json(worst_overlap), ">", "9/10");
      if (L.tower.locatable()) {
        r.verdict("rigid sums, level " + k, "phi_{iq}(x) = i q (1+1/c_k)^j d_k (-1)^j on E", rt.sums_ok, worst_err,
                  "<=", 1e-9);
      } else {
        r.skipped("rigid sums, level " + k, "phi_{iq}(x) = i q (1+1/c_k)^j d_k (-1)^j on E",
                  "tower too large for pointwise location");
      }
    }
    d_bar_ek.push_back(L.d_bar * ek);
    d["levels"].push_back(std::move(J));
    if (!o.csv.empty()) write_bump_csv(o.csv + "_level" + k + ".csv", L);
  }

  bool decreasing = true;
  for (std::size_t i = 1; i < d_bar_ek.size(); ++i) decreasing = decreasing && d_bar_ek[i] < d_bar_ek[i - 1];
  r.verdict("smoothness budget", "d-bar_k e^k strictly decreasing in k", decreasing, d_bar_ek, "is",
            "strictly decreasing");

  if (o.c) {
    const auto sq = squash_rotation_search(con, *o.c);
    Json lv = Json::array();
    for (const auto& s : sq.levels) {
      Json e = {{"k", s.k}, {"admissible", s.admissible}, {"selected", s.selected}};
      if (s.admissible) {
        e.update({{"j", s.j},
                  {"lambda", s.lambda},
                  {"gap", s.gap},
                  {"gap_bound", s.gap_bound},
                  {"v", s.v},
                  {"sigma", s.sigma},
                  {"searched", s.searched},
                  {"term_transfer", s.term_transfer},
                  {"support_bound", exact_json(s.support_bound)},
                  {"support_limit", s.support_limit},
                  {"term_scale", s.term_scale}});
      }
      if (!s.note.empty()) e["note"] = s.note;
      lv.push_back(std::move(e));
    }
    d["squash"] = {{"c", sq.c},        {"selected", sq.selected}, {"sigma", sq.sigma}, {"sigma_value", sq.sigma_value},
                   {"levels", lv}};
    r.verdict("squash search", "sigma(k) found for every selected level", !sq.stalled && !sq.selected.empty(),
              sq.selected.size(), ">=", 1, sq.stalled ? Json{{"stall", sq.stall_reason}} : Json());
    r.verdict("squash gaps", "0 < |c| - |lambda_k| <= 2|c|/c_k", sq.gaps_ok, sq.gaps_ok, "==", true);
    r.verdict("squash supports", "lambda(G~_k^{(0)} != 0) <= (3 + log|c|)/k", sq.supports_ok, sq.supports_ok, "==",
              true);
    r.verdict("squash terms non-increasing", "transfer, support and scale terms non-increasing in k",
              sq.monotone_transfer && sq.monotone_support && sq.monotone_scale,
              Json{{"transfer", sq.monotone_transfer}, {"support", sq.monotone_support}, {"scale", sq.monotone_scale}},
              "==", true);
  }
  return emit(g, r);
}

}  // namespace

Runner add_rotation(CLI::App& app) {
  auto o = std::make_shared<RotationOptions>();
  auto* sub = app.add_subcommand("rotation", "Build the smooth rotation cocycle and check its identities");
  sub->add_option("--pq", o->pq, "Comma-separated partial quotients a_1,...,a_N")->delimiter(',')->required();
  sub->add_option("--huge", o->huge, "Designated level indices n_1 < n_2 < ... (1-based)")->delimiter(',');
  sub->add_option("--huge-threshold", o->huge_threshold, "Without --huge, levels are the n with a_n >= this")
      ->capture_default_str();
  sub->add_option("--p", o->p, "Smoothness order")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--c", o->c, "Run the squash search for this factor (|c| > 1)");
  sub->add_option("--profile", o->profile, "Level constants: toy or asymptotic")
      ->check(CLI::IsMember({"toy", "asymptotic"}))
      ->capture_default_str();
  sub->add_option("--samples", o->samples, "Random points for the transfer identity")->capture_default_str();
  sub->add_option("--telescoping-samples", o->telescoping_samples, "Random (x, n) pairs for telescoping")
      ->capture_default_str();
  sub->add_option("--telescoping-max", o->telescoping_max, "Largest n in the telescoping check (capped at q_{n_k})")
      ->capture_default_str();
  sub->add_option("--block-samples", o->block_samples, "Random base points for the block sums")->capture_default_str();
  sub->add_option("--rigid-samples", o->rigid_samples, "Random points per rigid time")->capture_default_str();
  sub->add_option("--work-budget", o->work_budget, "Orbit steps per level allowed for block and rigid sums")
      ->capture_default_str();
  sub->add_option("--csv", o->csv, "Write the bump of each level to PREFIX_levelK.csv");
  return [o](const GlobalOptions& g) { return run_rotation(*o, g); };
}

}  // namespace cocycle::cli
