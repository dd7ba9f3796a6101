#include "cli_common.hpp"

#include "cocycle/maharam.hpp"

#include <memory>
#include <random>

namespace cocycle::cli {

namespace {

struct MaharamOptions {
  std::string system;
  std::vector<std::string> masses{"1/2", "1/3", "1/6"};
  std::vector<std::size_t> perm{1, 2, 0};
  std::vector<std::string> t{"1", "1/2", "-2"};
  std::string s = "1/3";
  std::size_t boxes = 1000;
};

maharam::NonsingularSystem load_system(const MaharamOptions& o) {
  maharam::NonsingularSystem sys;
  std::vector<std::string> masses = o.masses;
  std::vector<std::size_t> perm = o.perm;
  if (!o.system.empty()) {
    std::ifstream f(o.system);
    if (!f) throw UsageError("cannot read " + o.system);
    Json j;
    try {
      j = Json::parse(f);
      masses.clear();
      for (const auto& m : j.at("masses")) masses.push_back(m.is_string() ? m.get<std::string>() : m.dump());
      perm = j.at("permutation").get<std::vector<std::size_t>>();
    } catch (const Json::exception& e) {
      throw UsageError(o.system + ": " + e.what());
    }
  }
  for (const auto& m : masses) sys.p.push_back(parse_rational(m));
  sys.R = perm;
  sys.validate();
  return sys;
}

int run_maharam(const MaharamOptions& o, const GlobalOptions& g) {
  using namespace cocycle::maharam;
  const auto sys = load_system(o);
  const MaharamProduct prod(sys);
  const double tol = g.tolerance_or(1e-12);
  std::mt19937_64 rng(g.seed);

  Report r("maharam");
  stamp(r, g);
  Json masses = Json::array();
  for (const auto& p : sys.p) masses.push_back(exact_json(p));
  r.provenance()["parameters"] = {{"masses", masses}, {"permutation", sys.R}, {"t", o.t}, {"s", o.s},
                                  {"boxes", o.boxes}};
  Json fibers = Json::array();
  for (std::size_t w = 0; w < sys.size(); ++w) {
    fibers.push_back({{"w", w}, {"derivative", exact_json(sys.derivative(w))}, {"shift", prod.fiber(w).amount()}});
  }
  r.data()["measure_preserving_base"] = sys.measure_preserving();
  r.data()["fibers"] = fibers;

  const auto pres = measure_preservation(prod, o.boxes, rng, tol);
  r.verdict("measure preservation", "m(T~ B) = m(B) for random boxes B", pres.pass, pres.max_rel_error, "<=", tol,
            Json{{"boxes", pres.boxes}});

  const Rational s = parse_rational(o.s);
  r.data()["dilation"] = Json::array();
  for (const auto& ts : o.t) {
    const Rational t = parse_rational(ts);
    const auto rep = dilation_flow_check(prod, t, s, o.boxes, rng, tol);
    const std::string name = "t = " + to_fraction_string(t);
    r.data()["dilation"].push_back({{"t", exact_json(t)}, {"max_rel_error", rep.max_rel_error},
                                    {"inverse_error", rep.inverse_error}});
    r.verdict("commutation, " + name, "Q_t∘T~ = T~∘Q_t", rep.commutes, rep.commutes, "==", true);
    r.verdict("flow law, " + name, "Q_{t+s} = Q_t∘Q_s and Q_0 = id", rep.flow_law && rep.zero_is_identity,
              rep.flow_law && rep.zero_is_identity, "==", true, Json{{"s", exact_json(s)}});
    r.verdict("dilation, " + name, "m(Q_t B) = e^t m(B)", rep.max_rel_error <= tol && rep.inverse_error <= tol,
              std::max(rep.max_rel_error, rep.inverse_error), "<=", tol);
  }

  std::vector<double> own(sys.size());
  for (std::size_t w = 0; w < sys.size(); ++w) own[w] = prod.fiber(w).amount();
  const auto conv = converse_check(sys, own, tol);
  r.verdict("converse", "shift(w) = -log(dp∘R/dp)(w)", conv.maharam_form, conv.max_defect, "<=", tol);
  // a shifted cocycle commutes with the flow too but must be rejected unless R preserves p
  std::vector<double> off = own;
  for (auto& v : off) v += 0.5;
  r.data()["converse_control_defect"] = converse_check(sys, off, tol).max_defect;
  return emit(g, r);
}

}  // namespace

Runner add_maharam(CLI::App& app) {
  auto o = std::make_shared<MaharamOptions>();
  auto* sub = app.add_subcommand("maharam", "Check the Maharam extension of a finite nonsingular map");
  auto* file = sub->add_option("--system", o->system, "JSON file {\"masses\": [...], \"permutation\": [...]}");
  sub->add_option("--masses", o->masses, "Comma-separated state masses (p/q or decimal)")
      ->delimiter(',')
      ->excludes(file)
      ->capture_default_str();
  sub->add_option("--perm", o->perm, "Comma-separated permutation R(0),...,R(n-1)")
      ->delimiter(',')
      ->excludes(file)
      ->capture_default_str();
  sub->add_option("--t", o->t, "Comma-separated flow times")->delimiter(',')->capture_default_str();
  sub->add_option("--s", o->s, "Second time for the flow law")->capture_default_str();
  sub->add_option("--boxes", o->boxes, "Random boxes per check")->capture_default_str();
  return [o](const GlobalOptions& g) { return run_maharam(*o, g); };
}

}  // namespace cocycle::cli
