#include "cli_common.hpp"

#include "cocycle/blocks.hpp"

#include <memory>

namespace cocycle::cli {

namespace {

struct BlocksOptions {
  std::vector<double> gamma;
  std::string kind = "balanced";
  bool verify = false;
  std::string csv;
};

int run_blocks(const BlocksOptions& o, const GlobalOptions& g) {
  using namespace cocycle::blocks;
  if (o.gamma.size() > 12) throw UsageError("at most 12 gamma values (block length 4^m)");
  const auto block = o.kind == "balanced" ? balanced_block(o.gamma) : canonical_block(o.gamma);
  Report r("blocks");
  stamp(r, g);
  r.provenance()["parameters"] = {{"gamma", o.gamma}, {"kind", o.kind}};
  const double tol = g.tolerance_or(1e-12);
  Json& d = r.data();
  d["order"] = block.order;
  d["length"] = block.size();
  d["witnesses"] = Json::array();
  for (std::size_t j = 0; j < o.gamma.size(); ++j) {
    const auto n = find_witness_shift(block, o.gamma[j], tol);
    Json w = {{"j", j + 1}, {"gamma", o.gamma[j]}};
    if (n) {
      w["shift"] = *n;
      w["count"] = shift_match_count(block, *n, o.gamma[j], tol);
    }
    d["witnesses"].push_back(w);
    if (o.verify) {
      const std::size_t count = n ? shift_match_count(block, *n, o.gamma[j], tol) : 0;
      r.verdict("witness count for gamma_" + std::to_string(j + 1), "#{i : b(i+n) - b(i) = gamma_j} >= L/2",
                n && 2 * count >= block.size(), count, ">=", block.size() / 2.0);
    }
  }
  if (block.kind == BlockKind::balanced) {
    const auto t = tail_mass_check(block);
    d["tail"] = {{"count", t.count}, {"threshold", t.threshold}, {"bound", t.bound}};
    if (o.verify) {
      r.verdict("tail mass", "#{i : |b(i)| >= m^{3/4}} <= max gamma_j^2 4^m / sqrt(m)", t.pass, t.count, "<=",
                t.bound);
      double total = 0;
      for (double v : block.values) total += v;
      r.verdict("zero sum", "sum_i b(i) = 0", std::abs(total) <= tol * static_cast<double>(block.size()),
                std::abs(total), "<=", tol * static_cast<double>(block.size()));
    }
  }
  if (!o.csv.empty()) {
    auto f = open_csv(o.csv);
    write_csv(f, block);
  }
  return emit(g, r);
}

}  // namespace

Runner add_blocks(CLI::App& app) {
  auto o = std::make_shared<BlocksOptions>();
  auto* sub = app.add_subcommand("blocks", "Build a canonical or balanced difference block and check its counts");
  sub->add_option("--gamma", o->gamma, "Comma-separated gamma values")->delimiter(',')->required();
  sub->add_option("--kind", o->kind, "canonical or balanced")
      ->check(CLI::IsMember({"canonical", "balanced"}))
      ->capture_default_str();
  sub->add_flag("--verify", o->verify, "Run the witness and tail checks");
  sub->add_option("--csv", o->csv, "Write the block as index,value CSV");
  return [o](const GlobalOptions& g) { return run_blocks(*o, g); };
}

}  // namespace cocycle::cli
