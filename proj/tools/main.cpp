#include "cli_common.hpp"

#include <exception>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

using namespace cocycle::cli;

int main(int argc, char** argv) {
  CLI::App app{"Cocycle and skew-product simulator and verifier"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Key-value file overriding any flag", false);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for every random sample")->capture_default_str();
  app.add_option("--out", g.out, "Write the JSON report to this path");
  app.add_flag("--json", g.json, "Print the JSON report instead of the summary");
  app.add_option("--tolerance", g.tolerance, "Override the floating-point tolerance of the float checks");

  const std::vector<std::pair<std::string, Runner>> runners = {{"blocks", add_blocks(app)},
                                                               {"odometer", add_odometer(app)},
                                                               {"rotation", add_rotation(app)},
                                                               {"evc", add_evc(app)},
                                                               {"maharam", add_maharam(app)}};

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (const auto& [name, run] : runners) {
      if (app.got_subcommand(name)) return run(g);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::overflow_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
