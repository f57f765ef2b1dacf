// qplab <subcommand> [-c config.yaml] [-o out.csv] [--seed N] [--set key=value]...

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qplab/harness.hpp"

int main(int argc, char** argv) {
  using namespace qplab;
  CLI::App app{"Lyapunov exponent experiments for quasi-periodic cocycles"};
  app.set_version_flag("--version", std::string("qplab ") + kVersion);

  std::string command, config_path;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets, omega;
  std::optional<double> t;
  std::optional<std::int64_t> kmax;

  std::string names;
  for (const auto& [name, fn] : command_table()) names += (names.empty() ? "" : ", ") + name;
  app.add_option("subcommand", command, "One of: " + names)->required();
  app.add_option("-c,--config", config_path, "YAML experiment document");
  app.add_option("-o,--output", output, "CSV output path (default: stdout)");
  app.add_option("--seed", seed, "Sets numeric.seed");
  app.add_option("--set", sets, "Override a dotted key, e.g. numeric.n=500");
  app.add_option("--omega", omega, "Sets the frequency (one value per torus dimension)");
  app.add_option("--t", t, "Sets numeric.t (dc-check)");
  app.add_option("--kmax", kmax, "Sets numeric.k_max (dc-check)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    RunRequest req;
    req.command = command;
    req.output = output;
    req.config = config_path.empty() ? load_config_text("", "<defaults>") : load_config_file(config_path);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + s + "'");
      apply_override(req.config.root, s.substr(0, eq), s.substr(eq + 1));
    }
    if (seed) apply_override(req.config.root, "numeric.seed", std::to_string(*seed));
    if (!omega.empty()) {
      std::string list = "[";
      for (std::size_t i = 0; i < omega.size(); ++i) list += (i ? ", " : "") + omega[i];
      apply_override(req.config.root, "frequency", list + "]");
    }
    if (t) apply_override(req.config.root, "numeric.t", fmt::format("{:.17g}", *t));
    if (kmax) apply_override(req.config.root, "numeric.k_max", std::to_string(*kmax));
    return run(req, std::cout, std::cerr);
  } catch (const InputError& e) {
    std::cerr << "qplab: " << e.what() << "\n";
    return kExitInvalid;
  }
}
