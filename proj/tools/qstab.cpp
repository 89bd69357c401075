// qstab: run stability experiments, solution-space oracles and presets.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "qstab/finite_field.hpp"
#include "qstab/harness/presets.hpp"
#include "qstab/harness/results.hpp"
#include "qstab/harness/runner.hpp"
#include "qstab/harness/scenario.hpp"

namespace {

using namespace qstab;
using namespace qstab::harness;

int code(ExitCode c) { return static_cast<int>(c); }

int execute(const Scenario& s, bool quiet) {
  const RunResult r = run_scenario(s);
  const WrittenFiles w = write_outputs(s, r);
  if (!quiet) {
    for (const auto& line : r.summary) std::cout << line << "\n";
    std::cout << "status: " << to_string(r.overall()) << "\n";
    std::cout << "wrote " << w.csv.string() << "\n";
    if (w.plotdata) std::cout << "wrote " << w.plotdata->string() << "\n";
  }
  return code(r.code);
}

int cmd_list() {
  for (const auto& p : presets()) {
    std::cout << p.name << "  [" << p.tag << "]  " << p.description << "\n";
  }
  return 0;
}

int cmd_oracle(const std::string& a, const std::string& b, int q, int d, bool force) {
  const EquationSpec ea = EquationSpec::parse(a);
  const EquationSpec eb = EquationSpec::parse(b);
  const ff::GroupSpec g(q, d);
  if (!force) {
    for (const auto& eq : {ea, eb}) {
      if (auto bad = ff::obstruction(eq, q)) {
        std::cout << eq.name() << " over F_" << q << ": q divides " << bad->name << "; rerun with --force to compare anyway\n";
        return code(ExitCode::expected_rejection);
      }
    }
  }
  const ff::EquivalenceReport rep = ff::spaces_equal(ea, eb, g, !force);
  if (rep.equal) {
    std::cout << "spaces equal, dim " << rep.dim_a;
  } else {
    std::cout << "spaces differ, dims " << rep.dim_a << " and " << rep.dim_b;
    if (rep.witness) {
      std::cout << "; witness solves " << (rep.witness_side == "a" ? ea.name() : eb.name()) << " only:";
      for (int v : rep.witness->table()) std::cout << ' ' << v;
    }
  }
  if (rep.subsampled) std::cout << " (subsampled tuples)";
  std::cout << "\n";
  return rep.equal ? 0 : code(ExitCode::bound_violation);
}

int cmd_plotdata(const std::string& in, const std::string& out) {
  const std::string text = emit_plotdata(from_csv(read_file(in)));
  if (out.empty()) {
    std::cout << text;
  } else {
    write_atomic(out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qstab: stability of generalized quadratic functional equations"};
  app.require_subcommand(1);

  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only set the exit status");

  auto* run = app.add_subcommand("run", "Run a scenario from a JSON config");
  std::string config_path;
  run->add_option("config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);

  auto* preset = app.add_subcommand("preset", "Run a preset scenario");
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  preset->add_option("name", preset_name, "Preset name (see 'list')")->required();
  preset->add_option("--seed", seed, "Override the preset seed");

  auto* list = app.add_subcommand("list", "List presets");

  auto* oracle = app.add_subcommand("oracle", "Compare solution spaces of two equations over F_q^d");
  std::string eq1, eq2;
  int q = 5, d = 1;
  bool force = false;
  oracle->add_option("eq1", eq1, "fe1 | fe2 | fe3:<n> | fe3_0:<a>")->required();
  oracle->add_option("eq2", eq2, "fe1 | fe2 | fe3:<n> | fe3_0:<a>")->required();
  oracle->add_option("--q", q, "Prime field size (>= 5)")->required();
  oracle->add_option("--d", d, "Rank of F_q^d")->required();
  oracle->add_flag("--force", force, "Compare even when q divides an obstruction factor");

  auto* plot = app.add_subcommand("plotdata", "Extract norm_x,deviation,bound from a results CSV");
  std::string results_path, plot_out;
  plot->add_option("results", results_path, "Results CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("-o,--output", plot_out, "Write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(ExitCode::validation);
  }

  try {
    if (*list) return cmd_list();
    if (*run) {
      Scenario s;
      try {
        s = parse_scenario_text(read_file(config_path));
      } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return code(ExitCode::validation);
      }
      return execute(s, quiet);
    }
    if (*preset) {
      const Preset* p = find_preset(preset_name);
      if (p == nullptr) {
        std::cerr << "unknown preset '" << preset_name << "'; try 'qstab list'\n";
        return code(ExitCode::validation);
      }
      return execute(preset_scenario(*p, seed), quiet);
    }
    if (*oracle) return cmd_oracle(eq1, eq2, q, d, force);
    if (*plot) return cmd_plotdata(results_path, plot_out);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == ErrorKind::invalid_argument || e.kind() == ErrorKind::config ? code(ExitCode::validation)
                                                                                    : code(ExitCode::failure);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return code(ExitCode::failure);
  }
  return 0;
}
