#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "qstab/harness/presets.hpp"
#include "qstab/harness/results.hpp"
#include "qstab/harness/runner.hpp"
#include "qstab/harness/scenario.hpp"

using namespace qstab;
using namespace qstab::harness;
namespace fs = std::filesystem;

namespace {

std::string config_error_path(const std::string& text) {
  try {
    parse_scenario_text(text);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<accepted>";
}

const char* kStability = R"({"name": "s", "kind": "stability", "seed": 3,
  "equation": "fe3:3", "norm": {"kind": "euclidean", "dim": 1},
  "mapping": {"family": "perturbed", "base": {"family": "monomial", "degree": 2},
              "bump": {"family": "sine"}, "amplitude": 0.1},
  "control": {"variant": "constant", "theta": 1.2},
  "stability": {"direction": "forward", "probes": [[1], [-2], [0.5]]}})";

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("qstab_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

ResultRow row(double x, double dev, double bound) {
  ResultRow r;
  r.scenario = "t";
  r.probe = fmt(x);
  r.norm_x = x;
  r.deviation = dev;
  r.bound = bound;
  r.margin = bound - dev;
  r.iterations = 3;
  return r;
}

}  // namespace

TEST(Config, AcceptsAValidScenario) {
  const Scenario s = parse_scenario_text(kStability);
  EXPECT_EQ(s.kind, ScenarioKind::stability);
  EXPECT_EQ(s.output.csv, "s.csv");
  ASSERT_TRUE(s.stability.has_value());
  EXPECT_EQ(s.stability->probes.size(), 3u);
  EXPECT_EQ(s.stability->n, 3);
}

TEST(Config, ErrorsNameTheField) {
  auto with = [](const std::string& from, const std::string& to) {
    std::string t = kStability;
    const auto pos = t.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    return t.replace(pos, from.size(), to);
  };
  EXPECT_EQ(config_error_path(with(R"("theta": 1.2)", R"("theta": "lots")")), "control.theta");
  EXPECT_EQ(config_error_path(with(R"("theta": 1.2)", R"("theta": -1)")), "control.theta");
  EXPECT_EQ(config_error_path(with(R"("direction": "forward")", R"("direction": "sideways")")),
            "stability.direction");
  EXPECT_EQ(config_error_path(with(R"("direction": "forward")", R"("directoin": "forward")")),
            "stability.directoin");
  EXPECT_EQ(config_error_path(with(R"("degree": 2)", R"("degree": "two")")), "mapping.base.degree");
  EXPECT_EQ(config_error_path(with(R"("fe3:3")", R"("fe9")")), "equation");
  EXPECT_EQ(config_error_path(with(R"("dim": 1)", R"("dim": 0)")), "norm.dim");
  EXPECT_EQ(config_error_path(with(R"([[1], [-2], [0.5]])", R"([[1, 2]])")), "stability.probes[0]");
  EXPECT_EQ(config_error_path(with(R"("kind": "stability")", R"("kind": "bogus")")), "kind");
  EXPECT_EQ(config_error_path("[1, 2]"), "");
  EXPECT_EQ(config_error_path("{not json"), "");
  EXPECT_EQ(config_error_path(R"({"name": "o", "kind": "oracle", "oracle": {"pairs": [["fe1", "fe2"]], "q": 4, "d": 1}})"),
            "oracle.q[0]");
  EXPECT_EQ(config_error_path(R"({"name": "o", "kind": "oracle", "oracle": {"pairs": [["fe1", "fe2"]], "q": 13, "d": 4}})"),
            "oracle.d[0]");
}

TEST(Config, MalformedConfigWritesNothing) {
  const fs::path dir = fresh_dir("malformed");
  std::string text = kStability;
  text.insert(text.size() - 1, R"(, "output": {"dir": ")" + dir.string() + R"("}, "extra": 1)");
  EXPECT_THROW(
      {
        const Scenario s = parse_scenario_text(text);
        write_outputs(s, run_scenario(s));
      },
      ConfigError);
  EXPECT_TRUE(fs::is_empty(dir));
}

TEST(Csv, RoundTrip) {
  std::vector<ResultRow> rows{row(1.5, 0.25, 2.0), row(0.1, 1e-17, 3.0)};
  rows[1].detail = "contains, a comma and \"quotes\"";
  rows[1].q_estimate = "[1 2|3 4+2i]";
  ResultRow sparse;
  sparse.scenario = "t";
  sparse.probe = "label";
  sparse.status = Status::rejected_open_problem;
  rows.push_back(sparse);
  const std::string text = to_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), kResultsHeader);
  const auto back = from_csv(text);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[1].detail, rows[1].detail);
  EXPECT_EQ(*back[1].deviation, 1e-17);
  EXPECT_FALSE(back[2].norm_x.has_value());
  EXPECT_EQ(back[2].status, Status::rejected_open_problem);
  EXPECT_EQ(to_csv(back), text);
  EXPECT_THROW(from_csv("a,b\n"), Error);
}

TEST(Csv, ShortestRoundTripNumbers) {
  for (double v : {0.1, 1.0 / 3.0, 5.0 / 6.0, 1e-300, 123456789.0, -2.5}) EXPECT_EQ(std::stod(fmt(v)), v);
  EXPECT_EQ(fmt(0.1), "0.1");
  EXPECT_EQ(fmt(2.0), "2");
}

TEST(Csv, ExitCodes) {
  std::vector<ResultRow> rows{row(1, 0, 1)};
  EXPECT_EQ(exit_code_for(rows), ExitCode::ok);
  rows.push_back(row(1, 0, 1));
  rows.back().status = Status::rejected_divergent;
  EXPECT_EQ(exit_code_for(rows), ExitCode::expected_rejection);
  rows.push_back(row(1, 2, 1));
  rows.back().status = Status::fail;
  EXPECT_EQ(exit_code_for(rows), ExitCode::bound_violation);
}

TEST(PlotData, SortedTriples) {
  std::vector<ResultRow> rows{row(2, 0.5, 1), row(1, 0.3, 1), row(1, 0.1, 2), row(0.5, 0.0, 0.4)};
  ResultRow label;
  label.probe = "no numbers";
  rows.push_back(label);
  EXPECT_EQ(emit_plotdata(rows), "norm_x,deviation,bound\n0.5,0,0.4\n1,0.1,2\n1,0.3,1\n2,0.5,1\n");
  EXPECT_EQ(emit_plotdata({row(3, 1, 2)}), "norm_x,deviation,bound\n3,1,2\n");
  EXPECT_THROW(emit_plotdata({}), Error);
  EXPECT_THROW(emit_plotdata({label}), Error);
}

TEST(Presets, RegistryIsComplete) {
  const auto& all = presets();
  EXPECT_GE(all.size(), 12u);
  std::set<std::string> names;
  for (const auto& p : all) {
    EXPECT_TRUE(names.insert(p.name).second) << p.name;
    EXPECT_FALSE(p.tag.empty()) << p.name;
    EXPECT_FALSE(p.description.empty()) << p.name;
    EXPECT_NO_THROW(preset_scenario(p)) << p.name;
  }
  EXPECT_EQ(find_preset("nope"), nullptr);
  ASSERT_NE(find_preset("cor33-forward"), nullptr);
  EXPECT_EQ(preset_scenario(*find_preset("cor33-forward"), 99).seed, 99u);
}

TEST(Presets, OracleSummary) {
  const RunResult r = run_scenario(preset_scenario(*find_preset("thm24-oracle")));
  EXPECT_EQ(r.code, ExitCode::ok);
  ASSERT_FALSE(r.summary.empty());
  EXPECT_NE(r.summary.front().find("spaces equal, dim 1"), std::string::npos) << r.summary.front();
}

TEST(Presets, ForwardPowerBounds) {
  const RunResult r = run_scenario(preset_scenario(*find_preset("cor33-forward")));
  EXPECT_EQ(r.code, ExitCode::ok);
  ASSERT_EQ(r.rows.size(), 100u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.status, Status::pass);
    EXPECT_NEAR(*row.bound, 5.0 / 6.0 * *row.norm_x, 1e-12 * (1 + *row.norm_x));
    EXPECT_LE(*row.deviation, *row.bound);
  }
}

TEST(Presets, OpenProblemSweepExitsWithRejection) {
  const RunResult r = run_scenario(preset_scenario(*find_preset("open-problem-3.6")));
  EXPECT_EQ(r.code, ExitCode::expected_rejection);
  int passed = 0, rejected = 0;
  for (const auto& row : r.rows) {
    if (row.status == Status::pass) ++passed;
    if (row.status == Status::rejected_open_problem) ++rejected;
  }
  EXPECT_EQ(passed, 7);
  EXPECT_EQ(rejected, 3);
}

class SeededPreset : public ::testing::TestWithParam<std::string> {};

TEST_P(SeededPreset, PassesForTwentySeeds) {
  const Preset& p = *find_preset(GetParam());
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const RunResult r = run_scenario(preset_scenario(p, seed));
    EXPECT_EQ(r.code, ExitCode::ok) << "seed " << seed;
  }
}

std::vector<std::string> seeded_presets() {
  std::vector<std::string> out;
  for (const auto& p : presets()) {
    const ScenarioKind k = preset_scenario(p).kind;
    if (k != ScenarioKind::oracle && k != ScenarioKind::bound_sweep && k != ScenarioKind::bound_equality)
      out.push_back(p.name);
  }
  return out;
}

INSTANTIATE_TEST_SUITE_P(Registry, SeededPreset, ::testing::ValuesIn(seeded_presets()),
                         [](const ::testing::TestParamInfo<std::string>& info) {
                           std::string n = info.param;
                           for (char& c : n)
                             if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
                           return n;
                         });

TEST(Output, DeterministicFiles) {
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  const Scenario s = preset_scenario(*find_preset("cor35-constant"));
  setenv("QSTAB_OUT_DIR", a.c_str(), 1);
  const WrittenFiles wa = write_outputs(s, run_scenario(s));
  setenv("QSTAB_OUT_DIR", b.c_str(), 1);
  const WrittenFiles wb = write_outputs(s, run_scenario(s));
  unsetenv("QSTAB_OUT_DIR");
  EXPECT_EQ(wa.csv, a / "cor35-constant.csv");
  ASSERT_TRUE(wa.plotdata.has_value());
  EXPECT_EQ(read_file(wa.csv), read_file(wb.csv));
  EXPECT_EQ(read_file(*wa.plotdata), read_file(*wb.plotdata));
  EXPECT_EQ(read_file(*wa.plotdata).rfind("norm_x,deviation,bound\n", 0), 0u);
  EXPECT_FALSE(fs::exists(a / "cor35-constant.csv.tmp"));
}
