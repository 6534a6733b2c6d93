// qcilab command-line front end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qcilab/reproduce.hpp"

namespace fs = std::filesystem;
using namespace qcilab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr int kExitNonGeneric = 10;
constexpr int kExitInconsistent = 11;

struct Common {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

RunConfig load(const Common& c) {
  RunConfig cfg;
  if (c.config_path == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    cfg = parse_config_text(ss.str());
  } else if (!c.config_path.empty()) {
    cfg = load_config(c.config_path);
  }
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out_dir.empty()) cfg.output_dir = c.out_dir;
  return cfg;
}

/// Write `text` to output_dir/name, or to stdout when no directory is set.
void emit(const RunConfig& cfg, const std::string& name, const std::string& text) {
  if (cfg.output_dir.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  fs::create_directories(cfg.output_dir);
  const fs::path path = fs::path(cfg.output_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

int cmd_classify(const Common& c) {
  const RunConfig cfg = load(c);
  const ProfileFunction p = parse_profile(cfg.profile);
  const Curve curve = classification_curve(p, cfg);
  const CurveClassification cl = classify_curve(p, curve, cfg.E1, genericity_options(cfg));
  json j = to_json(cl);
  j["curve_id"] = curve.id;
  j["config"] = to_json(cfg);
  emit(cfg, "classification.json", j.dump(2));
  return is_generic(cl.verdict) ? kExitOk : kExitNonGeneric;
}

int cmd_spectrum(const Common& c) {
  const RunConfig cfg = load(c);
  const ProfileFunction p = parse_profile(cfg.profile);
  const auto modes = family_modes(p, cfg.family);
  std::vector<JointEigenfunction> eig(modes.size());
  const auto errors =
      qcilab::detail::parallel_for(modes.size(), c.jobs, [&](std::size_t i) { eig[i] = solve_mode(p, modes[i]); });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  emit(cfg, "spectrum.csv", spectrum_csv(eig));
  return kExitOk;
}

int cmd_restrict(const Common& c) {
  const RunConfig cfg = load(c);
  const ProfileFunction p = parse_profile(cfg.profile);
  const GrowthSeries s = family_sweep(p, curve_for_config(p, cfg), cfg.family, c.jobs, restriction_options(cfg));
  emit(cfg, "restrict.csv", restrict_csv(s));
  return kExitOk;
}

int cmd_fit(const Common& c, const std::string& input) {
  const RunConfig cfg = load(c);
  GrowthSeries s;
  if (input.empty() || input == "-") {
    s = parse_restrict_csv(std::cin);
  } else {
    std::ifstream in(input);
    if (!in) throw InvalidInput("fit: cannot open '" + input + "'");
    s = parse_restrict_csv(in);
  }
  s.family = cfg.family;
  const ProfileFunction p = parse_profile(cfg.profile);
  FitOptions fo;
  fo.seed = cfg.seed;
  GrowthFit f = fit_growth(s, fo);
  const SaturationResult sat = saturation_check(s, orbit_stability(p, cfg.E1), fo);
  f.lower_bound_cert = sat.c_gamma;
  json j = {{"curve_id", s.curve_id}, {"fit", to_json(f)}, {"saturation", to_json(sat)}};
  int code = kExitOk;
  if (!c.config_path.empty()) {
    // a configuration names the curve, so the growth law can be checked against it
    const CurveClassification cl =
        classify_curve(p, classification_curve(p, cfg), cfg.E1, genericity_options(cfg));
    const ConsistencyReport rep = theorem_verdict(cl.verdict, f, concentrating_family(cfg.family));
    j["verdict"] = to_json(rep);
    if (rep.status == Consistency::Inconsistent) code = kExitInconsistent;
  }
  j["config"] = to_json(cfg);
  j["provenance"] = provenance();
  emit(cfg, "fit.json", j.dump(2));
  return code;
}

int cmd_sweep_fit(const Common& c) {
  const RunConfig cfg = load(c);
  const SweepFitResult r = run_sweep_fit(cfg, c.jobs);
  if (cfg.output_dir.empty()) {
    std::cout << sweep_fit_report(cfg, r).dump(2) << '\n';
  } else {
    emit(cfg, "restrict.csv", restrict_csv(r.series));
    emit(cfg, "report.json", sweep_fit_report(cfg, r).dump(2));
  }
  return r.consistency.status == Consistency::Inconsistent ? kExitInconsistent : kExitOk;
}

int cmd_reproduce(const Common& c) {
  RunConfig cfg = load(c);
  const auto items = run_battery(c.jobs, cfg.seed);
  json bundle = json::array();
  bool all = true;
  for (const auto& it : items) {
    all = all && it.passed;
    bundle.push_back({{"item", it.id}, {"title", it.title}, {"passed", it.passed}, {"evidence", it.evidence}});
    std::fprintf(stderr, "[%s] %s: %s (%.2f s)\n", it.passed ? "PASS" : "FAIL", it.id.c_str(), it.title.c_str(),
                 it.seconds);
  }
  json j = {{"items", bundle}, {"all_passed", all}, {"seed", cfg.seed}, {"provenance", provenance()}};
  emit(cfg, "reproduce.json", j.dump(2));
  if (!all) {
    for (const auto& it : items)
      if (!it.passed) std::fprintf(stderr, "failing item: %s\n", it.id.c_str());
  }
  return all ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Restriction bounds for eigenfunctions of quantum integrable surfaces of revolution"};
  app.require_subcommand(1);
  Common common;
  std::string fit_input;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON configuration file ('-' for stdin)");
    sub->add_option("--out", common.out_dir, "output directory (default: stdout)");
    sub->add_option("--seed", common.seed, "seed for bootstrap resampling");
    sub->add_option("--jobs", common.jobs, "worker threads")->check(CLI::PositiveNumber);
  };
  auto* classify = app.add_subcommand("classify-curve", "genericity test for the configured curve");
  auto* spectrum = app.add_subcommand("spectrum", "joint eigenfunctions of the configured family (CSV)");
  auto* restrict = app.add_subcommand("restrict", "restriction integrals along the configured curve (CSV)");
  auto* fit = app.add_subcommand("fit", "growth-law fit of a restriction CSV (JSON)");
  auto* sweep = app.add_subcommand("sweep-fit", "classification, sweep, fit and consistency verdict");
  auto* repro = app.add_subcommand("reproduce", "fixed battery of sphere experiments");
  for (auto* s : {classify, spectrum, restrict, fit, sweep, repro}) add_common(s);
  fit->add_option("--input", fit_input, "restriction CSV ('-' or omitted: stdin)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (classify->parsed()) return cmd_classify(common);
    if (spectrum->parsed()) return cmd_spectrum(common);
    if (restrict->parsed()) return cmd_restrict(common);
    if (fit->parsed()) return cmd_fit(common, fit_input);
    if (sweep->parsed()) return cmd_sweep_fit(common);
    if (repro->parsed()) return cmd_reproduce(common);
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const ClassificationRefused& e) {
    std::fprintf(stderr, "classification refused: %s\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitInput;
}
