#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "nwidths/cli.hpp"

namespace {

using namespace nwidths;
using namespace nwidths::cli;

struct Flags {
  std::string config;
  std::string params;
  std::string n_min, n_max;
  std::string strategy, format, out;
  std::string kind;
  std::string p1, p2;
  std::uint64_t N = 0, n_query = 0;
  std::int64_t n_plan = 0;
  int max_diagonal = -1;
  std::string input;
  std::string grid;
  bool mutant = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file; flags override its values");
  sub->add_option("--format", f.format, "json or csv");
  sub->add_option("--out", f.out, "write output to this file");
}

void add_params(CLI::App* sub, Flags& f) { sub->add_option("--params", f.params, "key=value list, JSON object, or a file holding either"); }

void add_window(CLI::App* sub, Flags& f) {
  sub->add_option("--n-min", f.n_min, "smallest n (power of two, e.g. 256 or 2^8)");
  sub->add_option("--n-max", f.n_max, "largest n (power of two)");
}

RunConfig build_config(Command cmd, const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) load_config_file(cfg, f.config);
  cfg.command = cmd;
  if (!f.params.empty()) cfg.params = load_params(f.params);
  if (!f.n_min.empty()) cfg.n_min = parse_dyadic(f.n_min);
  if (!f.n_max.empty()) cfg.n_max = parse_dyadic(f.n_max);
  if (!f.strategy.empty()) cfg.strategy = parse_strategy(f.strategy);
  if (!f.format.empty()) cfg.format = parse_format(f.format);
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.kind.empty()) {
    cfg.kind = parse_kind(f.kind);
    cfg.query.kind = *cfg.kind;
  }
  if (!f.p1.empty()) cfg.query.p1 = parse_ext_real(f.p1);
  if (!f.p2.empty()) cfg.query.p2 = parse_ext_real(f.p2);
  if (f.N) cfg.query.N = f.N;
  if (f.n_query) cfg.query.n = f.n_query;
  if (f.n_plan) cfg.n = f.n_plan;
  if (f.max_diagonal >= 0) cfg.max_diagonal = f.max_diagonal;
  if (!f.input.empty()) cfg.input = f.input;
  if (!f.grid.empty()) cfg.grid = parse_scan_grid(f.grid);
  if (f.mutant) cfg.mutant = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic Kolmogorov and Gelfand widths of weighted Sobolev embeddings"};
  app.require_subcommand(1);
  Flags f;

  auto* classify = app.add_subcommand("classify", "exponent case and kappa for both width kinds");
  add_common(classify, f);
  add_params(classify, f);
  classify->add_option("--kind", f.kind, "kolmogorov or gelfand (default: both)");

  auto* fw = app.add_subcommand("finite-width", "model width of id: l_p1^N -> l_p2^N");
  add_common(fw, f);
  fw->add_option("--kind", f.kind, "kolmogorov or gelfand")->required();
  fw->add_option("--p1", f.p1)->required();
  fw->add_option("--p2", f.p2)->required();
  fw->add_option("--N", f.N)->required();
  fw->add_option("--n", f.n_query)->required();

  auto* bound = app.add_subcommand("bound", "upper and lower width sequences as CSV");
  add_common(bound, f);
  add_params(bound, f);
  add_window(bound, f);
  bound->add_option("--strategy", f.strategy, "paper or greedy");
  bound->add_option("--max-diagonal", f.max_diagonal, "largest j+i carried by the allocator");

  auto* plan = app.add_subcommand("plan", "one allocation plan as JSON");
  add_common(plan, f);
  add_params(plan, f);
  plan->add_option("--n", f.n_plan, "budget n (default 4096)");
  plan->add_option("--strategy", f.strategy, "paper or greedy");
  plan->add_option("--max-diagonal", f.max_diagonal);

  auto* slope = app.add_subcommand("slope-check", "fit log-log slopes against -kappa");
  add_common(slope, f);
  add_params(slope, f);
  add_window(slope, f);
  slope->add_option("--strategy", f.strategy, "paper or greedy");
  slope->add_option("--input", f.input, "CSV produced by bound");
  slope->add_option("--max-diagonal", f.max_diagonal);

  auto* scan = app.add_subcommand("scan", "exponent table scan and finite width axiom suite");
  add_common(scan, f);
  scan->add_option("--grid", f.grid, "all, table or axioms");
  scan->add_flag("--mutant", f.mutant, "run against deliberately broken tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  const std::pair<CLI::App*, Command> table[] = {{classify, Command::Classify}, {fw, Command::FiniteWidth},
                                                 {bound, Command::Bound},       {plan, Command::Plan},
                                                 {slope, Command::SlopeCheck},  {scan, Command::Scan}};
  Command cmd = Command::Classify;
  for (const auto& [sub, c] : table)
    if (sub->parsed()) cmd = c;

  RunResult r;
  try {
    r = run(build_config(cmd, f));
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code(e.code());
  }
  std::cout << r.output;
  if (!r.diagnostic.empty()) std::cerr << r.diagnostic << "\n";
  return r.exit_code;
}
