#include "ncsos/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ncsos/certificates.hpp"
#include "ncsos/games.hpp"
#include "ncsos/hierarchy.hpp"
#include "ncsos/oracles.hpp"
#include "ncsos/sdp.hpp"

#ifndef NCSOS_DATA_DIR
#define NCSOS_DATA_DIR "data"
#endif

namespace ncsos {

namespace fs = std::filesystem;

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.9g", v);
  return buf;
}

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw Error("cannot write " + path);
}

struct LoadedGame {
  Game game;
  std::string hash;
  fs::path dir;  // where relative basis files are looked up first
};

LoadedGame load_game(const std::string& arg, std::ostream& err) {
  if (arg.starts_with("builtin:")) {
    Game g = builtin(arg.substr(8));
    const std::string hash = fnv1a_hex(serialize(g));
    return {std::move(g), hash, fs::current_path()};
  }
  const std::string text = read_file(arg);
  ParsedGame parsed = parse_game(text);
  for (const auto& note : parsed.notes) err << "note: " << note << "\n";
  return {std::move(parsed.game), fnv1a_hex(text), fs::path(arg).parent_path()};
}

/// custom:<path> is tried as given, then next to the game file, then in the
/// installed data directory.
LevelSpec load_level(const std::string& text, const LoadedGame& g) {
  if (!text.starts_with("custom:")) return LevelSpec::parse(text);
  const fs::path p(text.substr(7));
  if (!p.is_absolute() && !fs::exists(p)) {
    for (const fs::path& base : {g.dir, fs::path(NCSOS_DATA_DIR)})
      if (fs::exists(base / p)) return LevelSpec::parse("custom:" + (base / p).string());
  }
  return LevelSpec::parse(text);
}

class Report {
 public:
  void add(const std::string& key, const std::string& value) { rows_.emplace_back(key, value); }
  void add(const std::string& key, int value) { add(key, std::to_string(value)); }
  void add(const std::string& key, double value) { add(key, exact(value)); }

  std::string text() const {
    std::string out;
    for (const auto& [k, v] : rows_) out += k + " = " + v + "\n";
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::string>> rows_;
};

void begin_report(Report& r, const std::string& command, const std::string& game_arg, const LoadedGame& g) {
  r.add("tool", std::string("ncsos"));
  r.add("version", std::string(kVersion));
  r.add("command", command);
  r.add("game", game_arg);
  r.add("game_name", g.game.name);
  r.add("game_hash", g.hash);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct SolveArgs {
  std::string game;
  std::string level = "full:1";
  std::string form = "moment";
  std::string solver = "ipm";
  double tol = 1e-8;
  int max_iter = 200;
  std::string cert, sdpa, report;
  bool verbose = false;
};

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  const LoadedGame g = load_game(a.game, err);
  const LevelSpec spec = load_level(a.level, g);
  const MonomialBasis basis = generate_basis(g.game, spec);
  const bool sos = a.form == "sos";
  const RelaxationProblem prob = sos ? build_sos_sdp(g.game, basis) : build_moment_sdp(g.game, basis);

  if (!a.sdpa.empty()) export_sdpa(prob.sdp, a.sdpa);
  Report r;
  begin_report(r, "solve", a.game, g);
  r.add("level", spec.to_string());
  r.add("form", a.form);
  r.add("solver", a.solver);
  r.add("basis_size", static_cast<int>(basis.size()));
  r.add("constraints", prob.sdp.num_constraints());
  r.add("dropped_constraints", prob.dropped_constraints);

  if (a.solver == "export") {
    if (a.sdpa.empty()) {
      err << "error: --solver export needs --export-sdpa <path>\n";
      return kExitUsage;
    }
    out << "exported " << a.sdpa << "\n";
    r.add("seconds", seconds_since(t0));
    if (!a.report.empty()) write_file(a.report, r.text());
    return kExitOk;
  }

  SolverOptions opts;
  opts.tol = a.tol;
  opts.max_iter = a.max_iter;
  opts.verbose = a.verbose;
  opts.log = &err;
  const SDPSolution<double> sol = solve(prob.sdp, opts);
  const double bound = prob.bound(sol.primal_value);
  const std::string printed = num(bound);
  out << printed << "\n";

  r.add("tol", a.tol);
  r.add("max_iter", a.max_iter);
  r.add("bound", printed);
  r.add("bound_exact", bound);
  r.add("dual_bound", prob.bound(sol.dual_value));
  r.add("status", std::string(to_string(sol.status)));
  r.add("iterations", sol.iterations);
  r.add("primal_residual", sol.primal_residual);
  r.add("dual_residual", sol.dual_residual);
  r.add("gap", sol.gap);

  int code = sol.status == SolveStatus::optimal ? kExitOk : kExitFailed;
  if (code != kExitOk) err << "warning: solver stopped with status " << to_string(sol.status) << "\n";

  if (!a.cert.empty()) {
    try {
      Certificate c = extract(sol, prob);
      write_file(a.cert, serialize(c));
      r.add("certificate", a.cert);
      r.add("certificate_residual", c.residual);
    } catch (const CertificateError& e) {
      err << "error: no certificate: " << e.what() << "\n";
      r.add("certificate_residual", std::string("none"));
      code = kExitFailed;
    }
  }
  r.add("seconds", seconds_since(t0));
  if (!a.report.empty()) write_file(a.report, r.text());
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Upper bounds on entangled game values by noncommutative sums of squares", "ncsos"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Bound a game at one hierarchy level");
  solve_cmd->add_option("game", solve_args.game, "Game file or builtin:NAME")->required();
  solve_cmd->add_option("--level", solve_args.level, "full:<n>, shapes such as 1+AB, or custom:<file>");
  solve_cmd->add_option("--form", solve_args.form, "moment or sos")->check(CLI::IsMember({"moment", "sos"}));
  solve_cmd->add_option("--solver", solve_args.solver, "ipm, or export to only write SDPA")
      ->check(CLI::IsMember({"ipm", "export"}));
  solve_cmd->add_option("--tol", solve_args.tol, "Solver tolerance")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--max-iter", solve_args.max_iter, "Solver iteration limit")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--cert", solve_args.cert, "Write the extracted certificate here");
  solve_cmd->add_option("--export-sdpa", solve_args.sdpa, "Write the SDP in SDPA sparse format");
  solve_cmd->add_option("--report", solve_args.report, "Write a key = value run report");
  solve_cmd->add_flag("--verbose", solve_args.verbose, "Log solver iterations to stderr");

  std::string classical_game;
  auto* classical_cmd = app.add_subcommand("classical", "Exact classical value by enumeration");
  classical_cmd->add_option("game", classical_game, "Game file or builtin:NAME")->required();

  std::string seesaw_game;
  int dim = 2, restarts = 20;
  std::uint64_t seed = 0;
  auto* seesaw_cmd = app.add_subcommand("seesaw", "Quantum lower bound by see-saw at fixed dimension");
  seesaw_cmd->add_option("game", seesaw_game, "Game file or builtin:NAME")->required();
  seesaw_cmd->add_option("--dim", dim, "Local dimension")->check(CLI::Range(1, 64));
  seesaw_cmd->add_option("--restarts", restarts, "Random starting points")->check(CLI::PositiveNumber);
  seesaw_cmd->add_option("--seed", seed, "Seed");

  std::string cert_path, verify_game;
  double verify_tol = 1e-6;
  auto* verify_cmd = app.add_subcommand("verify-cert", "Check a certificate against a game");
  verify_cmd->add_option("cert", cert_path, "Certificate file")->required();
  verify_cmd->add_option("game", verify_game, "Game file or builtin:NAME")->required();
  verify_cmd->add_option("--tol", verify_tol, "Largest accepted residual coefficient")->check(CLI::NonNegativeNumber);

  std::string seq_game;
  int max_level = 2;
  double seq_tol = 1e-8;
  auto* seq_cmd = app.add_subcommand("sequence", "Bounds for levels 1..n");
  seq_cmd->add_option("game", seq_game, "Game file or builtin:NAME")->required();
  seq_cmd->add_option("--max-level", max_level, "Highest level")->check(CLI::PositiveNumber);
  seq_cmd->add_option("--tol", seq_tol, "Solver tolerance")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_args, out, err);

    if (*classical_cmd) {
      const LoadedGame g = load_game(classical_game, err);
      out << num(classical_value(g.game)) << "\n";
      return kExitOk;
    }

    if (*seesaw_cmd) {
      const LoadedGame g = load_game(seesaw_game, err);
      out << num(seesaw_lower_bound(g.game, dim, restarts, seed)) << "\n";
      return kExitOk;
    }

    if (*verify_cmd) {
      const LoadedGame g = load_game(verify_game, err);
      const Certificate c = parse_certificate(read_file(cert_path));
      const double residual = verify(c, g.game);
      out << num(residual) << "\n";
      if (residual > verify_tol) {
        err << "certificate rejected: residual " << num(residual) << " > " << num(verify_tol) << "\n";
        return kExitFailed;
      }
      return kExitOk;
    }

    if (*seq_cmd) {
      const LoadedGame g = load_game(seq_game, err);
      SolverOptions opts;
      opts.tol = seq_tol;
      const auto levels = level_sequence(g.game, max_level, opts);
      int code = kExitOk;
      for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto& l = levels[i];
        char secs[32];
        std::snprintf(secs, sizeof secs, "%.3f", l.seconds);
        out << l.level << " " << num(l.bound) << " " << to_string(l.status) << " " << secs << "\n";
        if (l.status != SolveStatus::optimal && code == kExitOk) code = kExitFailed;
        if (i > 0 && l.bound > levels[i - 1].bound + 1e-6) {
          err << "level " << l.level << " bound exceeds level " << levels[i - 1].level << " by "
              << num(l.bound - levels[i - 1].bound) << "\n";
          code = kExitNotMonotone;
        }
      }
      return code;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace ncsos
