#include <atomic>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sombrero/angular.hpp"
#include "sombrero/errors.hpp"
#include "sombrero/iterate.hpp"
#include "sombrero/model.hpp"
#include "sombrero/oracle.hpp"
#include "sombrero/reference_table.hpp"
#include "sombrero/serialize.hpp"

// Exit contract: 0 success, 1 usage/structural, 2 validation or bound
// failure (window, breakdown, table/bound mismatch), 3 numerical failure
// (no convergence, lost bracket, lost positivity).

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct ModelArgs {
  double g = 0.0;
  int N = 0;
  int l = -1;
  double a = 0.0;
  double k = -1.0;
};

sombrero::DerivedConstants make_constants(const ModelArgs& ma) {
  if (ma.k >= 0.0) return sombrero::derive_constants(ma.g, ma.k, ma.a);
  if (ma.N < 2 || ma.l < 0)
    throw sombrero::StructuralError(
        "give either --k, or both --N (>= 2) and --l (>= 0)");
  const double k = ma.l + 0.5 * (ma.N - 1);
  return sombrero::derive_constants(ma.g, k, ma.a, ma.N, ma.l);
}

void add_model_options(CLI::App* cmd, ModelArgs& ma) {
  cmd->add_option("--g", ma.g, "coupling g")->required();
  cmd->add_option("--N", ma.N, "spatial dimension");
  cmd->add_option("--l", ma.l, "angular momentum");
  cmd->add_option("--a", ma.a, "trial-function shape parameter")->required();
  cmd->add_option("--k", ma.k, "effective exponent k = l + (N-1)/2");
}

struct GridArgs {
  int nodes = 4001;
  double tail = 60.0;
  double rmax = 0.0;
};

void add_grid_options(CLI::App* cmd, GridArgs& ga) {
  cmd->add_option("--nodes", ga.nodes, "grid node count");
  cmd->add_option("--tail", ga.tail, "far-boundary threshold on 2g*S0(r_max)");
  cmd->add_option("--rmax", ga.rmax, "override r_max directly");
}

sombrero::GridConfig to_grid_config(const GridArgs& ga) {
  sombrero::GridConfig gc;
  gc.node_count = ga.nodes;
  gc.tail_threshold = ga.tail;
  gc.r_max_override = ga.rmax;
  return gc;
}

sombrero::BoundaryCondition parse_bc(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(c));
  if (s == "a" || s == "far" || s == "infinity")
    return sombrero::BoundaryCondition::Far;
  if (s == "b" || s == "origin") return sombrero::BoundaryCondition::Origin;
  throw sombrero::StructuralError("unknown boundary condition '" + s +
                                  "' (use A|far or B|origin)");
}

sombrero::QuadRule parse_rule(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(c));
  if (s == "parabolic") return sombrero::QuadRule::Parabolic;
  if (s == "trapezoid") return sombrero::QuadRule::Trapezoid;
  throw sombrero::StructuralError("unknown rule '" + s +
                                  "' (use parabolic or trapezoid)");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sombrero::StructuralError("cannot open " + path);
  out << text;
  if (!out) throw sombrero::StructuralError("write failed on " + path);
}

int cmd_validate(const ModelArgs& ma) {
  const auto dc = make_constants(ma);
  nlohmann::json j = dc;
  j["schema_version"] = sombrero::kSchemaVersion;
  j["kind"] = "validate";
  std::cout << j.dump(2) << '\n';
  return dc.hierarchy_valid ? kExitOk : kExitValidation;
}

struct SolveArgs {
  ModelArgs model;
  GridArgs grid;
  std::string bc = "A";
  std::string rule = "parabolic";
  double tol = 1e-10;
  int max_iter = 50;
  int min_iter = 0;
  bool force = false;
  bool oracle = false;
  bool emit_R = false;
  double f_inf = 1.0;
  std::string out = "solve";
  std::string format = "csv";
};

void write_solve_outputs(const sombrero::SolveResult& res,
                         const SolveArgs& sa,
                         std::optional<double> oracle_energy) {
  const double f_far = res.f_final.empty() ? 1.0 : res.f_final.back();
  const double scale = sa.f_inf / f_far;
  if (sa.format == "json") {
    const auto j = sombrero::solve_json(res, oracle_energy, true, scale,
                                        sa.emit_R);
    write_file(sa.out + ".json", j.dump(2) + "\n");
  } else {
    write_file(sa.out + "_iterations.csv", sombrero::iterations_csv(res));
    write_file(sa.out + "_wave.csv",
               sombrero::wavefunction_csv(res, scale, sa.emit_R));
  }
}

int cmd_solve(const SolveArgs& sa) {
  if (sa.format != "csv" && sa.format != "json")
    throw sombrero::StructuralError("--format must be csv or json");
  const auto dc = make_constants(sa.model);
  const auto bc = parse_bc(sa.bc);

  sombrero::SolveConfig cfg;
  cfg.grid = to_grid_config(sa.grid);
  cfg.rule = parse_rule(sa.rule);
  cfg.tol = sa.tol;
  cfg.max_iter = sa.max_iter;
  cfg.min_iter = sa.min_iter;
  cfg.force = sa.force;

  std::optional<double> oracle_energy;
  if (sa.oracle) oracle_energy = sombrero::fd_ground_energy(dc);

  sombrero::SolveResult res;
  try {
    res = sombrero::solve(dc, bc, cfg);
  } catch (const sombrero::BoundaryBreakdown& bd) {
    if (bd.partial) write_solve_outputs(*bd.partial, sa, oracle_energy);
    std::cerr << "breakdown at pass " << bd.iteration << ": " << bd.what()
              << '\n';
    return kExitValidation;
  }

  write_solve_outputs(res, sa, oracle_energy);
  std::cout << "bc=" << sombrero::bc_name(res.bc)
            << " E_final=" << sombrero::fmt12(res.E_final)
            << " iterations=" << res.iterations
            << " converged=" << (res.converged ? "yes" : "no");
  if (res.bracket)
    std::cout << " bracket_width=" << sombrero::fmt12(res.bracket->width());
  if (oracle_energy)
    std::cout << " oracle=" << sombrero::fmt12(*oracle_energy)
              << " deviation="
              << sombrero::fmt12(std::abs(res.E_final - *oracle_energy));
  std::cout << '\n';
  return res.converged ? kExitOk : kExitNumerical;
}

struct SweepArgs {
  double g = 3.0;
  std::string bc = "A";
  std::string pairs;  // "k:a,k:a"; empty = embedded reference rows
  GridArgs grid;
  bool force = false;
  std::string out = "sweep";
};

std::vector<std::pair<double, double>> parse_pairs(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  if (text.empty()) {
    for (const auto& row : sombrero::kReferenceTable)
      out.emplace_back(row.k, row.a);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw sombrero::StructuralError("--pairs wants k:a entries, got '" +
                                      item + "'");
    try {
      out.emplace_back(std::stod(item.substr(0, colon)),
                       std::stod(item.substr(colon + 1)));
    } catch (const std::exception&) {
      throw sombrero::StructuralError("--pairs entry not numeric: '" + item +
                                      "'");
    }
  }
  if (out.empty()) throw sombrero::StructuralError("--pairs is empty");
  return out;
}

int sweep_thread_cap() {
  if (const char* env = std::getenv("SOMBRERO_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

int cmd_sweep(const SweepArgs& sa) {
  const auto tasks = parse_pairs(sa.pairs);
  const auto bc = parse_bc(sa.bc);
  const int n = static_cast<int>(tasks.size());

  struct Outcome {
    int code = kExitOk;
    std::string line;
  };
  std::vector<Outcome> outcomes(n);

  auto run_one = [&](int i) {
    const auto [k, a] = tasks[i];
    std::ostringstream line;
    line << "k=" << sombrero::fmt12(k) << " a=" << sombrero::fmt12(a) << ' ';
    try {
      const auto dc = sombrero::derive_constants(sa.g, k, a);
      sombrero::SolveConfig cfg;
      cfg.grid = to_grid_config(sa.grid);
      cfg.force = sa.force;
      const auto res = sombrero::solve(dc, bc, cfg);
      const auto j = sombrero::solve_json(res);
      write_file(sa.out + "_k" + sombrero::fmt12(k) + ".json",
                 j.dump(2) + "\n");
      line << "E_final=" << sombrero::fmt12(res.E_final)
           << " converged=" << (res.converged ? "yes" : "no");
      outcomes[i].code = res.converged ? kExitOk : kExitNumerical;
    } catch (const sombrero::BoundaryBreakdown& bd) {
      line << "breakdown at pass " << bd.iteration;
      outcomes[i].code = kExitValidation;
    } catch (const sombrero::InvalidWindow& e) {
      line << "outside window: " << e.what();
      outcomes[i].code = kExitValidation;
    } catch (const std::exception& e) {
      line << "error: " << e.what();
      outcomes[i].code = kExitNumerical;
    }
    outcomes[i].line = line.str();
  };

  const int workers = std::min(n, sweep_thread_cap());
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1))
        run_one(i);
    });
  for (auto& th : pool) th.join();

  int worst = kExitOk;
  for (const auto& oc : outcomes) {
    std::cout << oc.line << '\n';
    worst = std::max(worst, oc.code);
  }
  return worst;
}

int cmd_table1(const std::string& out, const std::string& format) {
  const auto chk = sombrero::check_reference_table();
  if (format == "json")
    write_file(out + ".json", sombrero::table_json(chk).dump(2) + "\n");
  else
    write_file(out + ".csv", sombrero::table_csv(chk));
  for (const auto& rc : chk.rows) {
    auto complain = [&](const char* name, const sombrero::TableCell& cell) {
      if (!cell.ok)
        std::cout << "mismatch k=" << sombrero::fmt12(rc.k) << ' ' << name
                  << ": computed " << sombrero::fmt12(cell.computed)
                  << " vs reference " << sombrero::fmt12(cell.reference)
                  << " (|diff| = " << sombrero::fmt12(cell.deviation) << ")\n";
    };
    complain("a_max", rc.a_max);
    complain("a_min", rc.a_min);
    complain("g2_max", rc.g2_max);
    complain("g2_min", rc.g2_min);
  }
  std::cout << (chk.all_ok ? "all cells within tolerance"
                           : "some cells out of tolerance")
            << '\n';
  return chk.all_ok ? kExitOk : kExitValidation;
}

int cmd_proto1d(double g, int n_max, const std::string& out,
                const std::string& format) {
  sombrero::PrototypeConfig cfg;
  cfg.n_max = n_max;
  const auto pr = sombrero::prototype1d_solve(g, cfg);
  const auto rep = sombrero::check_gap_bounds(pr);
  if (format == "json")
    write_file(out + ".json", sombrero::prototype_json(pr, rep).dump(2) + "\n");
  else
    write_file(out + ".csv", sombrero::prototype_csv(pr, rep));
  std::cout << "shift_1=" << sombrero::fmt12(pr.run.shifts.front())
            << " expansion=" << sombrero::fmt12(
                   sombrero::prototype_shift1_expansion(g))
            << " bounds=" << (rep.all_ok ? "hold" : "violated") << '\n';
  return rep.all_ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radial double-well ground-state solver"};
  app.require_subcommand(1);

  ModelArgs validate_args;
  auto* validate = app.add_subcommand(
      "validate", "derive constants and check the parameter window");
  add_model_options(validate, validate_args);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "run the iteration to its limit");
  add_model_options(solve, solve_args.model);
  add_grid_options(solve, solve_args.grid);
  solve->add_option("--bc", solve_args.bc, "boundary condition: A|far, B|origin");
  solve->add_option("--rule", solve_args.rule, "quadrature rule");
  solve->add_option("--tol", solve_args.tol, "energy stop tolerance");
  solve->add_option("--max-iter", solve_args.max_iter, "iteration cap");
  solve->add_option("--min-iter", solve_args.min_iter,
                    "passes to run before the tolerance stop applies");
  solve->add_flag("--force", solve_args.force, "run outside the window");
  solve->add_flag("--oracle", solve_args.oracle,
                  "compare against the finite-difference oracle");
  solve->add_flag("--emit-R", solve_args.emit_R,
                  "emit the reduced profile r^{-K} psi as well");
  solve->add_option("--f-inf", solve_args.f_inf,
                    "normalization: far value assigned to f");
  solve->add_option("--out", solve_args.out, "output path prefix");
  solve->add_option("--format", solve_args.format, "csv or json");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep",
                                   "solve several (k, a) pairs concurrently");
  sweep->add_option("--g", sweep_args.g, "coupling g");
  sweep->add_option("--bc", sweep_args.bc, "boundary condition");
  sweep->add_option("--pairs", sweep_args.pairs,
                    "comma list of k:a (default: embedded reference rows)");
  add_grid_options(sweep, sweep_args.grid);
  sweep->add_flag("--force", sweep_args.force, "run outside the window");
  sweep->add_option("--out", sweep_args.out, "output path prefix");

  std::string table_out = "table1", table_format = "csv";
  auto* table1 = app.add_subcommand(
      "table1", "regenerate the parameter table and compare");
  table1->add_option("--out", table_out, "output path prefix");
  table1->add_option("--format", table_format, "csv or json");

  double proto_g = 0.0;
  int proto_n = 6;
  std::string proto_out = "proto1d", proto_format = "csv";
  auto* proto = app.add_subcommand(
      "proto1d", "half-line prototype run with convergence bounds");
  proto->add_option("--g", proto_g, "coupling g (needs g > 2)")->required();
  proto->add_option("--n", proto_n, "number of passes");
  proto->add_option("--out", proto_out, "output path prefix");
  proto->add_option("--format", proto_format, "csv or json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(validate_args);
    if (solve->parsed()) return cmd_solve(solve_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
    if (table1->parsed()) return cmd_table1(table_out, table_format);
    if (proto->parsed())
      return cmd_proto1d(proto_g, proto_n, proto_out, proto_format);
  } catch (const sombrero::InvalidWindow& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const sombrero::BoundaryBreakdown& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const sombrero::NonpositiveIterate& e) {
    std::cerr << e.what() << '\n';
    return kExitNumerical;
  } catch (const sombrero::NoBracket& e) {
    std::cerr << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
