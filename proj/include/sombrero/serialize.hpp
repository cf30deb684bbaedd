#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "sombrero/iterate.hpp"
#include "sombrero/model.hpp"
#include "sombrero/oracle.hpp"
#include "sombrero/reference_table.hpp"

/// Output encoding. CSV is deterministic: 12 significant digits, '.'
// decimal, LF endings, header row. JSON carries a schema_version field.

namespace sombrero {

inline constexpr int kSchemaVersion = 1;

inline std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void to_json(nlohmann::json& j, const DerivedConstants& dc) {
  j = nlohmann::json{{"g", dc.g},
                     {"N", dc.N},
                     {"l", dc.l},
                     {"a", dc.a},
                     {"k", dc.k},
                     {"K", dc.K},
                     {"g_plus", dc.g_plus},
                     {"g_minus", dc.g_minus},
                     {"E0", dc.E0},
                     {"a_min", dc.a_min},
                     {"a_max", dc.a_max},
                     {"g_min", dc.g_min},
                     {"g_max_sq", dc.g_max_sq},
                     {"window_ratio", dc.window_ratio},
                     {"window_limit", dc.window_limit},
                     {"hierarchy_valid", dc.hierarchy_valid}};
}

inline void to_json(nlohmann::json& j, const Bracket& b) {
  j = nlohmann::json{{"lower", b.lower}, {"upper", b.upper},
                     {"width", b.width()}};
}

inline void to_json(nlohmann::json& j, const HierarchyReport& h) {
  j = nlohmann::json{{"window_valid", h.window_valid},
                     {"forced_outside_window", h.forced_outside_window},
                     {"pairs_checked", h.pairs_checked},
                     {"all_ok", h.all_ok},
                     {"note", h.note}};
  if (h.bc == BoundaryCondition::Far) {
    j["shifts_ascending"] = h.shifts_ascending;
    j["f_at_least_one"] = h.f_at_least_one;
    j["f_increasing_in_m"] = h.f_increasing_in_m;
    j["ratios_decreasing"] = h.ratios_decreasing;
  } else {
    j["odd_shifts_ascending"] = h.odd_shifts_ascending;
    j["even_shifts_descending"] = h.even_shifts_descending;
    j["even_above_odd"] = h.even_above_odd;
    j["ratio_signs_alternate"] = h.ratio_signs_alternate;
  }
}

inline const char* bc_name(BoundaryCondition bc) {
  return bc == BoundaryCondition::Far ? "far" : "origin";
}

// Per-iteration table. f_boundary is the unpinned end of the iterate: the
// first node under the far normalization, the last under the origin one.
// bound_side says which side of the limit E_m sits on; shift_order_ok
// whether the shift kept its expected ordering against its predecessor
// (same parity under the origin normalization).
inline std::string iterations_csv(const SolveResult& res) {
  const bool far = res.bc == BoundaryCondition::Far;
  std::string out = "m,shift,energy,f_boundary,bound_side,shift_order_ok\n";
  for (size_t i = 0; i < res.shifts.size(); ++i) {
    const int m = static_cast<int>(i) + 1;
    const auto& f = res.f_history[i + 1];
    bool order_ok = true;
    if (far) {
      if (i >= 1) order_ok = res.shifts[i] > res.shifts[i - 1];
    } else {
      if (i >= 2)
        order_ok = (m % 2 == 1) ? res.shifts[i] > res.shifts[i - 2]
                                : res.shifts[i] < res.shifts[i - 2];
    }
    out += std::to_string(m);
    out += ',';
    out += fmt12(res.shifts[i]);
    out += ',';
    out += fmt12(res.energies[i]);
    out += ',';
    out += fmt12(far ? f.front() : f.back());
    out += ',';
    out += (far || m % 2 == 1) ? "upper" : "lower";
    out += ',';
    out += order_ok ? "yes" : "no";
    out += '\n';
  }
  return out;
}

// Limit of r^{-K} phi f at the origin; nonzero only when k = K.
inline double origin_R_limit(const SolveResult& res, double scale) {
  if (res.dc.k > res.dc.K) return 0.0;
  const double log_head = std::log(2.0) +
                          res.dc.k * std::log((1.0 + res.dc.a) / res.dc.a) -
                          2.0 * res.dc.g / 3.0 + std::log(2.0 * res.dc.g);
  return std::exp(log_head) * res.f_final.front() * scale;
}

inline std::string wavefunction_csv(const SolveResult& res,
                                    double scale = 1.0, bool emit_R = false) {
  std::string out = emit_R ? "r,f,psi,R\n" : "r,f,psi\n";
  if (emit_R && !res.grid.include_origin) {
    out += "0,";
    out += fmt12(res.f_final.front());
    out += ",0,";
    out += fmt12(origin_R_limit(res, scale));
    out += '\n';
  }
  for (int i = 0; i < res.grid.size(); ++i) {
    const double r = res.grid.nodes[i];
    const double psi = std::exp(res.log_phi[i]) * res.f_final[i] * scale;
    out += fmt12(r);
    out += ',';
    out += fmt12(res.f_final[i]);
    out += ',';
    out += fmt12(psi);
    if (emit_R) {
      out += ',';
      out += fmt12(res.dc.K > 0.0 ? std::pow(r, -res.dc.K) * psi : psi);
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::json solve_json(const SolveResult& res,
                                 std::optional<double> oracle_energy = {},
                                 bool include_wave = false,
                                 double scale = 1.0, bool emit_R = false) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "solve";
  j["params"] = res.dc;
  j["bc"] = bc_name(res.bc);
  j["grid"] = {{"nodes", res.grid.size()}, {"r_max", res.grid.r_max}};
  j["shifts"] = res.shifts;
  j["energies"] = res.energies;
  j["E_final"] = res.E_final;
  j["converged"] = res.converged;
  j["iterations"] = res.iterations;
  j["max_zero_charge_residue"] = res.max_zero_charge_residue;
  j["bracket"] = res.bracket ? nlohmann::json(*res.bracket)
                             : nlohmann::json(nullptr);
  j["hierarchy"] = res.hierarchy;
  if (oracle_energy) {
    j["oracle_energy"] = *oracle_energy;
    j["oracle_deviation"] = std::abs(res.E_final - *oracle_energy);
  }
  if (include_wave) {
    nlohmann::json wave;
    wave["r"] = res.grid.nodes;
    wave["f"] = res.f_final;
    std::vector<double> psi(res.grid.size());
    for (int i = 0; i < res.grid.size(); ++i)
      psi[i] = std::exp(res.log_phi[i]) * res.f_final[i] * scale;
    wave["psi"] = psi;
    if (emit_R) {
      std::vector<double> R(res.grid.size());
      for (int i = 0; i < res.grid.size(); ++i)
        R[i] = res.dc.K > 0.0
                   ? std::pow(res.grid.nodes[i], -res.dc.K) * psi[i]
                   : psi[i];
      wave["R"] = R;
    }
    j["wave"] = wave;
  }
  return j;
}

inline std::string table_csv(const TableCheck& chk) {
  std::string out =
      "k,a,column,computed,reference,deviation,within_tolerance\n";
  for (const TableRowCheck& rc : chk.rows) {
    auto line = [&](const char* name, const TableCell& cell) {
      out += fmt12(rc.k);
      out += ',';
      out += fmt12(rc.a);
      out += ',';
      out += name;
      out += ',';
      out += fmt12(cell.computed);
      out += ',';
      out += fmt12(cell.reference);
      out += ',';
      out += fmt12(cell.deviation);
      out += ',';
      out += cell.ok ? "yes" : "no";
      out += '\n';
    };
    line("a_max", rc.a_max);
    line("a_min", rc.a_min);
    line("g2_max", rc.g2_max);
    line("g2_min", rc.g2_min);
  }
  return out;
}

inline nlohmann::json table_json(const TableCheck& chk) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "table";
  j["g"] = chk.g;
  j["tolerance"] = chk.tolerance;
  j["cell_failures"] = chk.cell_failures;
  j["all_ok"] = chk.all_ok;
  auto cell = [](const TableCell& c) {
    return nlohmann::json{{"computed", c.computed},
                          {"reference", c.reference},
                          {"deviation", c.deviation},
                          {"ok", c.ok}};
  };
  for (const TableRowCheck& rc : chk.rows)
    j["rows"].push_back(nlohmann::json{{"k", rc.k},
                                       {"a", rc.a},
                                       {"a_max", cell(rc.a_max)},
                                       {"a_min", cell(rc.a_min)},
                                       {"g2_max", cell(rc.g2_max)},
                                       {"g2_min", cell(rc.g2_min)},
                                       {"ok", rc.ok}});
  return j;
}

inline std::string prototype_csv(const PrototypeResult& pr,
                                 const GapBoundReport& rep) {
  std::string out = "n,shift,gap,bound,margin,f0_increment,f0_bound\n";
  for (const GapBoundRow& row : rep.rows) {
    out += std::to_string(row.n);
    out += ',';
    out += fmt12(pr.run.shifts[row.n - 1]);
    out += ',';
    out += fmt12(row.gap);
    out += ',';
    out += fmt12(row.bound);
    out += ',';
    out += fmt12(row.bound - row.gap);
    out += ',';
    out += fmt12(row.f0_increment);
    out += ',';
    out += fmt12(row.f0_bound);
    out += '\n';
  }
  return out;
}

inline nlohmann::json prototype_json(const PrototypeResult& pr,
                                     const GapBoundReport& rep) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "prototype";
  j["g"] = pr.g;
  j["shifts"] = pr.run.shifts;
  j["gaps"] = pr.gaps;
  j["f0_increments"] = pr.f0_increments;
  j["first_shift_expansion"] = prototype_shift1_expansion(pr.g);
  j["all_ok"] = rep.all_ok;
  for (const GapBoundRow& row : rep.rows)
    j["rows"].push_back(nlohmann::json{{"n", row.n},
                                       {"gap", row.gap},
                                       {"bound", row.bound},
                                       {"margin", row.bound - row.gap},
                                       {"f0_increment", row.f0_increment},
                                       {"f0_bound", row.f0_bound}});
  return j;
}

}  // namespace sombrero
