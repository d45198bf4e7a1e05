#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"

using namespace bowsp;

namespace {

/// Minimal reader for the LP subset the emitter writes.
struct LpRow {
  std::vector<std::pair<std::string, double>> terms;
  std::string sense;
  double rhs = 0;
};

struct LpFile {
  std::vector<std::pair<std::string, double>> objective;
  std::map<std::string, LpRow> rows;
  std::vector<std::string> row_order;
  std::map<std::string, std::pair<double, double>> bounds;
  std::set<std::string> binaries;
  std::set<std::string> variables;
};

std::vector<std::pair<std::string, double>> parse_terms(std::istringstream& in, std::string& stop) {
  std::vector<std::pair<std::string, double>> out;
  double sign = 1;
  double coef = 1;
  bool have_coef = false;
  std::string tok;
  while (in >> tok) {
    if (tok == "<=" || tok == ">=" || tok == "=") {
      stop = tok;
      return out;
    }
    if (tok == "+") {
      sign = 1;
    } else if (tok == "-") {
      sign = -1;
    } else if (std::isdigit(static_cast<unsigned char>(tok[0])) != 0) {
      coef = std::stod(tok);
      have_coef = true;
    } else {
      out.emplace_back(tok, sign * (have_coef ? coef : 1.0));
      sign = 1;
      coef = 1;
      have_coef = false;
    }
  }
  stop.clear();
  return out;
}

LpFile parse_lp(const std::string& text) {
  // join continuation lines (they start with three spaces)
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("   ", 0) == 0 && !lines.empty())
      lines.back() += " " + line;
    else
      lines.push_back(line);
  }
  LpFile lp;
  std::string section;
  for (const auto& l : lines) {
    if (l.empty() || l[0] == '\\') continue;
    if (l[0] != ' ') {
      section = l;
      continue;
    }
    std::istringstream ls(l);
    if (section == "Minimize" || section == "Subject To") {
      std::string label;
      ls >> label;
      label.pop_back();  // trailing ':'
      std::string stop;
      auto terms = parse_terms(ls, stop);
      for (auto& t : terms) lp.variables.insert(t.first);
      if (section == "Minimize") {
        lp.objective = terms;
      } else {
        LpRow row{terms, stop, 0};
        ls >> row.rhs;
        lp.rows[label] = row;
        lp.row_order.push_back(label);
      }
    } else if (section == "Bounds") {
      std::string a;
      std::string op;
      std::string b;
      ls >> a >> op >> b;
      if (op == "=") {
        lp.bounds[a] = {std::stod(b), std::stod(b)};
      } else {
        std::string op2;
        std::string c;
        ls >> op2 >> c;
        lp.bounds[b] = {std::stod(a), std::stod(c)};
      }
    } else if (section == "Binaries") {
      std::string v;
      ls >> v;
      lp.binaries.insert(v);
    }
  }
  return lp;
}

double eval(const std::vector<std::pair<std::string, double>>& terms, const std::map<std::string, double>& v) {
  double s = 0;
  for (const auto& [name, c] : terms) s += c * v.at(name);
  return s;
}

bool row_ok(const LpRow& r, double lhs) {
  if (r.sense == "<=") return lhs <= r.rhs + 1e-9;
  if (r.sense == ">=") return lhs >= r.rhs - 1e-9;
  return std::abs(lhs - r.rhs) <= 1e-9;
}

/// Fixes every variable from the plan's x values by unit propagation over
/// the structural rows; returns false if something stays undetermined.
bool propagate(const LpFile& lp, const std::vector<int>& plan, std::map<std::string, double>& value) {
  for (const auto& v : lp.variables) {
    if (v.rfind("x_s", 0) == 0) {
      const auto u_pos = v.find("_u");
      const int s = std::stoi(v.substr(3, u_pos - 3)) - 1;
      const int u = std::stoi(v.substr(u_pos + 2)) - 1;
      value[v] = plan[static_cast<std::size_t>(s)] == u ? 1 : 0;
    }
  }
  for (const auto& [name, b] : lp.bounds)
    if (b.first == b.second) value[name] = b.first;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& name : lp.row_order) {
      if (name.rfind("auth_", 0) == 0 || name.rfind("cons_", 0) == 0) continue;
      const auto& r = lp.rows.at(name);
      std::string unknown;
      double coef = 0;
      double known = 0;
      int unknowns = 0;
      for (const auto& [v, c] : r.terms) {
        if (value.count(v) != 0) {
          known += c * value.at(v);
        } else {
          ++unknowns;
          unknown = v;
          coef += c;
        }
      }
      if (unknowns != 1) continue;
      // which of 0 / 1 satisfies the row?
      const bool zero = row_ok(r, known);
      const bool one = row_ok(r, known + coef);
      if (zero != one) {
        value[unknown] = one ? 1 : 0;
        changed = true;
      }
    }
  }
  for (const auto& v : lp.variables)
    if (value.count(v) == 0) return false;
  for (const auto& v : lp.binaries)
    if (value.count(v) == 0) return false;
  return true;
}

std::string solution_text(const std::map<std::string, double>& value) {
  std::string out;
  for (const auto& [name, v] : value) out += name + " " + std::to_string(v) + "\n";
  return out;
}

}  // namespace

TEST(MipBridge, ModelValuesEqualPlanWeights) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const int k = std::uniform_int_distribution<int>(2, 4)(rng);
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    const Schema s = trial % 2 == 0 ? oracle::random_schema(rng, k, n, 0) : oracle::random_schema(rng, k, n, 2);
    auto lim = [&] { return std::uniform_int_distribution<Weight>(0, 30)(rng); };
    const Weight a = trial < 10 ? 0 : lim();
    const Weight c = trial < 10 ? 0 : lim();
    const BoundedMinimizeQuery q{trial % 2, a, trial < 10 ? s.bounds.auth : a + lim(), c, trial < 10 ? s.bounds.cons : c + lim()};
    const std::string text = emit_lp(s, q);
    const LpFile lp = parse_lp(text);
    const MipModel model = emit_model(s, q);
    oracle::for_each_plan(k, n, [&](const std::vector<int>& plan) {
      std::map<std::string, double> value;
      ASSERT_TRUE(propagate(lp, plan, value)) << text;
      const auto w = oracle::weights(s, plan);
      ASSERT_DOUBLE_EQ(eval(lp.rows.at("auth_lo").terms, value), static_cast<double>(w.auth));
      ASSERT_DOUBLE_EQ(eval(lp.rows.at("cons_lo").terms, value), static_cast<double>(w.cons));
      ASSERT_DOUBLE_EQ(eval(lp.objective, value), static_cast<double>(q.alpha == 0 ? w.auth : w.cons));
      const bool inside = q.contains(w);
      bool all_rows = true;
      for (const auto& [name, r] : lp.rows) all_rows = all_rows && row_ok(r, eval(r.terms, value));
      ASSERT_EQ(all_rows, inside);
      if (inside) {
        const Plan p = import_solution(s, model, solution_text(value));
        ASSERT_EQ(p.assignment, plan);
        ASSERT_EQ((WeightPoint{p.constraint_weight, p.auth_weight}), w);
      } else {
        try {
          (void)import_solution(s, model, solution_text(value));
          FAIL() << "outside the box but accepted";
        } catch (const Error& e) {
          ASSERT_EQ(e.code(), "inconsistent-solution");
        }
      }
    });
  }
}

TEST(MipBridge, LpStructure) {
  const Schema s = purchase_order_fixture();
  const std::string text = emit_lp(s, {0, 0, 5, 0, 7});
  const LpFile lp = parse_lp(text);
  EXPECT_EQ(lp.rows.at("auth_hi").rhs, 5);
  EXPECT_EQ(lp.rows.at("cons_hi").rhs, 7);
  EXPECT_EQ(lp.rows.at("assign_s1").terms.size(), 8U);
  EXPECT_EQ(lp.rows.at("assign_s1").sense, "=");
  EXPECT_EQ(lp.binaries.count("x_s6_u8"), 1U);
  EXPECT_EQ(lp.bounds.at("const_one"), std::make_pair(1.0, 1.0));
  EXPECT_EQ(text.rfind("End\n"), text.size() - 4);
  EXPECT_EQ(emit_lp(s, {0, 0, 5, 0, 7}), text);
}

TEST(MipBridge, ImportErrors) {
  const Schema s = purchase_order_fixture();
  const MipModel m = emit_model(s, {0, 0, 1000, 0, 1000});
  auto code = [&](const std::string& text) {
    try {
      (void)import_solution(s, m, text);
    } catch (const Error& e) {
      return e.code();
    }
    return std::string();
  };
  EXPECT_EQ(code("x_s1_u1 1\nbogus 1\n"), "bad-solution-file");
  EXPECT_EQ(code("x_s1_u1 0.5\n"), "non-integral-solution");
  EXPECT_EQ(code("x_s1_u1 1\n"), "infeasible-solution-file");
  EXPECT_EQ(code("x_s1_u1\n"), "bad-solution-file");
}

TEST(MipBridge, ExplicitTablesHaveNoEncoding) {
  try {
    (void)emit_lp(worst_case_family(3), {0, 0, 10, 0, 10});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "no-linear-encoding");
  }
}

TEST(MipBridge, ExternalBackendAgreesWithOracle) {
  // a scripted "solver" that answers each model by exhaustive search over
  // plans and writes the x values plus propagated auxiliaries
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 12; ++trial) {
    const int k = std::uniform_int_distribution<int>(2, 3)(rng);
    const int n = std::uniform_int_distribution<int>(2, 3)(rng);
    const Schema s = oracle::random_schema(rng, k, n, trial % 2 == 0 ? 0 : 2);
    ExternalBackend backend([&](const std::string& text) -> std::optional<std::string> {
      const LpFile lp = parse_lp(text);
      std::optional<std::map<std::string, double>> best;
      double best_obj = 0;
      oracle::for_each_plan(k, n, [&](const std::vector<int>& plan) {
        std::map<std::string, double> value;
        if (!propagate(lp, plan, value)) return;
        for (const auto& [name, r] : lp.rows)
          if (!row_ok(r, eval(r.terms, value))) return;
        const double obj = eval(lp.objective, value);
        if (!best || obj < best_obj) {
          best = value;
          best_obj = obj;
        }
      });
      if (!best) return std::nullopt;
      return solution_text(*best);
    });
    EXPECT_EQ(eps_front(s, backend).weight_points(), oracle::front(s));
  }
}

TEST(MipBridge, CommandSolverReportsInfeasibleOnFailure) {
  auto solve = command_solver("false {lp} {sol}");
  EXPECT_FALSE(solve("Minimize\n obj: 0 const_one\nEnd\n").has_value());
  auto copy = command_solver("printf 'x_s1_u1 1\\n' > {sol}");
  const auto out = copy("ignored");
  ASSERT_TRUE(out.has_value());
  EXPECT_EQ(*out, "x_s1_u1 1\n");
}
