#pragma once

#include <cmath>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <unistd.h>

#include "epsfront.hpp"
#include "instance_io.hpp"
#include "schema.hpp"

namespace bowsp {

enum class VarKind { Binary, Continuous, Fixed };

struct MipVariable {
  std::string name;
  VarKind kind = VarKind::Binary;
  double lower = 0;
  double upper = 1;
};

struct LinearExpr {
  std::vector<std::pair<int, Weight>> terms;  // (variable index, coefficient)

  void add(int var, Weight coef) {
    if (coef != 0) terms.emplace_back(var, coef);
  }
  void append(const LinearExpr& o) { terms.insert(terms.end(), o.terms.begin(), o.terms.end()); }
};

enum class RowSense { LessEqual, GreaterEqual, Equal };

struct MipRow {
  std::string name;
  LinearExpr expr;
  RowSense sense = RowSense::Equal;
  Weight rhs = 0;
};

/// The bounded-minimization model: x_s{i}_u{j} assignment binaries plus the
/// auxiliary variables of each authorization and constraint encoding.
struct MipModel {
  int step_count = 0;
  int user_count = 0;
  std::vector<MipVariable> variables;
  std::unordered_map<std::string, int> index;
  LinearExpr objective;
  std::vector<MipRow> rows;
  std::vector<std::string> notes;

  int add_variable(std::string name, VarKind kind, double lower = 0, double upper = 1) {
    const int id = static_cast<int>(variables.size());
    index.emplace(name, id);
    variables.push_back({std::move(name), kind, lower, upper});
    return id;
  }

  [[nodiscard]] int x(int step, int user) const { return step * user_count + user; }

  void add_row(std::string name, LinearExpr expr, RowSense sense, Weight rhs) {
    rows.push_back({std::move(name), std::move(expr), sense, rhs});
  }
};

inline std::string x_name(int step, int user) { return "x_s" + std::to_string(step + 1) + "_u" + std::to_string(user + 1); }

namespace detail {

struct ModelBuilder {
  const Schema& schema;
  MipModel model;
  int one = -1;  // fixed variable carrying constant terms

  explicit ModelBuilder(const Schema& s) : schema(s) {
    model.step_count = s.step_count;
    model.user_count = s.user_count();
    for (int st = 0; st < s.step_count; ++st)
      for (int u = 0; u < s.user_count(); ++u) model.add_variable(x_name(st, u), VarKind::Binary);
    one = model.add_variable("const_one", VarKind::Fixed, 1, 1);
  }

  [[nodiscard]] int x(int step, int user) const { return model.x(step, user); }

  /// v = [some step of `steps` goes to u]: v >= x_su each, v <= sum x_su.
  int any_indicator(const std::string& name, int user, StepSet steps) {
    const int v = model.add_variable(name, VarKind::Continuous);
    LinearExpr upper;
    upper.add(v, 1);
    steps.for_each([&](int s) {
      LinearExpr lower;
      lower.add(v, 1);
      lower.add(x(s, user), -1);
      model.add_row(name + "_ge_s" + std::to_string(s + 1), std::move(lower), RowSense::GreaterEqual, 0);
      upper.add(x(s, user), -1);
    });
    model.add_row(name + "_le", std::move(upper), RowSense::LessEqual, 0);
    return v;
  }

  LinearExpr auth_expr() {
    LinearExpr e;
    const int k = schema.step_count;
    const int n = schema.user_count();
    if (std::holds_alternative<ExplicitTableAuth>(schema.auth))
      throw Error("no-linear-encoding", "explicit set-weight tables have no compact linear encoding");
    if (const auto* lin = std::get_if<PerStepLinearAuth>(&schema.auth)) {
      for (int s = 0; s < k; ++s)
        for (int u = 0; u < n; ++u) e.add(x(s, u), lin->weights[static_cast<std::size_t>(s * n + u)]);
      return e;
    }
    if (const auto* av = std::get_if<AvailabilityAuth>(&schema.auth)) {
      for (int s = 0; s < k; ++s)
        for (int u = 0; u < n; ++u) e.add(x(s, u), av->model.step_weight(s, u));
      return e;
    }
    const Weight big = std::get<ProfileAuth>(schema.auth).prohibitive;
    const StepSet all = schema.all_steps();
    for (int u = 0; u < n; ++u) {
      const auto& profile = schema.users[static_cast<std::size_t>(u)].profile;
      if (const auto* staff = std::get_if<StaffProfile>(&profile)) {
        staff->fallback.for_each([&](int s) { e.add(x(s, u), staff->sigma); });
        (all - (staff->authorized | staff->fallback)).for_each([&](int s) { e.add(x(s, u), big); });
      } else if (const auto* consultant = std::get_if<ConsultantProfile>(&profile)) {
        const std::string tag = "_u" + std::to_string(u + 1);
        const int p = any_indicator("p" + tag, u, all);
        e.add(p, consultant->sigma);
        const StepSet outside = all - consultant->fallback;
        if (!outside.empty()) {
          const int q = any_indicator("q" + tag, u, outside);
          e.add(q, big - consultant->sigma);
        }
      } else {
        for (int s = 0; s < k; ++s) e.add(x(s, u), big);
      }
    }
    return e;
  }

  /// p = [both steps of a pair scope share a user], linked exactly.
  int same_user_indicator(const std::string& name, int s, int t) {
    const int p = model.add_variable(name, VarKind::Continuous);
    for (int u = 0; u < schema.user_count(); ++u) {
      const std::string tag = name + "_u" + std::to_string(u + 1);
      LinearExpr ge;
      ge.add(p, 1);
      ge.add(x(s, u), -1);
      ge.add(x(t, u), -1);
      model.add_row(tag + "_ge", std::move(ge), RowSense::GreaterEqual, -1);
      LinearExpr le;
      le.add(p, 1);
      le.add(x(s, u), 1);
      le.add(x(t, u), -1);
      model.add_row(tag + "_le", std::move(le), RowSense::LessEqual, 1);
    }
    return p;
  }

  LinearExpr counting_expr(const WeightedConstraint& c, const std::string& tag) {
    LinearExpr e;
    const int size = c.scope_size();
    LinearExpr count;
    for (int u = 0; u < schema.user_count(); ++u)
      count.add(any_indicator("z_u" + std::to_string(u + 1) + "_" + tag, u, c.scope), 1);
    auto f = [&](int m) { return c.table[static_cast<std::size_t>(m - 1)]; };
    if (c.kind == ConstraintKind::AtMost) {
      // f(m) = f(1) + sum_{i>=2} (f(i) - f(i-1)) [m >= i]
      e.add(one, f(1));
      for (int i = 2; i <= size; ++i) {
        const Weight diff = f(i) - f(i - 1);
        if (diff == 0) continue;
        const std::string name = "p_" + tag + "_i" + std::to_string(i);
        const int q = model.add_variable(name, VarKind::Binary);
        LinearExpr lo = count;
        lo.add(q, -i);
        model.add_row(name + "_ge", std::move(lo), RowSense::GreaterEqual, 0);
        LinearExpr hi = count;
        hi.add(q, -(size - i + 1));
        model.add_row(name + "_le", std::move(hi), RowSense::LessEqual, i - 1);
        e.add(q, diff);
      }
    } else {
      // f(m) = f(|T|) + sum_{i<|T|} (f(i) - f(i+1)) [m <= i]
      e.add(one, f(size));
      for (int i = 1; i < size; ++i) {
        const Weight diff = f(i) - f(i + 1);
        if (diff == 0) continue;
        const std::string name = "p_" + tag + "_i" + std::to_string(i);
        const int p = model.add_variable(name, VarKind::Binary);
        LinearExpr hi = count;
        hi.add(p, size - i);
        model.add_row(name + "_le", std::move(hi), RowSense::LessEqual, size);
        LinearExpr lo = count;
        lo.add(p, i + 1);
        model.add_row(name + "_ge", std::move(lo), RowSense::GreaterEqual, i + 1);
        e.add(p, diff);
      }
    }
    return e;
  }

  LinearExpr constraint_expr() {
    LinearExpr e;
    for (std::size_t i = 0; i < schema.constraints.size(); ++i) {
      const auto& c = schema.constraints[i];
      const std::string tag = "c" + std::to_string(i + 1);
      if (c.kind == ConstraintKind::SeparationOfDuty || c.kind == ConstraintKind::BindingOfDuty) {
        const auto steps = c.scope.elements();
        const int p = same_user_indicator("p_" + tag, steps[0], steps[1]);
        if (c.kind == ConstraintKind::SeparationOfDuty) {
          e.add(p, c.table[0]);
        } else {
          e.add(one, c.table[1]);
          e.add(p, -c.table[1]);
        }
      } else {
        e.append(counting_expr(c, tag));
      }
    }
    return e;
  }
};

inline void write_expr(std::ostream& out, const MipModel& m, const LinearExpr& e) {
  if (e.terms.empty()) {
    out << " 0 const_one";
    return;
  }
  int on_line = 0;
  bool first = true;
  for (auto [var, coef] : e.terms) {
    if (on_line == 8) {
      out << "\n   ";
      on_line = 0;
    }
    if (first)
      out << ' ' << (coef < 0 ? "- " : "");
    else
      out << (coef < 0 ? " - " : " + ");
    first = false;
    const Weight mag = coef < 0 ? -coef : coef;
    if (mag != 1) out << mag << ' ';
    out << m.variables[static_cast<std::size_t>(var)].name;
    ++on_line;
  }
}

}  // namespace detail

/// Builds the model for one bounded-minimization query.
inline MipModel emit_model(const Schema& schema, const BoundedMinimizeQuery& query) {
  detail::ModelBuilder b(schema);
  auto& m = b.model;
  for (int s = 0; s < schema.step_count; ++s) {
    LinearExpr e;
    for (int u = 0; u < schema.user_count(); ++u) e.add(b.x(s, u), 1);
    m.add_row("assign_s" + std::to_string(s + 1), std::move(e), RowSense::Equal, 1);
  }
  const LinearExpr auth = b.auth_expr();
  const LinearExpr cons = b.constraint_expr();
  m.add_row("auth_lo", auth, RowSense::GreaterEqual, query.auth_lo);
  m.add_row("auth_hi", auth, RowSense::LessEqual, query.auth_hi);
  m.add_row("cons_lo", cons, RowSense::GreaterEqual, query.cons_lo);
  m.add_row("cons_hi", cons, RowSense::LessEqual, query.cons_hi);
  m.objective = query.alpha == 0 ? auth : cons;
  m.notes.push_back("objective: " + std::string(query.alpha == 0 ? "authorization weight" : "constraint weight"));
  m.notes.push_back(query.describe());
  m.notes.push_back("auxiliary indicators are linked from both sides and take their forced values for any feasible x");
  return m;
}

/// CPLEX LP text with fixed variable and row order.
inline std::string model_to_lp(const MipModel& m) {
  std::ostringstream out;
  for (const auto& note : m.notes) out << "\\ " << note << '\n';
  out << "Minimize\n obj:";
  detail::write_expr(out, m, m.objective);
  out << "\nSubject To\n";
  for (const auto& row : m.rows) {
    out << ' ' << row.name << ':';
    detail::write_expr(out, m, row.expr);
    out << (row.sense == RowSense::LessEqual ? " <= " : row.sense == RowSense::GreaterEqual ? " >= " : " = ") << row.rhs << '\n';
  }
  out << "Bounds\n";
  for (const auto& v : m.variables) {
    if (v.kind == VarKind::Fixed) out << ' ' << v.name << " = " << v.lower << '\n';
    if (v.kind == VarKind::Continuous) out << " 0 <= " << v.name << " <= 1\n";
  }
  out << "Binaries\n";
  for (const auto& v : m.variables)
    if (v.kind == VarKind::Binary) out << ' ' << v.name << '\n';
  out << "End\n";
  return out.str();
}

inline std::string emit_lp(const Schema& schema, const BoundedMinimizeQuery& query) {
  return model_to_lp(emit_model(schema, query));
}

/// Reads "name value" lines (missing variables are 0), rounds the x
/// variables at 0.5, checks every row within 1e-6 and rebuilds the plan with
/// weights recomputed from the schema.
inline Plan import_solution(const Schema& schema, const MipModel& model, std::string_view text) {
  constexpr double tol = 1e-6;
  std::vector<double> value(model.variables.size(), 0.0);
  value[static_cast<std::size_t>(model.index.at("const_one"))] = 1.0;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name) || name[0] == '#' || name[0] == '\\') continue;
    double v = 0;
    if (!(ls >> v)) throw Error("bad-solution-file", "line " + std::to_string(line_no) + ": expected 'name value'");
    auto it = model.index.find(name);
    if (it == model.index.end())
      throw Error("bad-solution-file", "line " + std::to_string(line_no) + ": unknown variable '" + name + "'");
    value[static_cast<std::size_t>(it->second)] = v;
  }

  std::vector<int> plan(static_cast<std::size_t>(schema.step_count), kUnassigned);
  for (int s = 0; s < schema.step_count; ++s) {
    for (int u = 0; u < schema.user_count(); ++u) {
      double& v = value[static_cast<std::size_t>(model.x(s, u))];
      if (std::abs(v) > tol && std::abs(v - 1) > tol)
        throw Error("non-integral-solution", x_name(s, u) + " = " + std::to_string(v));
      v = v >= 0.5 ? 1.0 : 0.0;
      if (v == 1.0) {
        if (plan[static_cast<std::size_t>(s)] != kUnassigned)
          throw Error("infeasible-solution-file", "step s" + std::to_string(s + 1) + " assigned twice");
        plan[static_cast<std::size_t>(s)] = u;
      }
    }
    if (plan[static_cast<std::size_t>(s)] == kUnassigned)
      throw Error("infeasible-solution-file", "step s" + std::to_string(s + 1) + " has no assigned user");
  }

  for (const auto& row : model.rows) {
    double lhs = 0;
    for (auto [var, coef] : row.expr.terms) lhs += static_cast<double>(coef) * value[static_cast<std::size_t>(var)];
    const double rhs = static_cast<double>(row.rhs);
    const double slack = std::max(1.0, std::abs(rhs)) * tol;
    const bool ok = row.sense == RowSense::LessEqual      ? lhs <= rhs + slack
                    : row.sense == RowSense::GreaterEqual ? lhs >= rhs - slack
                                                          : std::abs(lhs - rhs) <= slack;
    if (!ok) throw Error("inconsistent-solution", "row " + row.name + " violated");
  }
  return make_plan(schema, std::move(plan));
}

/// Runs an external solver: receives LP text, returns solution text or
/// nothing when the model is infeasible.
using SolverCallback = std::function<std::optional<std::string>(const std::string& lp)>;

class ExternalBackend final : public BoundedMinimizer {
 public:
  explicit ExternalBackend(SolverCallback solver) : solver_(std::move(solver)) {}

  std::optional<BoundedResult> solve(const Schema& schema, const BoundedMinimizeQuery& q) override {
    if (q.empty()) return std::nullopt;
    const MipModel model = emit_model(schema, q);
    const auto solution = solver_(model_to_lp(model));
    if (!solution) return std::nullopt;
    Plan plan = import_solution(schema, model, *solution);
    return BoundedResult{std::move(plan.assignment), {plan.constraint_weight, plan.auth_weight}};
  }

  [[nodiscard]] std::string name() const override { return "external"; }

 private:
  SolverCallback solver_;
};

/// Solver callback running a shell command template in which {lp} and {sol}
/// are replaced by file paths. A non-zero exit status or an empty solution
/// file means infeasible.
inline SolverCallback command_solver(std::string command_template) {
  return [tmpl = std::move(command_template)](const std::string& lp) -> std::optional<std::string> {
    namespace fs = std::filesystem;
    static std::atomic<int> counter{0};
    const fs::path dir = fs::temp_directory_path();
    const std::string stem = "bowsp_" + std::to_string(::getpid()) + "_" + std::to_string(counter++);
    const fs::path lp_path = dir / (stem + ".lp");
    const fs::path sol_path = dir / (stem + ".sol");
    write_text_file(lp_path.string(), lp);
    std::string cmd = tmpl;
    auto replace = [&](const std::string& key, const std::string& with) {
      for (auto pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos + with.size()))
        cmd.replace(pos, key.size(), with);
    };
    replace("{lp}", lp_path.string());
    replace("{sol}", sol_path.string());
    const int status = std::system(cmd.c_str());
    std::optional<std::string> out;
    if (status == 0 && fs::exists(sol_path)) {
      std::string text = read_text_file(sol_path.string());
      if (text.find_first_not_of(" \t\r\n") != std::string::npos) out = std::move(text);
    }
    std::error_code ec;
    fs::remove(lp_path, ec);
    fs::remove(sol_path, ec);
    return out;
  };
}

}  // namespace bowsp
