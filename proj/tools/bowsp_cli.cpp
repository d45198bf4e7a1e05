// Command-line front end for the bowsp solvers.

#include <algorithm>
#include <bowsp/bowsp.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

namespace {

using namespace bowsp;
using Clock = std::chrono::steady_clock;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitEmpty = 2;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t oracle_budget() {
  const char* env = std::getenv("BOWSP_ORACLE_BUDGET");
  if (env == nullptr || *env == '\0') return kDefaultOracleBudget;
  char* end = nullptr;
  const auto v = std::strtoull(env, &end, 10);
  if (*end != '\0' || v == 0) throw Error("bad-argument", "BOWSP_ORACLE_BUDGET must be a positive integer");
  return v;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_text_file(path, text);
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// "2" is an absolute Poisson mean, "10%" a fraction of k.
double parse_density(const std::string& text, int k) {
  if (text.empty()) throw Error("bad-argument", "empty --d");
  std::size_t used = 0;
  const bool percent = text.back() == '%';
  const std::string number = percent ? text.substr(0, text.size() - 1) : text;
  double v = 0;
  try {
    v = std::stod(number, &used);
  } catch (const std::exception&) {
    throw Error("bad-argument", "--d expects a number or a percentage");
  }
  if (used != number.size()) throw Error("bad-argument", "--d expects a number or a percentage");
  return percent ? v / 100.0 * k : v;
}

/// "8..14", "8-14" or a single "8".
std::pair<int, int> parse_range(const std::string& text) {
  auto split = [&](const std::string& sep) -> std::optional<std::pair<int, int>> {
    const auto pos = text.find(sep);
    if (pos == std::string::npos) return std::nullopt;
    return std::pair{std::stoi(text.substr(0, pos)), std::stoi(text.substr(pos + sep.size()))};
  };
  std::pair<int, int> r;
  try {
    if (auto a = split(".."))
      r = *a;
    else if (auto b = split("-"))
      r = *b;
    else
      r = {std::stoi(text), std::stoi(text)};
  } catch (const std::exception&) {
    throw Error("bad-argument", "bad range '" + text + "'");
  }
  if (r.first > r.second) throw Error("bad-argument", "empty range '" + text + "'");
  return r;
}

BranchOrder parse_order(const std::string& s) {
  if (s == "heuristic") return BranchOrder::Heuristic;
  if (s == "index") return BranchOrder::Index;
  return BranchOrder::Random;
}

Json front_json(const ParetoFront& front) {
  Json pts = Json::array();
  for (const auto& p : front.points()) {
    Json plan = Json::array();
    for (int u : p.plan) plan.push_back(u + 1);
    pts.push_back({{"omega_C", p.weights.cons}, {"omega_A", p.weights.auth}, {"plan", plan}});
  }
  return pts;
}

Json stats_json(const SearchStats& s) {
  return {{"nodes", s.nodes},
          {"leaves", s.leaves},
          {"pruned_dominated", s.pruned_dominated},
          {"pruned_auth_bound", s.pruned_auth_bound},
          {"pruned_cons_bound", s.pruned_cons_bound},
          {"matchings", s.matchings},
          {"timed_out", s.timed_out}};
}

struct SolveArgs {
  std::string instance;
  std::string solver = "pbb";
  std::string backend = "pattern";
  std::string solver_cmd;
  std::optional<Weight> ba;
  std::optional<Weight> bc;
  std::string out = "-";
  std::string report;
  std::string order = "heuristic";
  std::uint64_t seed = 0;
  int threads = 1;
  bool no_prune = false;
  double timeout = 0;
};

struct SolveOutcome {
  ParetoFront front;
  SearchStats stats;
  int queries = 0;
  std::string solver_name;
};

SolveOutcome run_solver(const Schema& schema, const SolveArgs& a, std::optional<Clock::time_point> deadline) {
  SearchOptions opt;
  opt.order = parse_order(a.order);
  opt.seed = a.seed;
  opt.prune = !a.no_prune;
  opt.threads = a.threads;
  opt.deadline = deadline;
  SolveOutcome out{ParetoFront(schema.bounds), {}, 0, a.solver};
  if (a.solver == "pbb") {
    auto r = pbb_search(schema, opt);
    out.front = std::move(r.front);
    out.stats = r.stats;
  } else if (a.solver == "enum") {
    out.front = enumeration_front(schema);
  } else if (a.solver == "oracle") {
    out.front = oracle_front(schema, oracle_budget());
  } else {
    std::unique_ptr<BoundedMinimizer> backend;
    PatternBackend* pattern = nullptr;
    if (a.backend == "pattern") {
      auto p = std::make_unique<PatternBackend>(opt);
      pattern = p.get();
      backend = std::move(p);
    } else if (a.backend == "oracle") {
      detail::check_oracle_budget(schema, oracle_budget());
      backend = std::make_unique<OracleBackend>();
    } else {
      if (a.solver_cmd.empty()) throw Error("bad-argument", "--backend external needs --solver-cmd");
      backend = std::make_unique<ExternalBackend>(command_solver(a.solver_cmd));
    }
    auto r = eps_front_counted(schema, *backend);
    out.front = std::move(r.front);
    out.queries = r.queries;
    if (pattern != nullptr) out.stats = pattern->stats();
    out.solver_name = "eps/" + backend->name();
  }
  return out;
}

int cmd_solve(const SolveArgs& a) {
  const std::string text = read_text_file(a.instance);
  Schema schema = load_instance(text);
  if (a.ba) schema.bounds.auth = *a.ba;
  if (a.bc) schema.bounds.cons = *a.bc;
  validate_schema(schema);
  const auto start = Clock::now();
  std::optional<Clock::time_point> deadline;
  if (a.timeout > 0) deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(a.timeout));
  const SolveOutcome r = run_solver(schema, a, deadline);
  const double wall = elapsed_ms(start);
  emit(a.out, front_csv(r.front));
  if (!a.report.empty()) {
    Json report{{"instance", a.instance},
                {"digest", "fnv1a64:" + hex64(fnv1a(text))},
                {"solver", r.solver_name},
                {"bounds", {{"BA", schema.bounds.auth}, {"BC", schema.bounds.cons}}},
                {"front", front_json(r.front)},
                {"queries", r.queries},
                {"stats", stats_json(r.stats)},
                {"wall_ms", wall}};
    emit(a.report, report.dump(2) + "\n");
  }
  if (r.stats.timed_out) std::cerr << "warning: deadline reached, front may be incomplete\n";
  return r.front.empty() ? kExitEmpty : kExitOk;
}

struct GenerateArgs {
  int k = 10;
  std::string d = "1";
  double e = 0.3;
  std::uint64_t seed = 1;
  bool scaled = false;
  std::optional<int> staff;
  std::optional<int> consultants;
  std::optional<int> scope;
  std::optional<Weight> ba;
  std::optional<Weight> bc;
  std::string out = "-";
};

int cmd_generate(const GenerateArgs& a) {
  const double d = parse_density(a.d, a.k);
  GenParams p = a.scaled ? scaled_params(a.k, d, a.e, a.seed) : GenParams{};
  p.k = a.k;
  p.d = d;
  p.e = a.e;
  p.seed = a.seed;
  if (a.staff) p.staff = *a.staff;
  if (a.consultants) p.consultants = *a.consultants;
  if (a.scope) p.scope_size = *a.scope;
  if (a.ba) p.bounds.auth = *a.ba;
  if (a.bc) p.bounds.cons = *a.bc;
  emit(a.out, save_instance(generate(p)));
  return kExitOk;
}

struct BenchArgs {
  std::string k_range = "8..10";
  int reps = 5;
  std::vector<std::string> solvers{"pbb"};
  std::string d = "10%";
  double e = 0.3;
  std::uint64_t seed = 1;
  double timeout = 60;
  int workers = 1;
  std::optional<Weight> ba;
  std::optional<Weight> bc;
  std::string out = "-";
};

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

int cmd_bench(const BenchArgs& a) {
  const auto [k_lo, k_hi] = parse_range(a.k_range);
  if (a.reps < 1) throw Error("bad-argument", "--reps must be positive");
  struct Job {
    int k;
    int rep;
    std::size_t solver;
  };
  struct Outcome {
    double ms = 0;
    bool censored = false;
    std::size_t front = 0;
    bool failed = false;
  };
  std::vector<Job> jobs;
  for (int k = k_lo; k <= k_hi; ++k)
    for (int rep = 0; rep < a.reps; ++rep)
      for (std::size_t s = 0; s < a.solvers.size(); ++s) jobs.push_back({k, rep, s});
  std::vector<Outcome> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;

  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      GenParams p;
      p.k = job.k;
      p.d = parse_density(a.d, job.k);
      p.e = a.e;
      p.seed = a.seed + static_cast<std::uint64_t>(job.rep);
      if (a.ba) p.bounds.auth = *a.ba;
      if (a.bc) p.bounds.cons = *a.bc;
      SolveArgs sa;
      sa.solver = a.solvers[job.solver];
      const auto start = Clock::now();
      const auto deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(a.timeout));
      try {
        const auto r = run_solver(generate(p), sa, deadline);
        results[i] = {elapsed_ms(start), r.stats.timed_out, r.front.size(), false};
      } catch (const Error& e) {
        std::lock_guard lock(err_mu);
        std::cerr << "k=" << job.k << " rep=" << job.rep << " " << sa.solver << ": " << e.what() << "\n";
        results[i].failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::max(1, a.workers); ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "k,d,e,solver,reps,completed,censored,failed,median_ms,median_front\n";
  for (int k = k_lo; k <= k_hi; ++k) {
    for (std::size_t s = 0; s < a.solvers.size(); ++s) {
      std::vector<double> times;
      std::vector<double> fronts;
      int censored = 0;
      int failed = 0;
      for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (jobs[i].k != k || jobs[i].solver != s) continue;
        if (results[i].failed) {
          ++failed;
        } else if (results[i].censored) {
          ++censored;
        } else {
          times.push_back(results[i].ms);
          fronts.push_back(static_cast<double>(results[i].front));
        }
      }
      csv << k << ',' << parse_density(a.d, k) << ',' << a.e << ',' << a.solvers[s] << ',' << a.reps << ','
          << times.size() << ',' << censored << ',' << failed << ',' << median(times) << ',' << median(fronts) << '\n';
    }
  }
  emit(a.out, csv.str());
  return kExitOk;
}

std::vector<Weight> parse_costs(const std::string& text, int n) {
  if (text.empty()) return std::vector<Weight>(static_cast<std::size_t>(n), 1);
  std::vector<Weight> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stoll(item));
    } catch (const std::exception&) {
      throw Error("bad-argument", "--mu expects comma-separated integers");
    }
  }
  return out;
}

Flavor parse_flavor(const std::string& s) {
  if (s == "static") return Flavor::Static;
  if (s == "decremental") return Flavor::Decremental;
  return Flavor::Dynamic;
}

Json family_json(const UsersetFamily& f) {
  Json sets = Json::array();
  for (UserMask m : f.sets) {
    Json users = Json::array();
    for (int u : mask_users(m)) users.push_back(u + 1);
    sets.push_back(users);
  }
  return sets;
}

struct QueryArgs {
  int alpha = 0;
  Weight a = 0;
  std::optional<Weight> b;
  Weight c = 0;
  std::optional<Weight> d;

  [[nodiscard]] BoundedMinimizeQuery query(const Schema& s) const {
    return {alpha, a, b.value_or(s.bounds.auth), c, d.value_or(s.bounds.cons)};
  }
};

void add_query_flags(CLI::App* cmd, QueryArgs& q) {
  cmd->add_option("--alpha", q.alpha, "0 minimises omega_A, 1 minimises omega_C")->check(CLI::Range(0, 1));
  cmd->add_option("--auth-lo", q.a, "lower limit on omega_A");
  cmd->add_option("--auth-hi", q.b, "upper limit on omega_A (default B_A)");
  cmd->add_option("--cons-lo", q.c, "lower limit on omega_C");
  cmd->add_option("--cons-hi", q.d, "upper limit on omega_C (default B_C)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bi-objective workflow satisfiability solvers"};
  app.require_subcommand(1);
  std::function<int()> action;

  SolveArgs solve;
  auto* cmd = app.add_subcommand("solve", "compute the Pareto front of an instance");
  cmd->add_option("instance", solve.instance, "instance JSON")->required();
  cmd->add_option("--solver", solve.solver)->check(CLI::IsMember({"pbb", "eps", "enum", "oracle"}));
  cmd->add_option("--backend", solve.backend, "minimiser for --solver eps")
      ->check(CLI::IsMember({"pattern", "oracle", "external"}));
  cmd->add_option("--solver-cmd", solve.solver_cmd, "external MIP command with {lp} and {sol} placeholders");
  cmd->add_option("--ba", solve.ba, "override B_A")->check(CLI::NonNegativeNumber);
  cmd->add_option("--bc", solve.bc, "override B_C")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", solve.out, "front CSV path ('-' for stdout)");
  cmd->add_option("--report", solve.report, "run report JSON path");
  cmd->add_option("--order", solve.order, "branching order")->check(CLI::IsMember({"heuristic", "index", "random"}));
  cmd->add_option("--seed", solve.seed, "seed for --order random");
  cmd->add_option("--threads", solve.threads)->check(CLI::Range(1, 256));
  cmd->add_flag("--no-prune", solve.no_prune, "disable bound pruning");
  cmd->add_option("--timeout", solve.timeout, "seconds; 0 = none")->check(CLI::NonNegativeNumber);
  cmd->callback([&] { action = [&] { return cmd_solve(solve); }; });

  GenerateArgs gen;
  cmd = app.add_subcommand("generate", "write a random instance");
  cmd->add_option("--k", gen.k)->required();
  cmd->add_option("--d", gen.d, "mean authorisations per user, absolute or e.g. 10%");
  cmd->add_option("--e", gen.e, "separation-of-duty density")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", gen.seed);
  cmd->add_flag("--scaled", gen.scaled, "small user population (2k staff, 2 consultants)");
  cmd->add_option("--staff", gen.staff);
  cmd->add_option("--consultants", gen.consultants);
  cmd->add_option("--scope", gen.scope, "counting constraint scope size");
  cmd->add_option("--ba", gen.ba);
  cmd->add_option("--bc", gen.bc);
  cmd->add_option("--out", gen.out);
  cmd->callback([&] { action = [&] { return cmd_generate(gen); }; });

  int wc_k = 3;
  std::string wc_out = "-";
  cmd = app.add_subcommand("worstcase", "write the instance whose front has one point per partition");
  cmd->add_option("--k", wc_k)->required()->check(CLI::Range(1, 10));
  cmd->add_option("--out", wc_out);
  cmd->callback([&] { action = [&] { emit(wc_out, save_instance(worst_case_family(wc_k))); return kExitOk; }; });

  std::string fx_variant = "purchase-order";
  std::string fx_out = "-";
  std::string fx_sidecar;
  cmd = app.add_subcommand("fixture", "write the purchase-order instance");
  cmd->add_option("--variant", fx_variant)
      ->check(CLI::IsMember({"purchase-order", "unsatisfiable", "availability"}));
  cmd->add_option("--out", fx_out);
  cmd->add_option("--availability", fx_sidecar, "also write the availability sidecar");
  cmd->callback([&] {
    action = [&] {
      const Schema s = fx_variant == "purchase-order"  ? purchase_order_fixture()
                       : fx_variant == "unsatisfiable" ? purchase_order_unsatisfiable()
                                                       : purchase_order_availability_schema();
      emit(fx_out, save_instance(s));
      if (!fx_sidecar.empty())
        write_text_file(fx_sidecar, save_availability(purchase_order_availability(), purchase_order_availability_schema().weight_scale));
      return kExitOk;
    };
  });

  BenchArgs bench;
  cmd = app.add_subcommand("bench", "median solve times over generated instances");
  cmd->add_option("--k-range", bench.k_range, "e.g. 8..14");
  cmd->add_option("--reps", bench.reps);
  cmd->add_option("--solver", bench.solvers)->check(CLI::IsMember({"pbb", "eps", "enum", "oracle"}))->delimiter(',');
  cmd->add_option("--d", bench.d);
  cmd->add_option("--e", bench.e)->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", bench.seed, "first seed; repetition i uses seed + i");
  cmd->add_option("--timeout", bench.timeout, "seconds per run")->check(CLI::PositiveNumber);
  cmd->add_option("--workers", bench.workers)->check(CLI::Range(1, 256));
  cmd->add_option("--ba", bench.ba);
  cmd->add_option("--bc", bench.bc);
  cmd->add_option("--out", bench.out);
  cmd->callback([&] { action = [&] { return cmd_bench(bench); }; });

  std::string cmup_instance;
  cmd = app.add_subcommand("cmup", "fewest distinct users in a valid plan (binary search)");
  cmd->add_option("instance", cmup_instance)->required();
  cmd->callback([&] {
    action = [&] {
      const auto r = cmup_binary_search(load_instance_file(cmup_instance));
      std::cout << Json{{"users", r.users}, {"solver_calls", r.solver_calls}}.dump() << "\n";
      return kExitOk;
    };
  });

  std::string mc_instance;
  std::string mc_mu;
  cmd = app.add_subcommand("mincost", "valid plan of least total user cost");
  cmd->add_option("instance", mc_instance)->required();
  cmd->add_option("--mu", mc_mu, "comma-separated user costs (default all 1)");
  cmd->callback([&] {
    action = [&] {
      const Schema s = load_instance_file(mc_instance);
      const auto r = min_user_cost(s, parse_costs(mc_mu, s.user_count()));
      std::cout << Json{{"cost", r.cost}, {"plan", plan_text(r.plan.assignment)}}.dump() << "\n";
      return kExitOk;
    };
  });

  std::string rp_instance;
  std::string rp_sidecar;
  Weight rp_budget = 0;
  int rp_threads = 1;
  cmd = app.add_subcommand("resilient-plan", "plans trading constraint violations against expected absences");
  cmd->add_option("instance", rp_instance)->required();
  cmd->add_option("--availability", rp_sidecar, "availability sidecar JSON")->required();
  cmd->add_option("--budget", rp_budget, "largest allowed omega_C")->check(CLI::NonNegativeNumber);
  cmd->add_option("--threads", rp_threads)->check(CLI::Range(1, 256));
  cmd->callback([&] {
    action = [&] {
      Schema s = load_instance_file(rp_instance);
      auto [model, scale] = load_availability(read_text_file(rp_sidecar), s.step_count, s.user_count());
      s.weight_scale = scale;
      SearchOptions opt;
      opt.threads = rp_threads;
      const auto points = resilient_plan(s, model, rp_budget, opt);
      std::cout << "omega_C,omega_A,expected_missing,success_bound,plan\n";
      for (const auto& p : points)
        std::cout << p.weights.cons << ',' << p.weights.auth << ',' << p.expected_missing << ','
                  << (p.finite ? std::to_string(p.success_bound) : std::string("NA")) << ',' << plan_text(p.plan)
                  << '\n';
      return points.empty() ? kExitEmpty : kExitOk;
    };
  });

  std::string rs_instance;
  int rs_t = 0;
  std::string rs_flavor = "static";
  ResilienceOptions rs_opt;
  bool rs_no_marking = false;
  cmd = app.add_subcommand("resilient", "decide t-resiliency");
  cmd->add_option("instance", rs_instance)->required();
  cmd->add_option("--t", rs_t)->required()->check(CLI::NonNegativeNumber);
  cmd->add_option("--flavor", rs_flavor)->check(CLI::IsMember({"static", "decremental", "dynamic"}));
  cmd->add_option("--budget", rs_opt.budget, "largest number of families to check");
  cmd->add_option("--threads", rs_opt.threads)->check(CLI::Range(1, 256));
  cmd->add_flag("--no-marking", rs_no_marking, "skip the user-set reduction");
  cmd->callback([&] {
    action = [&] {
      rs_opt.use_marking = !rs_no_marking;
      const auto r = decide_resilient(load_instance_file(rs_instance), rs_t, parse_flavor(rs_flavor), rs_opt);
      Json out{{"resilient", r.resilient}, {"flavor", rs_flavor}, {"t", rs_t}, {"families_checked", r.families_checked}};
      if (r.counterexample) out["counterexample"] = family_json(*r.counterexample);
      std::cout << out.dump() << "\n";
      return kExitOk;
    };
  });

  std::string lp_instance;
  std::string lp_out = "-";
  QueryArgs lp_q;
  cmd = app.add_subcommand("lp", "write the bounded minimisation model in LP format");
  cmd->add_option("instance", lp_instance)->required();
  add_query_flags(cmd, lp_q);
  cmd->add_option("--out", lp_out);
  cmd->callback([&] {
    action = [&] {
      const Schema s = load_instance_file(lp_instance);
      emit(lp_out, emit_lp(s, lp_q.query(s)));
      return kExitOk;
    };
  });

  std::string im_instance;
  std::string im_solution;
  QueryArgs im_q;
  cmd = app.add_subcommand("import", "read a MIP solution for the model 'lp' writes with the same flags");
  cmd->add_option("instance", im_instance)->required();
  cmd->add_option("--solution", im_solution, "'name value' lines")->required();
  add_query_flags(cmd, im_q);
  cmd->callback([&] {
    action = [&] {
      const Schema s = load_instance_file(im_instance);
      const Plan p = import_solution(s, emit_model(s, im_q.query(s)), read_text_file(im_solution));
      std::cout << "omega_C,omega_A,plan\n"
                << p.constraint_weight << ',' << p.auth_weight << ',' << plan_text(p.assignment) << '\n';
      return kExitOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }
  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
