#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "schema.hpp"

namespace bowsp {

using Json = nlohmann::ordered_json;

namespace detail {

/// Cursor into a JSON document that remembers its JSON-pointer path for
/// diagnostics.
class Node {
 public:
  Node(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& code, const std::string& msg) const {
    throw Error(code, (path_.empty() ? "/" : path_) + ": " + msg);
  }

  [[nodiscard]] const Json& json() const { return j_; }
  [[nodiscard]] const std::string& path() const { return path_; }

  [[nodiscard]] bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  [[nodiscard]] Node at(const char* key) const {
    if (!j_.is_object()) fail("bad-instance", "expected an object");
    if (!j_.contains(key)) fail("bad-instance", std::string("missing field '") + key + "'");
    return {j_.at(key), path_ + "/" + key};
  }

  [[nodiscard]] Node at(std::size_t i) const { return {j_.at(i), path_ + "/" + std::to_string(i)}; }

  [[nodiscard]] std::size_t size() const {
    if (!j_.is_array()) fail("bad-instance", "expected an array");
    return j_.size();
  }

  [[nodiscard]] std::int64_t integer() const {
    if (!j_.is_number_integer()) fail("bad-instance", "expected an integer");
    return j_.get<std::int64_t>();
  }

  [[nodiscard]] Weight weight() const {
    const auto w = integer();
    if (w < 0) fail("negative-weight", "weight must be non-negative");
    return w;
  }

  [[nodiscard]] std::string string() const {
    if (!j_.is_string()) fail("bad-instance", "expected a string");
    return j_.get<std::string>();
  }

  /// 1-based index in [1, limit] converted to 0-based.
  [[nodiscard]] int index(int limit, const char* what, const char* code) const {
    const auto v = integer();
    if (v < 1 || v > limit) fail(code, std::string(what) + " index out of range");
    return static_cast<int>(v - 1);
  }

  [[nodiscard]] StepSet steps(int k) const {
    StepSet s;
    for (std::size_t i = 0; i < size(); ++i) {
      const int step = at(i).index(k, "step", "dangling-step");
      if (s.contains(step)) at(i).fail("bad-instance", "duplicate step");
      s.insert(step);
    }
    return s;
  }

  [[nodiscard]] std::vector<Weight> weights() const {
    std::vector<Weight> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).weight());
    return out;
  }

 private:
  const Json& j_;
  std::string path_;
};

inline Json steps_json(StepSet s) {
  Json a = Json::array();
  s.for_each([&](int i) { a.push_back(i + 1); });
  return a;
}

inline const char* kind_name(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::SeparationOfDuty: return "sod";
    case ConstraintKind::BindingOfDuty: return "bod";
    case ConstraintKind::AtMost: return "atmost";
    case ConstraintKind::AtLeast: return "atleast";
    case ConstraintKind::ExplicitPowerTable: return "power";
  }
  return "power";
}

inline WeightedConstraint read_constraint(const Node& node, int k) {
  const std::string kind = node.at("kind").string();
  const StepSet scope = node.at("scope").steps(k);
  std::vector<Weight> table = node.at("table").weights();
  const int r = node.has("r") ? static_cast<int>(node.at("r").integer()) : 0;
  try {
    if (kind == "sod") {
      return WeightedConstraint::make(ConstraintKind::SeparationOfDuty, scope, 0, std::move(table));
    } else if (kind == "bod") {
      return WeightedConstraint::make(ConstraintKind::BindingOfDuty, scope, 0, std::move(table));
    } else if (kind == "atmost") {
      return WeightedConstraint::at_most(scope, r, std::move(table));
    } else if (kind == "atleast") {
      return WeightedConstraint::at_least(scope, r, std::move(table));
    } else if (kind == "power") {
      return WeightedConstraint::power_table(scope, std::move(table));
    }
  } catch (const Error& e) {
    node.fail(e.code(), e.detail());
  }
  node.at("kind").fail("unknown-constraint-kind", "unknown constraint kind '" + kind + "'");
}

inline UserSpec read_user(const Node& node, int k, int index) {
  UserSpec u;
  u.name = node.has("name") ? node.at("name").string() : "u" + std::to_string(index + 1);
  const std::string kind = node.has("kind") ? node.at("kind").string() : "plain";
  if (kind == "plain") {
    u.profile = PlainProfile{};
  } else if (kind == "staff") {
    StaffProfile s{node.at("authorized").steps(k), node.at("fallback").steps(k), node.at("sigma").weight()};
    if (s.authorized.intersects(s.fallback)) node.fail("bad-instance", "authorized and fallback steps overlap");
    u.profile = s;
  } else if (kind == "consultant") {
    u.profile = ConsultantProfile{node.at("fallback").steps(k), node.at("sigma").weight()};
  } else {
    node.at("kind").fail("unknown-user-kind", "unknown user kind '" + kind + "'");
  }
  return u;
}

/// Reads a k x n matrix given as k rows of n entries.
template <typename T, typename Read>
std::vector<T> read_matrix(const Node& node, int k, int n, Read read) {
  if (static_cast<int>(node.size()) != k) node.fail("bad-instance", "expected one row per step");
  std::vector<T> out;
  out.reserve(static_cast<std::size_t>(k) * static_cast<std::size_t>(n));
  for (int s = 0; s < k; ++s) {
    const Node row = node.at(static_cast<std::size_t>(s));
    if (static_cast<int>(row.size()) != n) row.fail("bad-instance", "expected one entry per user");
    for (int u = 0; u < n; ++u) out.push_back(read(row.at(static_cast<std::size_t>(u))));
  }
  return out;
}

template <typename T>
Json matrix_json(const std::vector<T>& m, int k, int n) {
  Json rows = Json::array();
  for (int s = 0; s < k; ++s) {
    Json row = Json::array();
    for (int u = 0; u < n; ++u) row.push_back(m[static_cast<std::size_t>(s * n + u)]);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::uint8_t read_flag(const Node& v) {
  const auto x = v.integer();
  if (x != 0 && x != 1) v.fail("bad-instance", "expected 0 or 1");
  return static_cast<std::uint8_t>(x);
}

inline AvailabilityModel read_availability(const Node& node, int k, int n) {
  AvailabilityModel m;
  m.step_count = k;
  m.user_count = n;
  m.prohibitive = node.has("prohibitive") ? node.at("prohibitive").weight() : kDefaultProhibitive;
  m.authorized = read_matrix<std::uint8_t>(node.at("authorized"), k, n, read_flag);
  m.available = read_matrix<std::uint8_t>(node.at("available"), k, n, read_flag);
  m.rho = read_matrix<Weight>(node.at("rho"), k, n, [](const Node& v) { return v.weight(); });
  return m;
}

inline Json availability_json(const AvailabilityModel& m) {
  Json j;
  j["prohibitive"] = m.prohibitive;
  j["authorized"] = matrix_json(m.authorized, m.step_count, m.user_count);
  j["available"] = matrix_json(m.available, m.step_count, m.user_count);
  j["rho"] = matrix_json(m.rho, m.step_count, m.user_count);
  return j;
}

inline SetAuthorizationFn read_auth(const Node& node, int k, int n) {
  const std::string kind = node.at("kind").string();
  if (kind == "explicit") {
    ExplicitTableAuth a;
    a.default_weight = node.at("default").weight();
    const Node entries = node.at("entries");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const Node e = entries.at(i);
      const int user = e.at("user").index(n, "user", "dangling-user");
      const StepSet steps = e.at("steps").steps(k);
      const Weight w = e.at("weight").weight();
      if (steps.empty() && w != 0) e.fail("empty-set-weight", "omega(empty, u) must be 0");
      if (a.entries.count({user, steps.bits()}) != 0) e.fail("bad-instance", "duplicate auth entry");
      a.set(user, steps, w);
    }
    return a;
  }
  if (kind == "profiles") return ProfileAuth{node.at("prohibitive").weight()};
  if (kind == "per_step") {
    return PerStepLinearAuth{read_matrix<Weight>(node.at("weights"), k, n, [](const Node& v) { return v.weight(); })};
  }
  if (kind == "availability") return AvailabilityAuth{read_availability(node, k, n)};
  node.at("kind").fail("unknown-auth-kind", "unknown authorization kind '" + kind + "'");
}

inline Json auth_json(const Schema& schema) {
  const int k = schema.step_count;
  const int n = schema.user_count();
  Json j;
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, ExplicitTableAuth>) {
          j["kind"] = "explicit";
          j["default"] = a.default_weight;
          Json entries = Json::array();
          for (const auto& [key, w] : a.entries) {
            Json e;
            e["user"] = key.first + 1;
            e["steps"] = steps_json(StepSet(key.second));
            e["weight"] = w;
            entries.push_back(std::move(e));
          }
          j["entries"] = std::move(entries);
        } else if constexpr (std::is_same_v<T, ProfileAuth>) {
          j["kind"] = "profiles";
          j["prohibitive"] = a.prohibitive;
        } else if constexpr (std::is_same_v<T, PerStepLinearAuth>) {
          j["kind"] = "per_step";
          j["weights"] = matrix_json(a.weights, k, n);
        } else {
          j["kind"] = "availability";
          const Json body = availability_json(a.model);
          for (const auto& [key, value] : body.items()) j[key] = value;
        }
      },
      schema.auth);
  return j;
}

}  // namespace detail

inline Json instance_to_json(const Schema& schema) {
  Json j;
  j["k"] = schema.step_count;
  Json order = Json::array();
  for (auto [a, b] : order_reduction(schema.predecessors)) order.push_back({a + 1, b + 1});
  j["order"] = std::move(order);
  Json users = Json::array();
  for (const auto& u : schema.users) {
    Json ju;
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, PlainProfile>) {
            ju["kind"] = "plain";
            ju["name"] = u.name;
          } else if constexpr (std::is_same_v<T, StaffProfile>) {
            ju["kind"] = "staff";
            ju["name"] = u.name;
            ju["authorized"] = detail::steps_json(p.authorized);
            ju["fallback"] = detail::steps_json(p.fallback);
            ju["sigma"] = p.sigma;
          } else {
            ju["kind"] = "consultant";
            ju["name"] = u.name;
            ju["fallback"] = detail::steps_json(p.fallback);
            ju["sigma"] = p.sigma;
          }
        },
        u.profile);
    users.push_back(std::move(ju));
  }
  j["users"] = std::move(users);
  Json constraints = Json::array();
  for (const auto& c : schema.constraints) {
    Json jc;
    jc["kind"] = detail::kind_name(c.kind);
    jc["scope"] = detail::steps_json(c.scope);
    if (c.kind == ConstraintKind::AtMost || c.kind == ConstraintKind::AtLeast) jc["r"] = c.r;
    jc["table"] = c.table;
    constraints.push_back(std::move(jc));
  }
  j["constraints"] = std::move(constraints);
  j["auth"] = detail::auth_json(schema);
  j["weight_scale"] = schema.weight_scale;
  j["bounds"] = {{"BA", schema.bounds.auth}, {"BC", schema.bounds.cons}};
  return j;
}

inline Schema instance_from_json(const Json& doc) {
  const detail::Node root(doc, "");
  if (!doc.is_object()) root.fail("bad-instance", "expected an object");
  Schema s;
  const auto k = root.at("k").integer();
  if (k < 1 || k > kMaxSteps) root.at("k").fail("bad-instance", "k must be in [1, 64]");
  s.step_count = static_cast<int>(k);

  const detail::Node order = root.at("order");
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const detail::Node p = order.at(i);
    if (p.size() != 2) p.fail("bad-instance", "order entries are [before, after] pairs");
    pairs.emplace_back(p.at(std::size_t{0}).index(s.step_count, "step", "dangling-step"),
                       p.at(std::size_t{1}).index(s.step_count, "step", "dangling-step"));
  }
  try {
    s.predecessors = close_order(s.step_count, pairs);
  } catch (const Error& e) {
    order.fail(e.code(), e.detail());
  }

  const detail::Node users = root.at("users");
  for (std::size_t i = 0; i < users.size(); ++i)
    s.users.push_back(detail::read_user(users.at(i), s.step_count, static_cast<int>(i)));
  if (s.users.empty()) users.fail("bad-instance", "at least one user required");

  const detail::Node constraints = root.at("constraints");
  for (std::size_t i = 0; i < constraints.size(); ++i)
    s.constraints.push_back(detail::read_constraint(constraints.at(i), s.step_count));

  s.auth = detail::read_auth(root.at("auth"), s.step_count, s.user_count());
  s.weight_scale = root.has("weight_scale") ? root.at("weight_scale").integer() : 1;
  if (root.has("bounds")) {
    const detail::Node b = root.at("bounds");
    s.bounds.auth = b.at("BA").weight();
    s.bounds.cons = b.at("BC").weight();
  }
  try {
    validate_schema(s);
  } catch (const Error& e) {
    root.fail(e.code(), e.detail());
  }
  return s;
}

/// Canonical text form: ordered keys, two-space indent, trailing newline.
inline std::string save_instance(const Schema& schema) { return instance_to_json(schema).dump(2) + "\n"; }

inline Json parse_json_text(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("parse-error", "byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

inline Schema load_instance(std::string_view text) { return instance_from_json(parse_json_text(text)); }

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("unreadable-file", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("unwritable-file", path);
  out << text;
}

inline Schema load_instance_file(const std::string& path) { return load_instance(read_text_file(path)); }

/// Availability sidecar: {"weight_scale", "prohibitive", "authorized",
/// "available", "rho"}, matrices step-major as in instance files.
inline std::pair<AvailabilityModel, Weight> load_availability(std::string_view text, int k, int n) {
  const Json doc = parse_json_text(text);
  const detail::Node root(doc, "");
  const Weight scale = root.has("weight_scale") ? root.at("weight_scale").integer() : 1;
  if (scale < 1) root.at("weight_scale").fail("bad-instance", "weight_scale must be positive");
  return {detail::read_availability(root, k, n), scale};
}

inline std::string save_availability(const AvailabilityModel& m, Weight scale) {
  Json j;
  j["weight_scale"] = scale;
  const Json body = detail::availability_json(m);
  for (const auto& [key, value] : body.items()) j[key] = value;
  return j.dump(2) + "\n";
}

}  // namespace bowsp
