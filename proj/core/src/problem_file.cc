#include "reachsdp/problem_file.h"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>
#include <variant>

#include <json.hpp>

#include "reachsdp/poly_parser.h"

namespace reachsdp {

using nlohmann::json;

ProblemFileError::ProblemFileError(std::vector<std::string> errors)
    : std::invalid_argument([&] {
        std::string msg = "invalid problem file:";
        for (const auto& e : errors) msg += "\n  " + e;
        return msg;
      }()),
      errors_(std::move(errors)) {}

SolverOptions ProblemOptions::Solver() const {
  SolverOptions o;
  o.tolerance = tolerance;
  o.near_tolerance = near_tolerance;
  o.max_iterations = max_iterations;
  return o;
}

namespace {

// Collects errors while walking the document.
class Checker {
 public:
  void Error(const std::string& where, const std::string& what) {
    errors_.push_back(where + ": " + what);
  }
  bool ok() const { return errors_.empty(); }
  std::vector<std::string> Take() { return std::move(errors_); }

  const json* Field(const json& obj, const std::string& where, const char* key,
                    bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) Error(where, std::string("missing field \"") + key + "\"");
      return nullptr;
    }
    return &*it;
  }

  std::optional<Eigen::VectorXd> Vector(const json& v, const std::string& where, int n) {
    if (!v.is_array()) {
      Error(where, "expected an array of numbers");
      return std::nullopt;
    }
    if (n >= 0 && static_cast<int>(v.size()) != n) {
      Error(where, "expected " + std::to_string(n) + " entries, got " +
                       std::to_string(v.size()));
      return std::nullopt;
    }
    Eigen::VectorXd out(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        Error(where + "[" + std::to_string(i) + "]", "expected a number");
        return std::nullopt;
      }
      out[static_cast<int>(i)] = v[i].get<double>();
    }
    return out;
  }

  std::optional<DomainGeometry> Geometry(const json& g, const std::string& where, int n) {
    if (!g.is_object() || g.size() != 1) {
      Error(where, "expected exactly one of \"box\", \"ball\", \"ellipsoid\"");
      return std::nullopt;
    }
    const auto& [kind, body] = *g.items().begin();
    const std::string at = where + "." + kind;
    if (!body.is_object()) {
      Error(at, "expected an object");
      return std::nullopt;
    }
    try {
      if (kind == "box") {
        const json* lo = Field(body, at, "lower", true);
        const json* hi = Field(body, at, "upper", true);
        if (!lo || !hi) return std::nullopt;
        auto l = Vector(*lo, at + ".lower", n);
        auto u = Vector(*hi, at + ".upper", n);
        if (!l || !u) return std::nullopt;
        return DomainGeometry::MakeBox(*l, *u);
      }
      if (kind == "ball" || kind == "ellipsoid") {
        const json* c = Field(body, at, "center", true);
        const char* key = kind == "ball" ? "radius" : "shape";
        const json* second = Field(body, at, key, true);
        if (!c || !second) return std::nullopt;
        auto center = Vector(*c, at + ".center", n);
        if (!center) return std::nullopt;
        if (kind == "ball") {
          if (!second->is_number()) {
            Error(at + ".radius", "expected a number");
            return std::nullopt;
          }
          return DomainGeometry::MakeBall(*center, second->get<double>());
        }
        if (!second->is_array() || static_cast<int>(second->size()) != n) {
          Error(at + ".shape", "expected " + std::to_string(n) + " rows");
          return std::nullopt;
        }
        Eigen::MatrixXd shape(n, n);
        for (int i = 0; i < n; ++i) {
          auto row = Vector((*second)[i], at + ".shape[" + std::to_string(i) + "]", n);
          if (!row) return std::nullopt;
          shape.row(i) = row->transpose();
        }
        return DomainGeometry::MakeEllipsoid(*center, shape);
      }
    } catch (const std::invalid_argument& e) {
      Error(at, e.what());
      return std::nullopt;
    }
    Error(where, "unknown geometry \"" + kind + "\"");
    return std::nullopt;
  }

  std::vector<Polynomial> Polynomials(const json& list, const std::string& where,
                                      const std::vector<std::string>& vars) {
    std::vector<Polynomial> out;
    if (!list.is_array()) {
      Error(where, "expected an array of expression strings");
      return out;
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string at = where + "[" + std::to_string(i) + "]";
      if (!list[i].is_string()) {
        Error(at, "expected a string");
        continue;
      }
      try {
        out.push_back(ParsePolynomial(list[i].get<std::string>(), vars));
      } catch (const std::invalid_argument& e) {
        Error(at, e.what());
      }
    }
    return out;
  }

 private:
  std::vector<std::string> errors_;
};

struct SetSpec {
  std::vector<Polynomial> inequalities;
  std::optional<DomainGeometry> geometry;
};

SetSpec ParseSet(Checker& ck, const json& doc, const char* key,
                 const std::vector<std::string>& vars) {
  SetSpec out;
  const json* set = ck.Field(doc, "problem", key, true);
  if (!set) return out;
  if (!set->is_object()) {
    ck.Error(key, "expected an object");
    return out;
  }
  const int n = static_cast<int>(vars.size());
  if (const json* ineq = ck.Field(*set, key, "inequalities", true)) {
    out.inequalities = ck.Polynomials(*ineq, std::string(key) + ".inequalities", vars);
    if (ineq->is_array() && ineq->empty()) {
      ck.Error(std::string(key) + ".inequalities", "at least one inequality required");
    }
  }
  if (const json* g = ck.Field(*set, key, "geometry", true); g && n > 0) {
    out.geometry = ck.Geometry(*g, std::string(key) + ".geometry", n);
  }
  return out;
}

void ParseOptions(Checker& ck, const json& doc, ProblemOptions& opts) {
  const json* o = ck.Field(doc, "problem", "options", false);
  if (!o) return;
  if (!o->is_object()) {
    ck.Error("options", "expected an object");
    return;
  }
  static const std::set<std::string> kKnown = {"order", "T", "u_zero", "tolerance",
                                               "near_tolerance", "max_iterations", "seed"};
  for (const auto& [key, _] : o->items()) {
    if (!kKnown.count(key)) ck.Error("options", "unknown field \"" + key + "\"");
  }
  auto positive_int = [&](const char* key) -> std::optional<int> {
    const json* v = ck.Field(*o, "options", key, false);
    if (!v) return std::nullopt;
    if (!v->is_number_integer() || v->get<long long>() < 1) {
      ck.Error(std::string("options.") + key, "expected a positive integer");
      return std::nullopt;
    }
    return v->get<int>();
  };
  auto positive_double = [&](const char* key, double& dst) {
    const json* v = ck.Field(*o, "options", key, false);
    if (!v) return;
    if (!v->is_number() || !(v->get<double>() > 0.0)) {
      ck.Error(std::string("options.") + key, "expected a positive number");
      return;
    }
    dst = v->get<double>();
  };
  if (auto order = positive_int("order")) {
    if (*order % 2 != 0) {
      ck.Error("options.order", "the relaxation order 2r must be even");
    } else {
      opts.order = *order;
    }
  }
  const auto horizon = positive_int("T");
  if (horizon) opts.horizon = *horizon;
  if (const json* uz = ck.Field(*o, "options", "u_zero", false)) {
    if (!uz->is_boolean()) {
      ck.Error("options.u_zero", "expected true or false");
    } else {
      opts.u_zero = uz->get<bool>();
      if (opts.u_zero && horizon) ck.Error("options", "\"T\" and \"u_zero\" are exclusive");
    }
  }
  positive_double("tolerance", opts.tolerance);
  positive_double("near_tolerance", opts.near_tolerance);
  if (auto it = positive_int("max_iterations")) opts.max_iterations = *it;
  if (const json* seed = ck.Field(*o, "options", "seed", false)) {
    if (seed->is_number_unsigned()) {
      opts.seed = seed->get<std::uint64_t>();
    } else if (seed->is_string()) {
      try {
        std::size_t used = 0;
        const std::string s = seed->get<std::string>();
        opts.seed = std::stoull(s, &used, 0);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        ck.Error("options.seed", "expected an unsigned integer or a numeric string");
      }
    } else {
      ck.Error("options.seed", "expected an unsigned integer or a numeric string");
    }
  }
}

}  // namespace

LoadedProblem ParseProblem(std::string_view json_text, const std::string& fallback_name) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ProblemFileError({std::string("malformed JSON: ") + e.what()});
  }
  if (!doc.is_object()) throw ProblemFileError({"problem: expected a JSON object"});

  Checker ck;
  LoadedProblem out;
  static const std::set<std::string> kKnown = {"name", "variables", "dynamics", "init_set",
                                               "state_set", "options", "assume_closure_volume"};
  for (const auto& [key, _] : doc.items()) {
    if (!kKnown.count(key)) ck.Error("problem", "unknown field \"" + key + "\"");
  }
  std::string name = fallback_name;
  if (const json* nm = ck.Field(doc, "problem", "name", false)) {
    if (nm->is_string()) {
      name = nm->get<std::string>();
    } else {
      ck.Error("name", "expected a string");
    }
  }

  std::vector<std::string> vars;
  if (const json* v = ck.Field(doc, "problem", "variables", true)) {
    if (!v->is_array() || v->empty()) {
      ck.Error("variables", "expected a nonempty array of names");
    } else {
      std::set<std::string> seen;
      for (std::size_t i = 0; i < v->size(); ++i) {
        const std::string at = "variables[" + std::to_string(i) + "]";
        if (!(*v)[i].is_string()) {
          ck.Error(at, "expected a string");
          continue;
        }
        const auto s = (*v)[i].get<std::string>();
        if (!IsValidIdentifier(s)) {
          ck.Error(at, "\"" + s + "\" is not a valid identifier");
        } else if (!seen.insert(s).second) {
          ck.Error(at, "duplicate variable \"" + s + "\"");
        }
        vars.push_back(s);
      }
    }
  }
  const bool vars_ok = ck.ok();

  std::vector<Polynomial> dynamics;
  if (const json* d = ck.Field(doc, "problem", "dynamics", true); d && vars_ok) {
    dynamics = ck.Polynomials(*d, "dynamics", vars);
    if (d->is_array() && d->size() != vars.size()) {
      ck.Error("dynamics", std::to_string(d->size()) + " expressions for " +
                               std::to_string(vars.size()) + " variables");
    }
  }
  SetSpec init, state;
  if (vars_ok) {
    init = ParseSet(ck, doc, "init_set", vars);
    state = ParseSet(ck, doc, "state_set", vars);
  } else {
    ck.Field(doc, "problem", "init_set", true);
    ck.Field(doc, "problem", "state_set", true);
  }
  ParseOptions(ck, doc, out.options);
  bool closure = false;
  if (const json* c = ck.Field(doc, "problem", "assume_closure_volume", false)) {
    if (c->is_boolean()) {
      closure = c->get<bool>();
    } else {
      ck.Error("assume_closure_volume", "expected true or false");
    }
  }
  if (!ck.ok()) throw ProblemFileError(ck.Take());

  try {
    out.problem = MakeReachProblem(name, std::move(dynamics), std::move(init.inequalities),
                                   std::move(state.inequalities), *state.geometry,
                                   init.geometry, out.options.horizon, out.options.u_zero);
  } catch (const std::invalid_argument& e) {
    throw ProblemFileError({std::string("problem: ") + e.what()});
  }
  out.problem.variables = vars;
  out.problem.assume_closure_volume = closure;
  auto note = [&](bool augmented, const char* set, const SemialgebraicSet& s) {
    if (!augmented) return;
    out.notes.push_back(std::string(set) + ": added ball constraint " +
                        ToString(s.inequalities().back(), vars) + " >= 0");
  };
  note(out.problem.init_augmented, "init_set", out.problem.init);
  note(out.problem.state_augmented, "state_set", out.problem.state);
  return out;
}

LoadedProblem LoadProblem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ProblemFileError({"cannot open problem file " + path.string()});
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseProblem(ss.str(), path.stem().string());
}

std::string ProblemHash(const ReachProblem& p) {
  std::ostringstream os;
  const auto& names = p.variables;
  os << "vars";
  for (const auto& v : names) os << ' ' << v;
  os << "\nf";
  for (const auto& fi : p.system.components()) os << '\n' << ToString(fi, names);
  os << "\ninit";
  for (const auto& g : p.init.inequalities()) os << '\n' << ToString(g, names);
  os << "\nstate";
  for (const auto& g : p.state.inequalities()) os << '\n' << ToString(g, names);
  auto numbers = [&](const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) os << ' ' << FormatDouble(m.data()[i]);
  };
  os << "\ngeometry " << p.state_geometry.variant().index();
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Box>) {
          numbers(g.lower);
          numbers(g.upper);
        } else if constexpr (std::is_same_v<T, Ball>) {
          numbers(g.center);
          os << ' ' << FormatDouble(g.radius);
        } else {
          numbers(g.center);
          numbers(g.shape);
        }
      },
      p.state_geometry.variant());
  os << "\nhorizon " << (p.u_zero ? 0 : p.horizon);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace reachsdp
