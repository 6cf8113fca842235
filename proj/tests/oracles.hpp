#pragma once

// Independent oracles shared by the unit suites and the acceptance binary.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "specforge/depgraph.hpp"
#include "specforge/errors.hpp"
#include "specforge/interpreter.hpp"
#include "specforge/lean_emit.hpp"
#include "specforge/oracle.hpp"
#include "specforge/theoremgen.hpp"

namespace sftest {

using namespace specforge;

struct OraclePath {
  std::vector<std::string> premises;
  std::string variant;
  auto operator<=>(const OraclePath&) const = default;
};

inline std::string call_text(const ir::Stmt::CallApi& c) {
  std::string s = c.api + "(";
  for (std::size_t i = 0; i < c.args.size(); ++i) s += (i ? ", " : "") + ir::to_text(*c.args[i]);
  return s + ")";
}

inline std::string arm_text(const ir::Stmt::Arm& arm) {
  if (arm.bindings.empty()) return arm.variantName;
  std::string s = arm.variantName + "(";
  for (std::size_t i = 0; i < arm.bindings.size(); ++i) s += (i ? ", " : "") + arm.bindings[i];
  return s + ")";
}

/// Brute-force branch product: every assignment of a side to each distinct
/// condition text and an arm to each distinct call text, executed
/// deterministically; distinct resulting paths, sorted.
class BranchProductOracle {
 public:
  explicit BranchProductOracle(const ir::ApiDef& api) : api_(api) { collect(api.body); }

  std::vector<OraclePath> paths() const {
    std::vector<std::string> keys;
    std::vector<int> radix;
    for (const auto& [k, n] : points_) {
      keys.push_back(k);
      radix.push_back(n);
    }
    std::set<OraclePath> out;
    std::vector<int> choice(keys.size(), 0);
    while (true) {
      std::map<std::string, int> decide;
      for (std::size_t i = 0; i < keys.size(); ++i) decide[keys[i]] = choice[i];
      OraclePath p;
      std::set<std::string> seen;
      run(api_.body, decide, seen, p);
      out.insert(p);
      std::size_t i = 0;
      for (; i < choice.size(); ++i) {
        if (++choice[i] < radix[i]) break;
        choice[i] = 0;
      }
      if (i == choice.size()) break;
    }
    return {out.begin(), out.end()};
  }

 private:
  void collect(const ir::Block& b) {
    for (const auto& s : b) {
      if (auto* i = std::get_if<ir::Stmt::If>(&s.node)) {
        points_["if:" + ir::to_text(*i->cond)] = 2;
        collect(i->thenBranch);
        collect(i->elseBranch);
      } else if (auto* c = std::get_if<ir::Stmt::CallApi>(&s.node)) {
        int& n = points_["call:" + call_text(*c)];
        n = std::max<int>(n, static_cast<int>(c->arms.size()));
        for (const auto& a : c->arms) collect(a.body);
      }
    }
  }

  bool run(const ir::Block& b, const std::map<std::string, int>& decide, std::set<std::string>& seen,
           OraclePath& p) const {
    for (const auto& s : b) {
      if (auto* i = std::get_if<ir::Stmt::If>(&s.node)) {
        const std::string t = ir::to_text(*i->cond);
        const bool holds = decide.at("if:" + t) == 0;
        if (seen.insert("if:" + t).second) p.premises.push_back(holds ? t : "not (" + t + ")");
        return run(holds ? i->thenBranch : i->elseBranch, decide, seen, p);
      }
      if (auto* c = std::get_if<ir::Stmt::CallApi>(&s.node)) {
        const std::string t = call_text(*c);
        const int arm = decide.at("call:" + t) % static_cast<int>(c->arms.size());
        if (seen.insert("call:" + t).second) p.premises.push_back(t + " = " + arm_text(c->arms[arm]));
        return run(c->arms[arm].body, decide, seen, p);
      }
      if (auto* r = std::get_if<ir::Stmt::Return>(&s.node)) {
        p.variant = r->variant;
        return true;
      }
    }
    return false;
  }

  const ir::ApiDef& api_;
  std::map<std::string, int> points_;
};

inline std::vector<OraclePath> enumerated(const ir::Project& p, const ir::ApiDef& api, const DependencyGraph& g) {
  std::vector<OraclePath> out;
  for (const auto& r : enumerate_paths(p, api, g)) {
    OraclePath o;
    for (const auto& pr : r.premises) o.premises.push_back(pr.irText);
    o.variant = r.outcome.variant;
    out.push_back(o);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Soundness and completeness of requirements against the interpreter

struct SoundnessStats {
  std::size_t requirements = 0;
  std::size_t checked = 0;
  std::size_t mismatches = 0;
  std::size_t starved = 0;  // requirements short of the target sample count
  std::string firstProblem;
};

inline std::vector<TermPtr> propositions(const Requirement& r) {
  std::vector<TermPtr> hs;
  for (const auto& p : r.premises) hs.push_back(p.proposition());
  return hs;
}

inline std::vector<Value> args_of(const ir::ApiDef& api, const CEnv& env) {
  std::vector<Value> args;
  for (const auto& p : api.params) args.push_back(std::get<Value>(env.at(p.name)));
  return args;
}

inline States states_of(const std::vector<std::string>& tables, const CEnv& env) {
  States s;
  for (const auto& t : tables) s[t] = std::get<TableState>(env.at(ir::state_binder_name(t)));
  return s;
}

/// Compares the interpreter against one requirement's declared outcome for
/// `env`. Empty string when they agree.
inline std::string compare_outcome(const Interpreter& interp, const TermEvaluator& eval, const ir::ApiDef& api,
                                   const Requirement& r, const CEnv& env) {
  const Outcome out = interp.run(api.name, args_of(api, env), states_of(r.outcome.tables, env));
  if (out.variant != r.outcome.variant) return "variant " + out.variant + " != " + r.outcome.variant;
  if (out.payload.size() != r.outcome.payload.size()) return "payload arity";
  for (std::size_t i = 0; i < out.payload.size(); ++i) {
    const CValue want = eval.eval(*r.outcome.payload[i], env);
    if (!(CValue(out.payload[i]) == want)) return "payload " + std::to_string(i) + ": " + to_string(out.payload[i]);
  }
  for (std::size_t i = 0; i < r.outcome.tables.size(); ++i) {
    const CValue want = eval.eval(*r.outcome.finalStates[i], env);
    if (!(CValue(out.states.at(r.outcome.tables[i])) == want)) return "final state of " + r.outcome.tables[i];
  }
  return {};
}

/// `perRequirement` satisfying assignments for every requirement of every
/// API, drawn by rejection from at most `maxTries` samples each. `impl`
/// (default `p`) is the project the interpreter runs.
inline SoundnessStats check_soundness(const ir::Project& p, std::size_t perRequirement, std::uint64_t seed,
                                      std::size_t maxTries = 400000, const ir::Project* impl = nullptr) {
  SoundnessStats st;
  const DependencyGraph g = analyze_dependencies(p);
  const LeanProject lp = emit_project(p, g);
  const Interpreter interp(impl ? *impl : p);
  const TermEvaluator eval(interp);
  for (const auto& api : p.apis) {
    for (const auto& r : enumerate_paths(p, api, g)) {
      ++st.requirements;
      const TheoremSpec t = formalize_api_theorem(r, p, g, lp);
      AssignmentSampler sampler(p, literal_domains(p, {api.name}), seed + st.requirements);
      const auto hyps = propositions(r);
      std::size_t got = 0;
      for (std::size_t tries = 0; tries < maxTries && got < perRequirement; ++tries) {
        CEnv env = sampler.sample(t.binders);
        try {
          if (!hypotheses_hold(eval, hyps, env)) continue;
          const std::string problem = compare_outcome(interp, eval, api, r, env);
          ++got;
          if (!problem.empty()) {
            ++st.mismatches;
            if (st.firstProblem.empty()) st.firstProblem = t.id + ": " + problem;
          }
        } catch (const EvalError&) {
          continue;  // overflow under sampled literals
        }
      }
      st.checked += got;
      if (got < perRequirement) {
        ++st.starved;
        if (st.firstProblem.empty()) st.firstProblem = t.id + ": only " + std::to_string(got) + " satisfying samples";
      }
    }
  }
  return st;
}

/// For random inputs, the number of requirements of `api` whose
/// hypotheses hold. Every entry must be exactly 1.
inline std::vector<int> path_coverage(const ir::Project& p, const ir::ApiDef& api, std::size_t samples,
                                      std::uint64_t seed) {
  const DependencyGraph g = analyze_dependencies(p);
  const LeanProject lp = emit_project(p, g);
  const Interpreter interp(p);
  const TermEvaluator eval(interp);
  const auto reqs = enumerate_paths(p, api, g);
  std::vector<std::vector<TermPtr>> hyps;
  for (const auto& r : reqs) hyps.push_back(propositions(r));
  const TheoremSpec t0 = formalize_api_theorem(reqs.at(0), p, g, lp);
  std::vector<Binder> inputs;
  for (const auto& b : t0.binders) {
    if (b.origin == Binder::Origin::Param || b.origin == Binder::Origin::State) inputs.push_back(b);
  }
  AssignmentSampler sampler(p, literal_domains(p, {api.name}), seed);
  std::vector<int> counts;
  for (std::size_t i = 0; i < samples; ++i) {
    const CEnv base = sampler.sample(inputs);
    int n = 0;
    try {
      for (const auto& h : hyps) {
        CEnv env = base;
        if (hypotheses_hold(eval, h, env)) ++n;
      }
    } catch (const EvalError&) {
      continue;
    }
    counts.push_back(n);
  }
  return counts;
}

}  // namespace sftest
