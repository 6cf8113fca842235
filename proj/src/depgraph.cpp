#include "specforge/depgraph.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "specforge/errors.hpp"

namespace specforge {

const char* to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::TableTable: return "TableTable";
    case EdgeKind::ApiTableRead: return "ApiTableRead";
    case EdgeKind::ApiTableWrite: return "ApiTableWrite";
    case EdgeKind::ApiApi: return "ApiApi";
  }
  return "?";
}

std::set<std::string> DependencyGraph::nodes() const {
  std::set<std::string> out = tables;
  out.insert(apis.begin(), apis.end());
  return out;
}

namespace {

void scan_block(const std::string& api, const ir::Block& block, std::set<DepEdge>& edges) {
  for (const auto& stmt : block) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ir::Stmt::If>) {
            scan_block(api, s.thenBranch, edges);
            scan_block(api, s.elseBranch, edges);
          } else if constexpr (std::is_same_v<T, ir::Stmt::CallApi>) {
            edges.insert({EdgeKind::ApiApi, api, s.api});
            for (const auto& arm : s.arms) scan_block(api, arm.body, edges);
          } else if constexpr (std::is_same_v<T, ir::Stmt::TableRead>) {
            edges.insert({EdgeKind::ApiTableRead, api, s.table});
          } else if constexpr (std::is_same_v<T, ir::Stmt::TableWrite>) {
            edges.insert({EdgeKind::ApiTableWrite, api, s.table});
          }
        },
        stmt.node);
  }
}

// Kahn's algorithm restricted to `members`; `prereqs[n]` must precede n.
std::vector<std::string> order_group(const std::set<std::string>& members,
                                     const std::map<std::string, std::set<std::string>>& prereqs) {
  std::map<std::string, int> indegree;
  std::map<std::string, std::vector<std::string>> dependents;
  for (const auto& n : members) indegree[n] = 0;
  for (const auto& [n, reqs] : prereqs) {
    if (!members.count(n)) continue;
    for (const auto& r : reqs) {
      if (r == n || !members.count(r)) continue;
      ++indegree[n];
      dependents[r].push_back(n);
    }
  }
  std::set<std::string> ready;
  for (const auto& [n, d] : indegree) {
    if (d == 0) ready.insert(n);
  }
  std::vector<std::string> out;
  while (!ready.empty()) {
    std::string n = *ready.begin();
    ready.erase(ready.begin());
    out.push_back(n);
    for (const auto& m : dependents[n]) {
      if (--indegree[m] == 0) ready.insert(m);
    }
  }
  if (out.size() == members.size()) return out;

  // Walk prerequisite links among the unresolved nodes until one repeats.
  std::set<std::string> stuck;
  for (const auto& [n, d] : indegree) {
    if (d > 0) stuck.insert(n);
  }
  std::vector<std::string> walk;
  std::string cur = *stuck.begin();
  while (std::find(walk.begin(), walk.end(), cur) == walk.end()) {
    walk.push_back(cur);
    const auto& reqs = prereqs.at(cur);
    auto next = std::find_if(reqs.begin(), reqs.end(),
                             [&](const std::string& r) { return r != cur && stuck.count(r); });
    cur = *next;
  }
  auto start = std::find(walk.begin(), walk.end(), cur);
  std::vector<std::string> cycle(start, walk.end());
  std::string text;
  for (const auto& n : cycle) text += n + " -> ";
  text += cycle.front();
  throw CyclicDependency("dependency cycle: " + text);
}

}  // namespace

DependencyGraph analyze_dependencies(const ir::Project& project) {
  DependencyGraph g;
  for (const auto& t : project.tables) {
    g.tables.insert(t.name);
    for (const auto& c : t.columns) {
      if (c.foreignKey) g.edges.insert({EdgeKind::TableTable, t.name, c.foreignKey->table});
    }
  }
  for (const auto& a : project.apis) {
    g.apis.insert(a.name);
    scan_block(a.name, a.body, g.edges);
  }
  g.topoOrder = topological_order(g);
  return g;
}

std::vector<std::string> topological_order(const DependencyGraph& graph) {
  std::map<std::string, std::set<std::string>> tablePrereqs, apiPrereqs;
  for (const auto& t : graph.tables) tablePrereqs[t];
  for (const auto& a : graph.apis) apiPrereqs[a];
  for (const auto& e : graph.edges) {
    if (e.kind == EdgeKind::TableTable) tablePrereqs[e.from].insert(e.to);
    if (e.kind == EdgeKind::ApiApi) {
      if (e.from == e.to) throw CyclicDependency("dependency cycle: " + e.from + " -> " + e.from);
      apiPrereqs[e.from].insert(e.to);
    }
  }
  std::vector<std::string> out = order_group(graph.tables, tablePrereqs);
  std::vector<std::string> apis = order_group(graph.apis, apiPrereqs);
  out.insert(out.end(), apis.begin(), apis.end());
  return out;
}

std::set<std::string> transitive_callees(const DependencyGraph& graph, const std::string& api) {
  std::set<std::string> seen;
  std::vector<std::string> stack{api};
  while (!stack.empty()) {
    std::string cur = stack.back();
    stack.pop_back();
    for (const auto& e : graph.edges) {
      if (e.kind == EdgeKind::ApiApi && e.from == cur && e.to != api && seen.insert(e.to).second) {
        stack.push_back(e.to);
      }
    }
  }
  return seen;
}

namespace {

std::vector<std::string> tables_touched(const DependencyGraph& graph, const std::string& api,
                                        bool writesOnly) {
  std::set<std::string> callers = transitive_callees(graph, api);
  callers.insert(api);
  std::set<std::string> touched;
  for (const auto& e : graph.edges) {
    bool relevant = e.kind == EdgeKind::ApiTableWrite || (!writesOnly && e.kind == EdgeKind::ApiTableRead);
    if (relevant && callers.count(e.from)) touched.insert(e.to);
  }
  std::vector<std::string> out;
  for (const auto& n : graph.topoOrder) {
    if (touched.count(n)) out.push_back(n);
  }
  return out;
}

}  // namespace

std::vector<std::string> dependent_tables(const DependencyGraph& graph, const std::string& api) {
  return tables_touched(graph, api, false);
}

std::vector<std::string> written_tables(const DependencyGraph& graph, const std::string& api) {
  return tables_touched(graph, api, true);
}

}  // namespace specforge
