#pragma once

#include <set>
#include <string>
#include <vector>

#include "specforge/ir.hpp"

namespace specforge {

enum class EdgeKind { TableTable, ApiTableRead, ApiTableWrite, ApiApi };

const char* to_string(EdgeKind kind);

struct DepEdge {
  EdgeKind kind;
  std::string from;
  std::string to;

  auto operator<=>(const DepEdge&) const = default;
};

struct DependencyGraph {
  std::set<std::string> tables;
  std::set<std::string> apis;
  std::set<DepEdge> edges;
  std::vector<std::string> topoOrder;

  std::set<std::string> nodes() const;
  bool operator==(const DependencyGraph&) const = default;
};

/// Edges are read syntactically off the IR. A write on any path yields an
/// ApiTableWrite edge. The returned graph already carries its topoOrder.
DependencyGraph analyze_dependencies(const ir::Project& project);

/// Tables first, then APIs; prerequisites precede dependents; ties break
/// lexicographically. Throws CyclicDependency naming one cycle.
std::vector<std::string> topological_order(const DependencyGraph& graph);

/// Tables `api` reads or writes directly or through any callee, in topoOrder.
std::vector<std::string> dependent_tables(const DependencyGraph& graph, const std::string& api);

/// Tables `api` writes directly or through any callee, in topoOrder.
std::vector<std::string> written_tables(const DependencyGraph& graph, const std::string& api);

/// APIs reachable from `api` through ApiApi edges, excluding `api`.
std::set<std::string> transitive_callees(const DependencyGraph& graph, const std::string& api);

}  // namespace specforge
