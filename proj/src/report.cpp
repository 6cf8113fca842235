#include "specforge/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "json.hpp"
#include "specforge/errors.hpp"

namespace specforge {

using ojson = nlohmann::ordered_json;

const char* to_string(Triage t) {
  switch (t) {
    case Triage::Verified: return "Verified";
    case Triage::BugFound: return "BugFound";
    case Triage::Unresolved: return "Unresolved";
  }
  return "?";
}

std::optional<double> Tally::percent() const {
  if (total() == 0) return std::nullopt;
  return 100.0 * proved / total();
}

std::string format_percent(const std::optional<double>& p) {
  if (!p) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", *p);
  return buf;
}

CostLedger make_cost_ledger(const std::vector<ProofAttempt>& log, const Prices& prices, int apiCount) {
  CostLedger c;
  c.prices = prices;
  c.apiCount = apiCount;
  for (const auto& a : log) {
    c.calls.push_back(a.usage);
    c.promptTokens += std::max<std::int64_t>(0, a.usage.prompt);
    c.completionTokens += std::max<std::int64_t>(0, a.usage.completion);
  }
  c.total = (static_cast<double>(c.promptTokens) * std::max(0.0, prices.promptPerMillion) +
             static_cast<double>(c.completionTokens) * std::max(0.0, prices.completionPerMillion)) /
            1e6;
  if (apiCount > 0) c.perApi = c.total / apiCount;
  return c;
}

namespace {

Tally& tally_for(std::vector<Tally>& tallies, const std::string& name) {
  for (auto& t : tallies) {
    if (t.name == name) return t;
  }
  tallies.push_back({name});
  return tallies.back();
}

}  // namespace

VerificationReport classify(const std::string& project, const std::vector<TheoremSpec>& theorems) {
  VerificationReport r;
  r.project = project;
  std::map<std::string, const TheoremSpec*> provedNegation;
  for (const auto& t : theorems) {
    if (t.kind == TheoremKind::Negation && t.status == TheoremStatus::Proved) provedNegation[t.negationOf] = &t;
  }
  for (const auto& t : theorems) {
    if (t.kind == TheoremKind::Negation) continue;
    auto neg = provedNegation.find(t.id);
    const bool proved = t.status == TheoremStatus::Proved;
    if (proved && neg != provedNegation.end()) {
      throw InconsistentState(t.id + " and its negation are both proved");
    }
    if (t.status == TheoremStatus::BugFound && neg == provedNegation.end()) {
      throw InconsistentState(t.id + " is marked BugFound without a proved negation");
    }
    TheoremResult res;
    res.id = t.id;
    res.kind = t.kind;
    res.api = t.api;
    res.table = t.table;
    if (proved) {
      res.triage = Triage::Verified;
      res.proof = t.proof;
      ++r.verified;
    } else if (neg != provedNegation.end()) {
      res.triage = Triage::BugFound;
      res.negationId = neg->second->id;
      res.witness = neg->second->proof;
      r.bugs.push_back({t.id, res.negationId, t.api, res.witness, t.prose});
      ++r.bugsFound;
    } else {
      ++r.unresolved;
    }
    Tally& total = t.kind == TheoremKind::TableProp ? r.tableProof : r.apiProof;
    Tally& group = t.kind == TheoremKind::TableProp ? tally_for(r.perTable, t.table) : tally_for(r.perApi, t.api);
    (proved ? total.proved : total.unproved)++;
    (proved ? group.proved : group.unproved)++;
    r.theorems.push_back(std::move(res));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string pad(const std::string& s, std::size_t w, bool right = false) {
  // Width counts bytes; report names are ASCII.
  if (s.size() >= w) return s;
  return right ? std::string(w - s.size(), ' ') + s : s + std::string(w - s.size(), ' ');
}

std::string money(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string tally_cells(const Tally& t) {
  return pad(std::to_string(t.proved), 6, true) + "  " + pad(std::to_string(t.unproved), 8, true) + "  " +
         pad(format_percent(t.percent()), 7, true);
}

void tally_table(std::string& s, const std::string& title, const std::vector<Tally>& rows) {
  std::size_t w = title.size();
  for (const auto& t : rows) w = std::max(w, t.name.size());
  s += pad(title, w) + "  Proved  Unproved  Proved%\n";
  for (const auto& t : rows) s += pad(t.name, w) + "  " + tally_cells(t) + "\n";
}

ojson tally_json(const Tally& t) {
  ojson j = {{"name", t.name}, {"proved", t.proved}, {"unproved", t.unproved}};
  if (auto p = t.percent()) {
    j["provedPercent"] = std::stod(format_percent(p));
  } else {
    j["provedPercent"] = nullptr;
  }
  return j;
}

std::string render_text(const VerificationReport& r) {
  std::string s;
  const std::size_t w = std::max<std::size_t>(7, r.project.size());
  s += pad("Project", w) + " | API Proof                   | Table Proof\n";
  s += pad("", w) + " | Proved  Unproved  Proved%   | Proved  Unproved  Proved%\n";
  s += std::string(w, '-') + "-+-----------------------------+---------------------------\n";
  if (r.theorems.empty()) return s;
  s += pad(r.project, w) + " | " + tally_cells(r.apiProof) + "   | " + tally_cells(r.tableProof) + "\n";

  s += "\n";
  tally_table(s, "API", r.perApi);
  s += "\n";
  tally_table(s, "Table", r.perTable);

  s += "\nVariant " + std::to_string(r.variant) + ": " + std::to_string(r.verified) + " verified, " +
       std::to_string(r.bugsFound) + " bug found, " + std::to_string(r.unresolved) + " unresolved\n";

  s += "\nBugs\n";
  if (r.bugs.empty()) s += "  none\n";
  for (const auto& b : r.bugs) {
    s += "  " + b.theoremId + "  refuted by " + b.negationId + "\n";
    s += "    witness: " + b.witness + "\n";
    if (!b.prose.empty()) s += "    requirement: " + b.prose + "\n";
  }

  s += "\nStage warnings\n";
  if (r.warnings.empty()) s += "  none\n";
  for (const auto& w2 : r.warnings) s += "  [" + w2.stage + "] " + w2.subject + ": " + w2.message + "\n";

  const CostLedger& c = r.cost;
  s += "\nCost: " + std::to_string(c.calls.size()) + " backend calls, " + std::to_string(c.promptTokens) +
       " prompt tokens, " + std::to_string(c.completionTokens) + " completion tokens, total " + money(c.total) + " " +
       c.prices.currency + ", per API " + (c.perApi ? money(*c.perApi) + " " + c.prices.currency : std::string("-")) + "\n";
  return s;
}

std::string render_json(const VerificationReport& r) {
  ojson j;
  j["project"] = r.project;
  j["variant"] = r.variant;
  j["summary"] = {{"verified", r.verified}, {"bugFound", r.bugsFound}, {"unresolved", r.unresolved}};
  j["apiProof"] = tally_json(r.apiProof);
  j["tableProof"] = tally_json(r.tableProof);
  ojson apis = ojson::array(), tables = ojson::array();
  for (const auto& t : r.perApi) apis.push_back(tally_json(t));
  for (const auto& t : r.perTable) tables.push_back(tally_json(t));
  j["perApi"] = apis;
  j["perTable"] = tables;
  ojson ths = ojson::array();
  for (const auto& t : r.theorems) {
    ojson e = {{"id", t.id}, {"kind", to_string(t.kind)}, {"api", t.api}, {"table", t.table},
               {"triage", to_string(t.triage)}, {"proof", t.proof}};
    if (t.triage == Triage::BugFound) {
      e["negation"] = t.negationId;
      e["witness"] = t.witness;
    }
    ths.push_back(e);
  }
  j["theorems"] = ths;
  ojson bugs = ojson::array();
  for (const auto& b : r.bugs) {
    bugs.push_back({{"theoremId", b.theoremId}, {"negation", b.negationId}, {"api", b.api}, {"witness", b.witness},
                    {"requirement", b.prose}});
  }
  j["bugs"] = bugs;
  ojson warns = ojson::array();
  for (const auto& w : r.warnings) warns.push_back({{"stage", w.stage}, {"subject", w.subject}, {"message", w.message}});
  j["warnings"] = warns;
  const CostLedger& c = r.cost;
  ojson cost = {{"calls", c.calls.size()},
                {"promptTokens", c.promptTokens},
                {"completionTokens", c.completionTokens},
                {"promptPricePerMillion", c.prices.promptPerMillion},
                {"completionPricePerMillion", c.prices.completionPerMillion},
                {"currency", c.prices.currency},
                {"total", c.total},
                {"apiCount", c.apiCount}};
  cost["perApi"] = c.perApi ? ojson(*c.perApi) : ojson(nullptr);
  j["cost"] = cost;
  return j.dump(2) + "\n";
}

}  // namespace

std::string render(const VerificationReport& report, ReportFormat format) {
  return format == ReportFormat::Json ? render_json(report) : render_text(report);
}

}  // namespace specforge
