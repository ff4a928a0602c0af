#include "n3s/query.hpp"

#include <algorithm>
#include <functional>

#include "n3s/parser.hpp"

namespace n3s {

std::string_view to_string(Verdict v) {
  switch (v) {
  case Verdict::Proved: return "proved";
  case Verdict::NotProved: return "not-proved";
  case Verdict::Unknown: return "unknown";
  }
  return "?";
}

Goal goal_from_document(const Document& d) {
  Document closed = existential_closure(d);
  Goal goal;
  goal.graffiti = closed.root.graffiti;
  for (const auto& item : closed.root.contents)
    if (item.is_fact())
      goal.facts.push_back(item.fact());
  return goal;
}

namespace {

Verdict verdict_of(SaturationOutcome outcome) {
  switch (outcome) {
  case SaturationOutcome::Fused: return Verdict::Proved;
  case SaturationOutcome::Completed: return Verdict::NotProved;
  case SaturationOutcome::LimitExceeded: return Verdict::Unknown;
  }
  return Verdict::Unknown;
}

// Renames the goal's blank labels away from everything used in the kb.
Goal rename_goal(const Goal& goal, FreshLabelSource& fresh) {
  Substitution renaming;
  Goal out;
  for (const auto& g : goal.graffiti) {
    std::string renamed = fresh.next();
    renaming.emplace(g, Term::blank(renamed));
    out.graffiti.push_back(renamed);
  }
  for (const auto& f : goal.facts)
    out.facts.push_back(substitute(renaming, f));
  return out;
}

} // namespace

ProofResult prove_by_contradiction(const Document& kb, const Goal& goal, const Limits& limits) {
  FreshLabelSource fresh;
  fresh.reserve_all(kb);
  Goal renamed = rename_goal(goal, fresh);
  Surface negated;
  negated.kind = SurfaceKind::Negative;
  negated.graffiti = renamed.graffiti;
  for (const auto& f : renamed.facts)
    add_item(negated, SurfaceItem::fact(f));
  Document extended = kb;
  add_item(extended.root, SurfaceItem::child(std::move(negated)));

  SaturationResult sat = saturate(extended, limits, fresh);
  return ProofResult{verdict_of(sat.outcome), std::move(sat.trace), std::move(sat.doc)};
}

ProofResult prove_by_negation(const Document& kb, const Goal& goal, const Limits& limits) {
  FreshLabelSource fresh;
  fresh.reserve_all(kb);
  Goal renamed = rename_goal(goal, fresh);
  Document extended = kb;
  for (const auto& g : renamed.graffiti)
    extended.root.graffiti.push_back(g);
  for (const auto& f : renamed.facts)
    add_item(extended.root, SurfaceItem::fact(f));

  SaturationResult sat = saturate(extended, limits, fresh);
  return ProofResult{verdict_of(sat.outcome), std::move(sat.trace), std::move(sat.doc)};
}

QueryResult answer_query_surfaces(const Document& kb, const Limits& limits) {
  std::vector<Surface> queries;
  Document working = kb;
  working.root.contents.clear();
  for (const auto& item : kb.root.contents) {
    if (item.is_child() && item.child().kind == SurfaceKind::Query)
      queries.push_back(item.child());
    else
      working.root.contents.push_back(item);
  }
  if (queries.empty())
    throw QueryError(QueryErrorKind::NoQuerySurface, "no query surface at the top level");

  FreshLabelSource fresh;
  SaturationResult sat = saturate(working, limits, fresh);
  QueryResult result;
  result.outcome = sat.outcome;
  result.fuse = sat.trace.fuse;
  result.trace = std::move(sat.trace);
  if (result.outcome == SaturationOutcome::Fused)
    return result;

  std::vector<const SurfaceItem*> root_facts;
  for (const auto& item : sat.doc.root.contents)
    if (item.is_fact())
      root_facts.push_back(&item);

  std::set<std::string> dedup;
  for (const Surface& q : queries) {
    std::set<std::string> universals(q.graffiti.begin(), q.graffiti.end());
    std::vector<const Triple*> pattern;
    for (const auto& item : q.contents)
      if (item.is_fact())
        pattern.push_back(&item.fact());

    std::function<void(size_t, const Substitution&)> search = [&](size_t i,
                                                                  const Substitution& theta) {
      if (i == pattern.size()) {
        QueryAnswer answer;
        answer.bindings = theta;
        std::string key;
        for (const Triple* p : pattern) {
          Triple instantiated = substitute(theta, *p);
          key += canonical_key(SurfaceItem::fact(instantiated)) + ";";
          answer.triples.push_back(std::move(instantiated));
        }
        if (dedup.insert(key).second)
          result.answers.push_back(std::move(answer));
        return;
      }
      for (const SurfaceItem* candidate : root_facts) {
        auto extended =
            unify_item(SurfaceItem::fact(*pattern[i]), *candidate, universals, theta);
        if (extended)
          search(i + 1, *extended);
      }
    };
    search(0, {});
  }
  return result;
}

std::string render_answers(const QueryResult& result, const PrefixMap& prefixes) {
  // emit only prefixes that actually compress an answer term
  PrefixMap used;
  auto consider = [&](const Term& t) {
    if (!t.is_iri())
      return;
    std::string rendered = render_term_n3s(t, prefixes);
    if (rendered.empty() || rendered[0] == '<' || rendered == "a")
      return;
    std::string prefix = rendered.substr(0, rendered.find(':'));
    if (const std::string* ns = prefixes.find(prefix))
      used.set(prefix, *ns);
  };
  for (const auto& answer : result.answers)
    for (const auto& t : answer.triples) {
      consider(t.subject);
      consider(t.predicate);
      consider(t.object);
    }
  std::string out;
  for (const auto& [prefix, ns] : used.entries)
    out += "@prefix " + prefix + ": <" + ns + "> .\n";
  if (!used.entries.empty() && !result.answers.empty())
    out += "\n";
  for (const auto& answer : result.answers)
    for (const auto& t : answer.triples)
      out += render_triple_n3s(t, prefixes) + "\n";
  return out;
}

} // namespace n3s
