#pragma once

#include "n3s/calculus.hpp"

namespace n3s {

enum class Verdict { Proved, NotProved, Unknown };

std::string_view to_string(Verdict v);

struct ProofResult {
  Verdict verdict = Verdict::NotProved;
  DerivationTrace trace;
  Document saturated;
};

/// A goal: facts read as a conjunction, graffiti read existentially.
struct Goal {
  std::vector<std::string> graffiti;
  std::vector<Triple> facts;
};

/// Root facts and root graffiti of a parsed (and closed) goal document.
Goal goal_from_document(const Document& d);

/// Adds the negated goal to the knowledge base and saturates; Proved iff the
/// run fuses, Unknown when a limit trips.
ProofResult prove_by_contradiction(const Document& kb, const Goal& goal, const Limits& limits);

/// Adds the goal itself (double negation eliminated) and saturates; Proved
/// iff the run fuses, i.e. the knowledge base holds the goal's negation.
ProofResult prove_by_negation(const Document& kb, const Goal& goal, const Limits& limits);

struct QueryAnswer {
  Substitution bindings;
  std::vector<Triple> triples;
};

struct QueryResult {
  std::vector<QueryAnswer> answers;
  SaturationOutcome outcome = SaturationOutcome::Completed;
  std::optional<FuseReport> fuse;
  DerivationTrace trace;
};

enum class QueryErrorKind { NoQuerySurface };

class QueryError : public std::runtime_error {
public:
  QueryError(QueryErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  QueryErrorKind kind() const { return kind_; }

private:
  QueryErrorKind kind_;
};

/// Holds the root query surfaces aside, saturates the rest, then enumerates
/// substitutions over each query's graffiti whose instantiated pattern is a
/// subset of the root facts. Answers deduplicate by instantiated triple set.
QueryResult answer_query_surfaces(const Document& kb, const Limits& limits);

/// Answer triples as Turtle, prefixes (only those used) emitted once.
std::string render_answers(const QueryResult& result, const PrefixMap& prefixes);

} // namespace n3s
