#pragma once

#include <memory>

#include "n3s/surface.hpp"

namespace n3s {

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Subject/object slot of an atom: a constant term or a quantified variable.
struct FTerm {
  bool is_var = false;
  int var = -1;
  std::optional<Term> constant;

  static FTerm variable(int id) { return FTerm{true, id, std::nullopt}; }
  static FTerm of(Term t) { return FTerm{false, -1, std::move(t)}; }
};

/// Closed first-order formula over binary atoms: True | Atom | And | Not | Exists.
struct Formula {
  enum class Kind { True, Atom, And, Not, Exists };
  Kind kind = Kind::True;
  std::optional<Term> predicate; // Atom
  FTerm subject, object;         // Atom
  std::vector<FormulaPtr> parts; // And
  FormulaPtr body;               // Not, Exists
  int var = -1;                  // Exists
  std::string var_name;          // Exists, for printing
};

FormulaPtr f_true();
FormulaPtr f_atom(Term predicate, FTerm subject, FTerm object);
FormulaPtr f_and(std::vector<FormulaPtr> parts);
FormulaPtr f_not(FormulaPtr body);
FormulaPtr f_exists(int var, std::string name, FormulaPtr body);

/// Root facts become atoms, negative children become Not(...), each surface's
/// graffiti become Exists binders just inside its boundary. Query surfaces are
/// skipped. Blank labels resolve per the scope convention; unbound labels are
/// opaque constants.
FormulaPtr to_formula(const Document& d);

/// Like to_formula but conjoined after another formula's variable ids.
FormulaPtr to_formula_offset(const Document& d, int& next_var);

struct Vocabulary {
  std::vector<Term> constants;  // IRIs and literals in subject/object slots
  std::vector<Term> predicates;
};

Vocabulary vocabulary_of(const FormulaPtr& f);
Vocabulary vocabulary_union(const Vocabulary& a, const Vocabulary& b);

struct Interpretation {
  int domain_size = 1;
  std::map<Term, int> constants;
  std::map<Term, std::set<std::pair<int, int>>> relations;
};

/// Standard FOL satisfaction; env maps variable ids to domain elements.
bool eval(const Formula& f, const Interpretation& interp, std::map<int, int>& env);

class TooLargeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive search over interpretations with |domain| <= k (constant maps
/// enumerated, relations decided propositionally). The guard refuses more
/// than 2 predicates or k > 3 unless forced.
std::optional<Interpretation> find_model(const FormulaPtr& f, const Vocabulary& vocab, int k,
                                         bool force = false);

inline bool satisfiable(const FormulaPtr& f, const Vocabulary& vocab, int k, bool force = false) {
  return find_model(f, vocab, k, force).has_value();
}

enum class EntailVerdict { EntailedAtK, NotEntailed };

struct EntailResult {
  EntailVerdict verdict = EntailVerdict::NotEntailed;
  int k = 0;                                  // domain bound checked / counter size
  std::optional<Interpretation> counter_model;
};

/// NotEntailed iff kb ∧ ¬goal has a model with |domain| <= k; otherwise
/// Entailed-at-k (evidence up to the bound, not a proof).
EntailResult entails(const Document& kb, const FormulaPtr& goal, int k, bool force = false);

std::string to_string(const Formula& f);
std::string describe(const Interpretation& interp, const Vocabulary& vocab);

} // namespace n3s
