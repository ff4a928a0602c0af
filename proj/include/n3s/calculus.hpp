#pragma once

#include "n3s/normalize.hpp"
#include "n3s/surface.hpp"

namespace n3s {

enum class RuleKind {
  R1Insert,
  R2Erase,
  R3RemoveDoubleCut,
  R3InsertDoubleCut,
  R4Iterate,
  R4Deiterate,
};

std::string_view to_string(RuleKind k);

/// One diagram-rule step. Field use per rule:
///   R1Insert / R2Erase / R4Deiterate : target + items[0] (+subst for R4D)
///   R3RemoveDoubleCut                : target (+subst renaming inner graffiti)
///   R3InsertDoubleCut                : target + items (the wrapped subset)
///   R4Iterate                        : source + items[0] + target (+subst)
struct RuleApplication {
  RuleKind rule;
  std::vector<int> target;
  std::vector<SurfaceItem> items;
  std::vector<int> source;
  Substitution subst;
};

struct FuseReport {
  std::vector<int> surface_path; // the negative surface that became empty
  Substitution subst;
  size_t trace_index = 0;
};

struct DerivationTrace {
  std::vector<RuleApplication> steps;
  std::vector<SurfaceItem> produced; // items added to the root
  std::optional<FuseReport> fuse;
};

struct Limits {
  int max_iterations = 10000;
  int max_fresh_blanks = 1000;
  int max_depth = 32;
};

enum class CalculusErrorKind {
  ParityViolation,
  ItemNotFound,
  NotADoubleCut,
  NoAncestorCopy,
  ContainmentViolation,
  InvalidSubstitution,
  Address,
  LimitExceeded,
};

class CalculusError : public std::runtime_error {
public:
  CalculusError(CalculusErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  CalculusErrorKind kind() const { return kind_; }

private:
  CalculusErrorKind kind_;
};

class LimitExceededError : public CalculusError {
public:
  LimitExceededError(const std::string& msg, DerivationTrace partial)
      : CalculusError(CalculusErrorKind::LimitExceeded, msg), partial_(std::move(partial)) {}
  const DerivationTrace& partial() const { return partial_; }

private:
  DerivationTrace partial_;
};

// ------------------------------------------------------------------ rules

Document apply_r1_insert(const Document& d, std::span<const int> target, const SurfaceItem& item);
Document apply_r2_erase(const Document& d, std::span<const int> target, const SurfaceItem& item);

/// Removes the double boundary at `target` (a graffiti-free-or-unused Negative
/// surface whose sole content is a Negative child), splicing the inner
/// contents and graffiti into the parent. `rename` overrides the inner
/// graffiti labels (fresh-on-collision otherwise).
Document apply_r3_remove_double_cut(const Document& d, std::span<const int> target,
                                    const Substitution& rename = {});

Document apply_r3_insert_double_cut(const Document& d, std::span<const int> target,
                                    const std::vector<SurfaceItem>& subset);

/// Places a copy of `item` (present on the surface at `source`) onto the
/// surface at `target`, which must be `source` itself or a descendant and may
/// not lie inside the copied item. A nonempty `subst` instantiates the copied
/// child's own graffiti (universal instantiation); the instantiated copy drops
/// graffiti left without occurrences.
Document apply_r4_iterate(const Document& d, std::span<const int> source, const SurfaceItem& item,
                          std::span<const int> target, const Substitution& subst = {});

/// Erases `item` from the surface at `target`, justified by an item on a
/// strict ancestor isomorphic to item·subst. A nonempty `subst` discharges the
/// target surface's graffiti first (wildcard binding), which requires the
/// target at parity 1.
Document apply_r4_deiterate(const Document& d, std::span<const int> target,
                            const SurfaceItem& item, const Substitution& subst = {});

Document apply_rule(const Document& d, const RuleApplication& step);

/// Extends s0 so that pattern·s equals fact; only labels in `universals` are
/// assignable. Child patterns match by isomorphism under the substitution.
std::optional<Substitution> unify_item(const SurfaceItem& pattern, const SurfaceItem& fact,
                                       const std::set<std::string>& universals,
                                       const Substitution& s0 = {});

// ------------------------------------------------------------------ engine

enum class SaturationOutcome { Completed, Fused, LimitExceeded };

struct SaturationResult {
  Document doc;
  DerivationTrace trace;
  SaturationOutcome outcome = SaturationOutcome::Completed;
};

/// Forward chaining to fixpoint over the root's negative children using
/// deiteration and double-cut removal, with derivations recorded as replayable
/// rule steps. Stops at the first contradiction (inference fuse) or when a
/// limit trips. Query surfaces are ignored.
SaturationResult saturate(const Document& d, const Limits& limits, FreshLabelSource& fresh);

/// Saturates with the given limits; throws LimitExceededError on limit.
std::optional<FuseReport> detect_fuse(const Document& d, const Limits& limits = {});

struct ProofCheck {
  bool ok = true;
  std::optional<size_t> failed_step;
  Document final_doc;
};

/// Replays steps, validating each precondition in turn.
ProofCheck check_proof(const Document& d, const std::vector<RuleApplication>& steps);

// ------------------------------------------------------------------ script I/O

std::string format_path(std::span<const int> path);
std::string format_item(const SurfaceItem& item, const PrefixMap& prefixes);
std::string format_substitution(const Substitution& s, const PrefixMap& prefixes);
std::string format_rule_application(const RuleApplication& step, const PrefixMap& prefixes);
std::string format_trace(const DerivationTrace& trace, const PrefixMap& prefixes);

/// Line-oriented script: one rule application per line, `#` comments allowed.
/// Prefixed names resolve against `prefixes`.
std::vector<RuleApplication> parse_proof_script(std::string_view text, const PrefixMap& prefixes);

} // namespace n3s
