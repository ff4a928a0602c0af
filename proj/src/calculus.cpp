#include "n3s/calculus.hpp"

#include <algorithm>
#include <functional>

#include "n3s/parser.hpp"

namespace n3s {

std::string_view to_string(RuleKind k) {
  switch (k) {
  case RuleKind::R1Insert: return "R1I";
  case RuleKind::R2Erase: return "R2E";
  case RuleKind::R3RemoveDoubleCut: return "R3R";
  case RuleKind::R3InsertDoubleCut: return "R3I";
  case RuleKind::R4Iterate: return "R4I";
  case RuleKind::R4Deiterate: return "R4D";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(CalculusErrorKind kind, const std::string& msg) {
  throw CalculusError(kind, msg);
}

const Surface& at(const Document& d, std::span<const int> path) {
  const Surface* s = find_surface(d, path);
  if (!s)
    fail(CalculusErrorKind::Address, "no surface at path");
  return *s;
}

// Does any occurrence in `s` bind to an outer declaration of `label`?
bool binds_into(const std::string& label, const Surface& s) {
  for (const auto& item : s.contents) {
    if (item.is_fact()) {
      const Triple& t = item.fact();
      if ((t.subject.is_blank() && t.subject.value() == label) ||
          (t.object.is_blank() && t.object.value() == label))
        return true;
    } else {
      const Surface& child = item.child();
      bool shadowed = std::find(child.graffiti.begin(), child.graffiti.end(), label) !=
                      child.graffiti.end();
      if (!shadowed && binds_into(label, child))
        return true;
    }
  }
  return false;
}

// Universal instantiation of a child surface: declared graffiti in dom(subst)
// are discharged and the binding applied throughout; optionally graffiti left
// without occurrences are dropped.
Surface instantiate(const Surface& s, const Substitution& subst, bool drop_unused) {
  Surface out;
  out.kind = s.kind;
  for (const auto& g : s.graffiti)
    if (!subst.count(g))
      out.graffiti.push_back(g);
  for (const auto& item : s.contents)
    add_item(out, substitute(subst, item));
  if (drop_unused) {
    std::erase_if(out.graffiti, [&](const std::string& g) { return !binds_into(g, out); });
  }
  return out;
}

bool alpha_iso_item(const SurfaceItem& a, const SurfaceItem& b) {
  if (a.is_fact() != b.is_fact())
    return false;
  if (a.is_fact())
    return a.fact() == b.fact();
  return match_surfaces(a.child(), b.child(), {}, {}).has_value();
}

size_t nesting_depth(const Surface& s) {
  size_t deepest = 0;
  for (const auto& item : s.contents)
    if (item.is_child())
      deepest = std::max(deepest, 1 + nesting_depth(item.child()));
  return deepest;
}

size_t child_count(const Surface& s) {
  return child_positions(s).size();
}

} // namespace

Document apply_r1_insert(const Document& d, std::span<const int> target, const SurfaceItem& item) {
  const Surface& tgt = at(d, target);
  if (parity(d, target) != 1)
    fail(CalculusErrorKind::ParityViolation, "R1 insertion requires parity 1");
  if (tgt.kind == SurfaceKind::Query && item.is_child())
    fail(CalculusErrorKind::ContainmentViolation, "query surface may not hold nested surfaces");
  Surface out = tgt;
  add_item(out, item); // duplicate insert leaves the document unchanged
  return replace_surface(d, target, std::move(out));
}

Document apply_r2_erase(const Document& d, std::span<const int> target, const SurfaceItem& item) {
  const Surface& tgt = at(d, target);
  if (parity(d, target) != 0)
    fail(CalculusErrorKind::ParityViolation, "R2 erasure requires parity 0");
  Surface out = tgt;
  if (!remove_item(out, item))
    fail(CalculusErrorKind::ItemNotFound, "item to erase not present");
  return replace_surface(d, target, std::move(out));
}

Document apply_r3_remove_double_cut(const Document& d, std::span<const int> target,
                                    const Substitution& rename) {
  if (target.empty())
    fail(CalculusErrorKind::NotADoubleCut, "the root surface is not a double cut");
  const Surface& outer = at(d, target);
  if (outer.kind != SurfaceKind::Negative)
    fail(CalculusErrorKind::NotADoubleCut, "outer surface is not negative");
  if (outer.contents.size() != 1 || !outer.contents[0].is_child())
    fail(CalculusErrorKind::NotADoubleCut, "outer region is not empty");
  const Surface& inner = outer.contents[0].child();
  if (inner.kind != SurfaceKind::Negative)
    fail(CalculusErrorKind::NotADoubleCut, "inner surface is not negative");
  for (const auto& g : outer.graffiti) {
    bool redeclared =
        std::find(inner.graffiti.begin(), inner.graffiti.end(), g) != inner.graffiti.end();
    if (!redeclared && binds_into(g, inner))
      fail(CalculusErrorKind::NotADoubleCut,
           "outer graffiti '_:" + g + "' occurs in the interior");
  }

  std::vector<int> parent_path(target.begin(), target.end() - 1);
  const Surface& parent = at(d, parent_path);
  Surface out = parent;
  if (!remove_item(out, SurfaceItem::child(outer)))
    fail(CalculusErrorKind::Address, "double cut not found in parent");

  // Inner graffiti move to the parent; rename per request, otherwise keep the
  // label unless it is used anywhere outside the inner surface (capture).
  std::set<std::string> doc_labels;
  collect_labels(d.root, doc_labels);
  std::set<std::string> outside = doc_labels;
  {
    std::set<std::string> inner_labels;
    collect_labels(inner, inner_labels);
    for (const auto& l : inner_labels)
      outside.erase(l);
  }
  Substitution applied;
  std::set<std::string> taken = doc_labels;
  int fresh_counter = 0;
  for (const auto& g : inner.graffiti) {
    std::string renamed = g;
    if (auto it = rename.find(g); it != rename.end()) {
      if (!it->second.is_blank())
        fail(CalculusErrorKind::InvalidSubstitution, "double-cut renaming must map to blank nodes");
      renamed = it->second.value();
    } else if (std::find(out.graffiti.begin(), out.graffiti.end(), g) != out.graffiti.end() ||
               outside.count(g)) {
      do {
        renamed = "g" + std::to_string(++fresh_counter);
      } while (taken.count(renamed));
    }
    taken.insert(renamed);
    if (renamed != g)
      applied.emplace(g, Term::blank(renamed));
    out.graffiti.push_back(renamed);
  }
  for (const auto& item : inner.contents)
    add_item(out, substitute(applied, item));
  return replace_surface(d, parent_path, std::move(out));
}

Document apply_r3_insert_double_cut(const Document& d, std::span<const int> target,
                                    const std::vector<SurfaceItem>& subset) {
  const Surface& tgt = at(d, target);
  Surface out = tgt;
  for (const auto& item : subset)
    if (!remove_item(out, item))
      fail(CalculusErrorKind::ItemNotFound, "subset item not present on target surface");
  Surface inner;
  inner.kind = SurfaceKind::Negative;
  for (const auto& item : subset)
    add_item(inner, item);
  Surface wrap;
  wrap.kind = SurfaceKind::Negative;
  add_item(wrap, SurfaceItem::child(std::move(inner)));
  add_item(out, SurfaceItem::child(std::move(wrap)));
  return replace_surface(d, target, std::move(out));
}

Document apply_r4_iterate(const Document& d, std::span<const int> source, const SurfaceItem& item,
                          std::span<const int> target, const Substitution& subst) {
  const Surface& src = at(d, source);
  if (!contains_item(src, item))
    fail(CalculusErrorKind::ItemNotFound, "item to iterate not present on source surface");
  const Surface& tgt = at(d, target);
  if (target.size() < source.size() ||
      !std::equal(source.begin(), source.end(), target.begin()))
    fail(CalculusErrorKind::ContainmentViolation,
         "iteration target must be contained by the source surface");
  if (item.is_child() && target.size() > source.size()) {
    // the target may not sit inside the iterated surface itself
    auto kids = child_positions(src);
    for (size_t ordinal = 0; ordinal < kids.size(); ++ordinal) {
      if (structural_equal(src.contents[kids[ordinal]], item) &&
          target[source.size()] == static_cast<int>(ordinal))
        fail(CalculusErrorKind::ContainmentViolation,
             "cannot place a copy of a surface within itself");
    }
  }
  SurfaceItem copy = item;
  if (!subst.empty()) {
    if (!item.is_child())
      fail(CalculusErrorKind::InvalidSubstitution, "substitution applies to surface items only");
    for (const auto& [label, term] : subst) {
      (void)term;
      if (std::find(item.child().graffiti.begin(), item.child().graffiti.end(), label) ==
          item.child().graffiti.end())
        fail(CalculusErrorKind::InvalidSubstitution,
             "substitution may bind only the copied surface's graffiti");
    }
    copy = SurfaceItem::child(instantiate(item.child(), subst, true));
  }
  if (tgt.kind == SurfaceKind::Query && copy.is_child())
    fail(CalculusErrorKind::ContainmentViolation, "query surface may not hold nested surfaces");
  Surface out = tgt;
  add_item(out, std::move(copy));
  return replace_surface(d, target, std::move(out));
}

Document apply_r4_deiterate(const Document& d, std::span<const int> target,
                            const SurfaceItem& item, const Substitution& subst) {
  const Surface& tgt = at(d, target);
  if (!contains_item(tgt, item))
    fail(CalculusErrorKind::ItemNotFound, "item to deiterate not present on target surface");
  if (!subst.empty()) {
    for (const auto& [label, term] : subst) {
      (void)term;
      if (std::find(tgt.graffiti.begin(), tgt.graffiti.end(), label) == tgt.graffiti.end())
        fail(CalculusErrorKind::InvalidSubstitution,
             "substitution may bind only the target surface's graffiti");
    }
    if (parity(d, target) != 1)
      fail(CalculusErrorKind::ParityViolation,
           "wildcard binding requires the target surface at parity 1");
  }
  SurfaceItem needle = substitute(subst, item);
  auto chain = surface_chain(d, target);
  bool justified = false;
  for (size_t i = 0; i + 1 < chain.size() && !justified; ++i)
    for (const auto& candidate : chain[i]->contents)
      if (alpha_iso_item(needle, candidate)) {
        justified = true;
        break;
      }
  if (!justified)
    fail(CalculusErrorKind::NoAncestorCopy, "no ancestor copy of the deiterated item");
  Surface out = subst.empty() ? tgt : instantiate(tgt, subst, false);
  if (!remove_item(out, needle))
    fail(CalculusErrorKind::ItemNotFound, "instantiated item vanished from target");
  return replace_surface(d, target, std::move(out));
}

Document apply_rule(const Document& d, const RuleApplication& step) {
  switch (step.rule) {
  case RuleKind::R1Insert:
    if (step.items.size() != 1)
      fail(CalculusErrorKind::ItemNotFound, "R1 takes exactly one item");
    return apply_r1_insert(d, step.target, step.items[0]);
  case RuleKind::R2Erase:
    if (step.items.size() != 1)
      fail(CalculusErrorKind::ItemNotFound, "R2 takes exactly one item");
    return apply_r2_erase(d, step.target, step.items[0]);
  case RuleKind::R3RemoveDoubleCut:
    return apply_r3_remove_double_cut(d, step.target, step.subst);
  case RuleKind::R3InsertDoubleCut:
    return apply_r3_insert_double_cut(d, step.target, step.items);
  case RuleKind::R4Iterate:
    if (step.items.size() != 1)
      fail(CalculusErrorKind::ItemNotFound, "R4 iterate takes exactly one item");
    return apply_r4_iterate(d, step.source, step.items[0], step.target, step.subst);
  case RuleKind::R4Deiterate:
    if (step.items.size() != 1)
      fail(CalculusErrorKind::ItemNotFound, "R4 deiterate takes exactly one item");
    return apply_r4_deiterate(d, step.target, step.items[0], step.subst);
  }
  fail(CalculusErrorKind::Address, "unknown rule");
}

std::optional<Substitution> unify_item(const SurfaceItem& pattern, const SurfaceItem& fact,
                                       const std::set<std::string>& universals,
                                       const Substitution& s0) {
  Surface wrap_p, wrap_f;
  add_item(wrap_p, pattern);
  add_item(wrap_f, fact);
  return match_surfaces(wrap_p, wrap_f, universals, s0);
}

// ------------------------------------------------------------------ saturation

namespace {

struct Instance {
  Substitution theta;
  std::vector<SurfaceItem> matched;  // premises in rule-surface content order
  std::vector<SurfaceItem> residual; // unmatched negative children
};

bool contains_query(const Surface& s) {
  for (const auto& item : s.contents)
    if (item.is_child() &&
        (item.child().kind == SurfaceKind::Query || contains_query(item.child())))
      return true;
  return false;
}

// Enumerates rule instances: every fact premise must match a root fact;
// negative-child premises match root negative items where possible and fall
// into the residual otherwise.
void enumerate_instances(const Surface& rule, const Surface& root, std::vector<Instance>& out,
                         size_t& budget) {
  std::set<std::string> universals(rule.graffiti.begin(), rule.graffiti.end());
  std::vector<const SurfaceItem*> fact_premises, child_premises;
  for (const auto& item : rule.contents)
    (item.is_fact() ? fact_premises : child_premises).push_back(&item);
  std::vector<const SurfaceItem*> root_facts, root_negatives;
  for (const auto& item : root.contents) {
    if (item.is_fact())
      root_facts.push_back(&item);
    else if (item.child().kind == SurfaceKind::Negative)
      root_negatives.push_back(&item);
  }

  std::set<std::string> seen;
  std::function<void(size_t, const Substitution&, std::vector<const SurfaceItem*>,
                     std::vector<const SurfaceItem*>)>
      match_children = [&](size_t j, const Substitution& theta,
                           std::vector<const SurfaceItem*> matched,
                           std::vector<const SurfaceItem*> residual) {
        if (budget == 0)
          return;
        --budget;
        if (j == child_premises.size()) {
          Instance inst;
          inst.theta = theta;
          for (const auto& item : rule.contents) {
            bool is_matched =
                item.is_fact() ||
                std::find(matched.begin(), matched.end(), &item) != matched.end();
            if (is_matched)
              inst.matched.push_back(item);
            else
              inst.residual.push_back(item);
          }
          std::string key = canonical_key(theta);
          for (const auto& r : inst.residual)
            key += "|" + canonical_key(r);
          if (seen.insert(key).second)
            out.push_back(std::move(inst));
          return;
        }
        bool any = false;
        for (const SurfaceItem* candidate : root_negatives) {
          auto extended = unify_item(*child_premises[j], *candidate, universals, theta);
          if (extended) {
            any = true;
            auto m = matched;
            m.push_back(child_premises[j]);
            match_children(j + 1, *extended, std::move(m), residual);
          }
        }
        if (!any) {
          auto r = residual;
          r.push_back(child_premises[j]);
          match_children(j + 1, theta, matched, std::move(r));
        }
      };

  std::function<void(size_t, const Substitution&)> match_facts =
      [&](size_t i, const Substitution& theta) {
        if (budget == 0)
          return;
        --budget;
        if (i == fact_premises.size()) {
          match_children(0, theta, {}, {});
          return;
        }
        for (const SurfaceItem* candidate : root_facts) {
          auto extended = unify_item(*fact_premises[i], *candidate, universals, theta);
          if (extended)
            match_facts(i + 1, *extended);
        }
      };

  match_facts(0, {});
}

} // namespace

SaturationResult saturate(const Document& d, const Limits& limits, FreshLabelSource& fresh) {
  SaturationResult result;
  result.doc = d;
  if (nesting_depth(d.root) > static_cast<size_t>(limits.max_depth)) {
    result.outcome = SaturationOutcome::LimitExceeded;
    return result;
  }
  fresh.reserve_all(d);

  std::set<std::string> fired;
  int steps_used = 0;
  int witnesses_minted = 0;
  bool limited = false;

  auto emit = [&](RuleApplication step) -> bool {
    if (steps_used >= limits.max_iterations) {
      limited = true;
      return false;
    }
    ++steps_used;
    result.doc = apply_rule(result.doc, step);
    result.trace.steps.push_back(std::move(step));
    return true;
  };

  bool changed = true;
  while (changed && !limited && result.outcome == SaturationOutcome::Completed) {
    changed = false;
    size_t round_children = child_count(result.doc.root);
    for (size_t ci = 0; ci < round_children && !limited; ++ci) {
      std::vector<int> rule_path{static_cast<int>(ci)};
      const Surface rule = surface_at(result.doc, rule_path); // value copy, doc mutates
      if (rule.kind != SurfaceKind::Negative || contains_query(rule))
        continue;

      std::vector<Instance> instances;
      size_t budget = 100000;
      enumerate_instances(rule, result.doc.root, instances, budget);
      if (budget == 0) {
        limited = true;
        break;
      }

      std::string rule_key = canonical_key(rule);
      for (const auto& inst : instances) {
        std::string key = rule_key + "#" + canonical_key(inst.theta);
        for (const auto& r : inst.residual)
          key += "|" + canonical_key(r);
        if (fired.count(key))
          continue;

        // Classify before emitting anything.
        enum class Mode { Fuse, Splice, Narrow } mode;
        const Surface* conclusion = nullptr;
        if (inst.residual.empty()) {
          mode = Mode::Fuse;
        } else if (inst.residual.size() == 1 && inst.residual[0].is_child()) {
          conclusion = &inst.residual[0].child();
          bool covered = true;
          for (const auto& g : rule.graffiti) {
            bool redeclared = std::find(conclusion->graffiti.begin(), conclusion->graffiti.end(),
                                        g) != conclusion->graffiti.end();
            if (!inst.theta.count(g) && !redeclared && binds_into(g, *conclusion)) {
              covered = false;
              break;
            }
          }
          mode = covered ? Mode::Splice : Mode::Narrow;
        } else {
          mode = Mode::Narrow;
        }

        // The instantiated copy the scaffold will iterate (an exact copy when
        // theta is empty, mirroring R4I semantics). Premises that collapse
        // under theta discharge as a single item; items equal to a residual
        // stay put.
        Surface copy = inst.theta.empty() ? rule : instantiate(rule, inst.theta, true);
        std::vector<SurfaceItem> kept;
        for (const auto& residual : inst.residual)
          kept.push_back(substitute(inst.theta, residual));
        std::vector<SurfaceItem> needles;
        for (const auto& item : copy.contents) {
          bool keep = false;
          for (const auto& k : kept)
            keep = keep || structural_equal(item, k);
          if (!keep)
            needles.push_back(item);
        }

        std::vector<SurfaceItem> produced;
        Substitution witness_rename;
        if (mode == Mode::Splice) {
          // witnesses are keyed by the substituted conclusion's own labels
          const Surface& grounded = kept[0].child();
          if (witnesses_minted + static_cast<int>(grounded.graffiti.size()) >
              limits.max_fresh_blanks) {
            limited = true;
            break;
          }
          for (const auto& g : grounded.graffiti) {
            std::string w = fresh.next();
            ++witnesses_minted;
            witness_rename.insert_or_assign(g, Term::blank(w));
          }
          for (const auto& item : grounded.contents)
            produced.push_back(substitute(witness_rename, item));
          bool all_present = std::all_of(produced.begin(), produced.end(), [&](const auto& it) {
            return contains_item(result.doc.root, it);
          });
          if (all_present) {
            fired.insert(key);
            continue;
          }
        } else if (mode == Mode::Narrow) {
          Surface narrowed = copy;
          for (const auto& needle : needles)
            remove_item(narrowed, needle);
          SurfaceItem narrowed_item = SurfaceItem::child(std::move(narrowed));
          if (contains_item(result.doc.root, narrowed_item)) {
            fired.insert(key);
            continue;
          }
          produced.push_back(std::move(narrowed_item));
        }
        fired.insert(key);
        changed = true;

        if (!emit({RuleKind::R3InsertDoubleCut, {}, {}, {}, {}}))
          break;
        // Locate the wrap: appended last, unless an equal empty double cut
        // already sat on the root and the set-insert collapsed into it.
        Surface empty_wrap;
        empty_wrap.kind = SurfaceKind::Negative;
        add_item(empty_wrap, SurfaceItem::child(
                                 make_surface(SurfaceKind::Negative, {}, {})));
        SurfaceItem wrap_item = SurfaceItem::child(std::move(empty_wrap));
        int w = -1;
        {
          auto kids = child_positions(result.doc.root);
          for (size_t j = kids.size(); j-- > 0;) {
            if (structural_equal(result.doc.root.contents[kids[j]], wrap_item)) {
              w = static_cast<int>(j);
              break;
            }
          }
        }
        if (w < 0) {
          limited = true; // unreachable; guards path arithmetic
          break;
        }
        if (!emit({RuleKind::R4Iterate, {w, 0}, {SurfaceItem::child(rule)}, {}, inst.theta}))
          break;
        std::vector<int> copy_path{w, 0, 0};
        bool aborted = false;
        for (const auto& needle : needles) {
          if (!emit({RuleKind::R4Deiterate, copy_path, {needle}, {}, {}})) {
            aborted = true;
            break;
          }
        }
        if (aborted)
          break;

        if (mode == Mode::Fuse) {
          result.trace.fuse =
              FuseReport{copy_path, inst.theta,
                         result.trace.steps.empty() ? 0 : result.trace.steps.size() - 1};
          result.outcome = SaturationOutcome::Fused;
          break;
        }
        if (mode == Mode::Splice) {
          if (!emit({RuleKind::R3RemoveDoubleCut, copy_path, {}, {}, witness_rename}))
            break;
          if (!emit({RuleKind::R3RemoveDoubleCut, {w}, {}, {}, {}}))
            break;
        } else {
          if (!emit({RuleKind::R3RemoveDoubleCut, {w}, {}, {}, {}}))
            break;
        }
        for (auto& item : produced)
          result.trace.produced.push_back(std::move(item));
      }
      if (result.outcome == SaturationOutcome::Fused)
        break;
    }
  }
  if (limited)
    result.outcome = SaturationOutcome::LimitExceeded;
  return result;
}

std::optional<FuseReport> detect_fuse(const Document& d, const Limits& limits) {
  FreshLabelSource fresh;
  SaturationResult result = saturate(d, limits, fresh);
  switch (result.outcome) {
  case SaturationOutcome::Fused:
    return result.trace.fuse;
  case SaturationOutcome::Completed:
    return std::nullopt;
  case SaturationOutcome::LimitExceeded:
    throw LimitExceededError("saturation limit exceeded", std::move(result.trace));
  }
  return std::nullopt;
}

ProofCheck check_proof(const Document& d, const std::vector<RuleApplication>& steps) {
  ProofCheck out;
  out.final_doc = d;
  for (size_t i = 0; i < steps.size(); ++i) {
    try {
      out.final_doc = apply_rule(out.final_doc, steps[i]);
    } catch (const CalculusError&) {
      out.ok = false;
      out.failed_step = i;
      return out;
    } catch (const AddressError&) {
      out.ok = false;
      out.failed_step = i;
      return out;
    } catch (const std::invalid_argument&) {
      out.ok = false;
      out.failed_step = i;
      return out;
    }
  }
  return out;
}

// ------------------------------------------------------------------ script I/O

std::string format_path(std::span<const int> path) {
  if (path.empty())
    return "/";
  std::string out;
  for (int p : path)
    out += "/" + std::to_string(p);
  return out;
}

std::string format_item(const SurfaceItem& item, const PrefixMap& prefixes) {
  if (item.is_fact())
    return render_triple_n3s(item.fact(), prefixes);
  const Surface& s = item.child();
  std::string out = "(";
  for (const auto& g : s.graffiti)
    out += " _:" + g;
  out += s.graffiti.empty() ? ")" : " )";
  out += s.kind == SurfaceKind::Query ? " log:onQuerySurface {" : " log:onNegativeSurface {";
  for (const auto& sub : s.contents)
    out += " " + format_item(sub, prefixes);
  out += " } .";
  return out;
}

std::string format_substitution(const Substitution& s, const PrefixMap& prefixes) {
  std::string out = "{";
  bool first = true;
  for (const auto& [label, term] : s) {
    if (!first)
      out += ", ";
    first = false;
    out += label + "=" + render_term_n3s(term, prefixes);
  }
  return out + "}";
}

std::string format_rule_application(const RuleApplication& step, const PrefixMap& prefixes) {
  std::string out(to_string(step.rule));
  if (step.rule == RuleKind::R4Iterate)
    out += " " + format_path(step.source);
  out += " " + format_path(step.target);
  for (const auto& item : step.items)
    out += " " + format_item(item, prefixes);
  if (!step.subst.empty())
    out += " " + format_substitution(step.subst, prefixes);
  return out;
}

std::string format_trace(const DerivationTrace& trace, const PrefixMap& prefixes) {
  std::string out;
  for (const auto& step : trace.steps)
    out += format_rule_application(step, prefixes) + "\n";
  if (trace.fuse)
    out += "# fuse at " + format_path(trace.fuse->surface_path) + " " +
           format_substitution(trace.fuse->subst, prefixes) + " step " +
           std::to_string(trace.fuse->trace_index) + "\n";
  return out;
}

namespace {

[[noreturn]] void script_fail(size_t line_no, const std::string& msg) {
  throw ParseError(ParseErrorKind::SyntaxError, SourceSpan{static_cast<int>(line_no), 1, 0},
                   "proof script: " + msg);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  char quote = 0;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_string) {
      if (c == '\\')
        ++i;
      else if (c == quote)
        in_string = false;
    } else if (c == '"' || c == '\'') {
      in_string = true;
      quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<int> parse_path(const std::string& token, size_t line_no) {
  if (token.empty() || token[0] != '/')
    script_fail(line_no, "expected a /path, got '" + token + "'");
  std::vector<int> path;
  size_t i = 1;
  while (i < token.size()) {
    size_t j = token.find('/', i);
    std::string part = token.substr(i, j == std::string::npos ? std::string::npos : j - i);
    if (part.empty())
      script_fail(line_no, "empty path component");
    try {
      path.push_back(std::stoi(part));
    } catch (...) {
      script_fail(line_no, "bad path component '" + part + "'");
    }
    if (j == std::string::npos)
      break;
    i = j + 1;
  }
  return path;
}

Substitution parse_subst_block(const std::string& block, const PrefixMap& prefixes,
                               size_t line_no) {
  Substitution out;
  std::string body = trim(block.substr(1, block.size() - 2));
  if (body.empty())
    return out;
  // split on top-level commas (terms never contain commas outside strings)
  std::vector<std::string> pairs;
  bool in_string = false;
  char quote = 0;
  size_t start = 0;
  for (size_t i = 0; i <= body.size(); ++i) {
    if (i == body.size() || (!in_string && body[i] == ',')) {
      pairs.push_back(body.substr(start, i - start));
      start = i + 1;
      continue;
    }
    char c = body[i];
    if (in_string) {
      if (c == '\\')
        ++i;
      else if (c == quote)
        in_string = false;
    } else if (c == '"' || c == '\'') {
      in_string = true;
      quote = c;
    }
  }
  for (const auto& pair : pairs) {
    auto eq = pair.find('=');
    if (eq == std::string::npos)
      script_fail(line_no, "substitution pair missing '='");
    std::string label = trim(pair.substr(0, eq));
    if (label.rfind("_:", 0) == 0)
      label = label.substr(2);
    if (label.empty())
      script_fail(line_no, "empty substitution label");
    std::string term_text = trim(pair.substr(eq + 1));
    try {
      out.emplace(label, parse_term_n3s(term_text, prefixes));
    } catch (const ParseError& e) {
      script_fail(line_no, "bad substitution term '" + term_text + "': " + e.message());
    }
  }
  return out;
}

} // namespace

std::vector<RuleApplication> parse_proof_script(std::string_view text, const PrefixMap& prefixes) {
  std::vector<RuleApplication> steps;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string line(text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                    : eol - pos));
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty())
      continue;

    auto space = line.find_first_of(" \t");
    std::string op = line.substr(0, space);
    std::string rest = space == std::string::npos ? "" : trim(line.substr(space + 1));

    RuleApplication step;
    if (op == "R1I")
      step.rule = RuleKind::R1Insert;
    else if (op == "R2E")
      step.rule = RuleKind::R2Erase;
    else if (op == "R3R")
      step.rule = RuleKind::R3RemoveDoubleCut;
    else if (op == "R3I")
      step.rule = RuleKind::R3InsertDoubleCut;
    else if (op == "R4I")
      step.rule = RuleKind::R4Iterate;
    else if (op == "R4D")
      step.rule = RuleKind::R4Deiterate;
    else
      script_fail(line_no, "unknown rule mnemonic '" + op + "'");

    auto take_token = [&]() {
      auto sp = rest.find_first_of(" \t");
      std::string token = rest.substr(0, sp);
      rest = sp == std::string::npos ? "" : trim(rest.substr(sp + 1));
      return token;
    };

    if (step.rule == RuleKind::R4Iterate) {
      step.source = parse_path(take_token(), line_no);
      step.target = parse_path(take_token(), line_no);
    } else {
      step.target = parse_path(take_token(), line_no);
    }

    // A trailing {...} block is the substitution; statements end with '.'.
    std::string subst_text;
    if (!rest.empty() && rest.back() == '}' && rest.find('=') != std::string::npos) {
      size_t open = rest.rfind('{');
      if (open == std::string::npos)
        script_fail(line_no, "unbalanced substitution braces");
      std::string candidate = rest.substr(open);
      // graph terms also end in '}', but they are always followed by ' .'
      if (candidate.find('=') != std::string::npos) {
        subst_text = candidate;
        rest = trim(rest.substr(0, open));
      }
    }
    if (!subst_text.empty())
      step.subst = parse_subst_block(subst_text, prefixes, line_no);

    if (!rest.empty()) {
      try {
        step.items = parse_items_n3s(rest, prefixes);
      } catch (const ParseError& e) {
        script_fail(line_no, "bad item: " + e.message());
      }
    }

    bool needs_one = step.rule == RuleKind::R1Insert || step.rule == RuleKind::R2Erase ||
                     step.rule == RuleKind::R4Iterate || step.rule == RuleKind::R4Deiterate;
    if (needs_one && step.items.size() != 1)
      script_fail(line_no, std::string(to_string(step.rule)) + " takes exactly one item");
    if (step.rule == RuleKind::R3RemoveDoubleCut && !step.items.empty())
      script_fail(line_no, "R3R takes no items");
    steps.push_back(std::move(step));
  }
  return steps;
}

} // namespace n3s
