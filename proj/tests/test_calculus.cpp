#include <doctest.h>

#include <functional>

#include "n3s/calculus.hpp"
#include "n3s/parser.hpp"
#include "n3s/query.hpp"
#include "support/fixtures.hpp"

using namespace n3s;
using testsupport::ex;
using testsupport::parse_fixture;
using testsupport::prepared_fixture;

namespace {

SurfaceItem fact(const Term& s, const Term& p, const Term& o) {
  return SurfaceItem::fact(Triple(s, p, o));
}

CalculusErrorKind error_kind(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const CalculusError& e) {
    return e.kind();
  }
  FAIL("expected CalculusError");
  return CalculusErrorKind::Address;
}

// root { A, B, Neg{ A, Neg{ C } } } with marker triples, as in Fig 4.3/4.4
Document fig_4_3() {
  Term marker = ex("holds");
  auto prop = [&](const char* name) { return fact(ex(name), marker, ex(name)); };
  Surface inner = make_surface(SurfaceKind::Negative, {}, {prop("C")});
  Surface outer =
      make_surface(SurfaceKind::Negative, {}, {prop("A"), SurfaceItem::child(inner)});
  Document d;
  d.prefixes.set("", "https://example.org/ns#");
  d.root = make_surface(SurfaceKind::Positive, {},
                        {prop("A"), prop("B"), SurfaceItem::child(outer)});
  return d;
}

std::vector<Triple> derived_facts(const SaturationResult& sat) {
  std::vector<Triple> out;
  for (const auto& item : sat.trace.produced)
    if (item.is_fact())
      out.push_back(item.fact());
  return out;
}

} // namespace

TEST_CASE("unify_item binds universals against ground facts") {
  SurfaceItem pattern = fact(Term::blank("A"), ex("indexed"), Term::blank("B"));
  SurfaceItem ground = fact(ex("WOS"), ex("indexed"), ex("JournalA"));
  auto theta = unify_item(pattern, ground, {"A", "B"});
  REQUIRE(theta.has_value());
  CHECK(theta->at("A") == ex("WOS"));
  CHECK(theta->at("B") == ex("JournalA"));

  SurfaceItem exact = fact(ex("X"), ex("p"), ex("o"));
  auto empty = unify_item(exact, exact, {});
  REQUIRE(empty.has_value());
  CHECK(empty->empty());

  SurfaceItem twice = fact(Term::blank("A"), ex("p"), Term::blank("A"));
  SurfaceItem mismatched = fact(ex("a"), ex("p"), ex("b"));
  CHECK_FALSE(unify_item(twice, mismatched, {"A"}).has_value());
}

TEST_CASE("unify_item matches nested surfaces isomorphically") {
  // (_:Z){ _:Z :p _:X } against (_:W){ _:W :p :o } binds X, bijects Z/W
  SurfaceItem pattern = SurfaceItem::child(make_surface(
      SurfaceKind::Negative, {"Z"}, {fact(Term::blank("Z"), ex("p"), Term::blank("X"))}));
  SurfaceItem target = SurfaceItem::child(make_surface(
      SurfaceKind::Negative, {"W"}, {fact(Term::blank("W"), ex("p"), ex("o"))}));
  auto theta = unify_item(pattern, target, {"X"});
  REQUIRE(theta.has_value());
  CHECK(theta->at("X") == ex("o"));

  // a universal may not capture a bound label of the target
  SurfaceItem capture = SurfaceItem::child(make_surface(
      SurfaceKind::Negative, {"W"}, {fact(Term::blank("W"), ex("p"), Term::blank("W"))}));
  CHECK_FALSE(unify_item(pattern, capture, {"X"}).has_value());
}

TEST_CASE("R1 inserts only at parity 1") {
  Document d = fig_4_3();
  std::vector<int> outer{0};
  Document after = apply_r1_insert(d, outer, fact(ex("B"), ex("holds"), ex("B")));
  CHECK(surface_at(after, outer).contents.size() == 3);

  CHECK(error_kind([&] { apply_r1_insert(d, std::vector<int>{}, fact(ex("Z"), ex("holds"), ex("Z"))); }) ==
        CalculusErrorKind::ParityViolation);

  // duplicate insert leaves the document unchanged
  Document same = apply_r1_insert(d, outer, fact(ex("A"), ex("holds"), ex("A")));
  CHECK(structural_equal(same.root, d.root));
}

TEST_CASE("R2 erases only at parity 0") {
  Document d = fig_4_3();
  Document after = apply_r2_erase(d, std::vector<int>{}, fact(ex("B"), ex("holds"), ex("B")));
  CHECK(after.root.contents.size() == 2); // A ∧ ¬(A ∧ ¬C)

  CHECK(error_kind([&] {
          apply_r2_erase(d, std::vector<int>{0}, fact(ex("A"), ex("holds"), ex("A")));
        }) == CalculusErrorKind::ParityViolation);
  CHECK(error_kind([&] {
          apply_r2_erase(d, std::vector<int>{}, fact(ex("Z"), ex("holds"), ex("Z")));
        }) == CalculusErrorKind::ItemNotFound);
}

TEST_CASE("R3 removal turns a double cut into its interior") {
  // A ∧ B ∧ ¬(¬C)  ⊢  A ∧ B ∧ C
  Term marker = ex("holds");
  auto prop = [&](const char* name) { return fact(ex(name), marker, ex(name)); };
  Surface inner = make_surface(SurfaceKind::Negative, {}, {prop("C")});
  Surface outer = make_surface(SurfaceKind::Negative, {}, {SurfaceItem::child(inner)});
  Document d;
  d.root = make_surface(SurfaceKind::Positive, {},
                        {prop("A"), prop("B"), SurfaceItem::child(outer)});
  Document after = apply_r3_remove_double_cut(d, std::vector<int>{0});
  CHECK(after.root.contents.size() == 3);
  CHECK(contains_item(after.root, prop("C")));
  CHECK(child_positions(after.root).empty());

  // nonempty outer region is not a double cut
  Document bad = fig_4_3();
  CHECK(error_kind([&] { apply_r3_remove_double_cut(bad, std::vector<int>{0}); }) ==
        CalculusErrorKind::NotADoubleCut);

  // inner graffiti join the parent
  Surface inner_g = make_surface(SurfaceKind::Negative, {"C"},
                                 {fact(Term::blank("C"), ex("accredit"), ex("JournalA"))});
  Surface outer_g = make_surface(SurfaceKind::Negative, {}, {SurfaceItem::child(inner_g)});
  Document dg;
  dg.root = make_surface(SurfaceKind::Positive, {}, {SurfaceItem::child(outer_g)});
  Document after_g = apply_r3_remove_double_cut(dg, std::vector<int>{0});
  CHECK(after_g.root.graffiti == std::vector<std::string>{"C"});
  CHECK(contains_item(after_g.root, fact(Term::blank("C"), ex("accredit"), ex("JournalA"))));
}

TEST_CASE("R3 insertion wraps a subset and inverts removal") {
  Document d = fig_4_3();
  std::vector<SurfaceItem> subset{fact(ex("A"), ex("holds"), ex("A")),
                                  fact(ex("B"), ex("holds"), ex("B"))};
  Document wrapped = apply_r3_insert_double_cut(d, std::vector<int>{}, subset);
  CHECK(wrapped.root.contents.size() == 2); // remaining child + the wrap
  // the wrap is appended after the existing child
  Document restored = apply_r3_remove_double_cut(wrapped, std::vector<int>{1});
  CHECK(structural_equal(restored.root, d.root));

  Document with_empty = apply_r3_insert_double_cut(d, std::vector<int>{}, {});
  CHECK(child_positions(with_empty.root).size() == 2);
  const Surface& wrap = surface_at(with_empty, std::vector<int>{1});
  CHECK(wrap.kind == SurfaceKind::Negative);
  REQUIRE(wrap.contents.size() == 1);
  CHECK(wrap.contents[0].child().contents.empty());

  CHECK(error_kind([&] {
          apply_r3_insert_double_cut(d, std::vector<int>{},
                                     {fact(ex("Z"), ex("holds"), ex("Z"))});
        }) == CalculusErrorKind::ItemNotFound);
}

TEST_CASE("R4 iteration copies into contained surfaces only") {
  Document d = fig_4_3();
  SurfaceItem b = fact(ex("B"), ex("holds"), ex("B"));
  Document after = apply_r4_iterate(d, std::vector<int>{}, b, std::vector<int>{0});
  CHECK(contains_item(surface_at(after, std::vector<int>{0}), b));

  // iterating a surface into itself is forbidden
  SurfaceItem outer_item = d.root.contents[2];
  CHECK(error_kind([&] {
          apply_r4_iterate(d, std::vector<int>{}, outer_item, std::vector<int>{0});
        }) == CalculusErrorKind::ContainmentViolation);

  // target must be inside the source
  Document two = d;
  add_item(two.root, SurfaceItem::child(make_surface(SurfaceKind::Negative, {}, {})));
  CHECK(error_kind([&] {
          apply_r4_iterate(two, std::vector<int>{0}, fact(ex("A"), ex("holds"), ex("A")),
                           std::vector<int>{1});
        }) == CalculusErrorKind::ContainmentViolation);

  // iterate then deiterate the same item is the identity
  Document back = apply_r4_deiterate(after, std::vector<int>{0}, b);
  CHECK(structural_equal(back.root, d.root));
}

TEST_CASE("R4 deiteration needs an ancestor copy") {
  Document d = fig_4_3();
  SurfaceItem a = fact(ex("A"), ex("holds"), ex("A"));
  Document after = apply_r4_deiterate(d, std::vector<int>{0}, a);
  CHECK_FALSE(contains_item(surface_at(after, std::vector<int>{0}), a));
  // result is A ∧ B ∧ ¬(¬C): the double cut of the §4.4 deduction
  Document final_doc = apply_r3_remove_double_cut(after, std::vector<int>{0});
  CHECK(contains_item(final_doc.root, fact(ex("C"), ex("holds"), ex("C"))));

  CHECK(error_kind([&] {
          apply_r4_deiterate(d, std::vector<int>{0, 0}, fact(ex("C"), ex("holds"), ex("C")));
        }) == CalculusErrorKind::NoAncestorCopy);
}

TEST_CASE("R4 deiteration with a wildcard binding reproduces the section 5 deduction") {
  Document d = prepared_fixture("listing_5_1.n3s");
  SurfaceItem pattern = fact(Term::blank("A"), ex("indexed"), Term::blank("B"));
  Substitution theta{{"A", ex("WOS")}, {"B", ex("JournalA")}};
  Document step1 = apply_r4_deiterate(d, std::vector<int>{0}, pattern, theta);

  // this leaves us with a double cut
  const Surface& s = surface_at(step1, std::vector<int>{0});
  CHECK(s.graffiti.empty());
  REQUIRE(s.contents.size() == 1);
  REQUIRE(s.contents[0].is_child());

  Document step2 = apply_r3_remove_double_cut(step1, std::vector<int>{0});
  // a graffiti node labeled _:C lands on the default positive surface
  CHECK(step2.root.graffiti == std::vector<std::string>{"C"});
  CHECK(contains_item(step2.root, fact(Term::blank("C"), ex("accredit"), ex("JournalA"))));

  // binding labels outside the target's graffiti is rejected
  CHECK(error_kind([&] {
          apply_r4_deiterate(d, std::vector<int>{0}, pattern, Substitution{{"Q", ex("X")}});
        }) == CalculusErrorKind::InvalidSubstitution);
}

TEST_CASE("R4 deiteration removes a matched disjunct surface") {
  Document rules = parse_fixture("listing_5_4_disjunction_data.n3s");
  Document negation = parse_fixture("listing_5_4_negation.n3s");
  FreshLabelSource merge_fresh("m");
  Document kb = merge_documents(rules, negation, merge_fresh);
  // the rule surface holds the (){ _:X a :JournalArticle } disjunct
  const Surface& rule = surface_at(kb, std::vector<int>{0});
  REQUIRE(rule.graffiti.size() == 1);
  const std::string& x = rule.graffiti[0];
  SurfaceItem disjunct = SurfaceItem::child(make_surface(
      SurfaceKind::Negative, {},
      {fact(Term::blank(x), testsupport::rdf_type(), ex("JournalArticle"))}));
  REQUIRE(contains_item(rule, disjunct));
  Substitution theta{{x, ex("MyArticle")}};
  Document after = apply_r4_deiterate(kb, std::vector<int>{0}, disjunct, theta);
  const Surface& remaining = surface_at(after, std::vector<int>{0});
  CHECK(remaining.graffiti.empty());   // the wildcard was discharged
  CHECK(remaining.contents.size() == 1); // only the other disjunct remains
}

TEST_CASE("saturation derives the section 5/6 accreditation witness") {
  Document d = prepared_fixture("listing_5_1.n3s");
  FreshLabelSource fresh;
  SaturationResult sat = saturate(d, Limits{}, fresh);
  CHECK(sat.outcome == SaturationOutcome::Completed);
  auto facts = derived_facts(sat);
  REQUIRE(facts.size() == 1);
  CHECK(facts[0].subject == Term::blank("e1"));
  CHECK(facts[0].predicate == ex("accredit"));
  CHECK(facts[0].object == ex("JournalA"));
  CHECK(contains_item(sat.doc.root, SurfaceItem::fact(facts[0])));
  // the rule surface is still available afterwards
  CHECK(child_positions(sat.doc.root).size() == 1);

  // trace replays from the start document to the saturated one
  ProofCheck replay = check_proof(d, sat.trace.steps);
  CHECK(replay.ok);
  CHECK(structural_equal(replay.final_doc.root, sat.doc.root));
}

TEST_CASE("saturation handles the disjunction elimination of section 5.4") {
  Document rules = parse_fixture("listing_5_4_disjunction_data.n3s");
  Document negation = parse_fixture("listing_5_4_negation.n3s");
  FreshLabelSource merge_fresh("m");
  Document kb = merge_documents(rules, negation, merge_fresh);
  FreshLabelSource fresh;
  SaturationResult sat = saturate(kb, Limits{}, fresh);
  CHECK(sat.outcome == SaturationOutcome::Completed);
  auto facts = derived_facts(sat);
  REQUIRE(facts.size() == 2);
  CHECK(facts[0] == Triple(ex("MyArticle"), testsupport::rdf_type(), ex("Preprint")));
  CHECK(facts[1].predicate == ex("reviewed"));
  CHECK(facts[1].subject.is_blank());
  CHECK(facts[1].object == ex("MyArticle"));

  ProofCheck replay = check_proof(kb, sat.trace.steps);
  CHECK(replay.ok);
  CHECK(structural_equal(replay.final_doc.root, sat.doc.root));
}

TEST_CASE("spliced disjunctions chain across saturation rounds") {
  // publication rule: anything that is a publication is a journal or a book;
  // with "not a journal" asserted, two rounds conclude it is a book.
  Document rules = parse_fixture("listing_5_4_disjunction_consequent.n3s");
  Document data = parse_document(
      "@prefix : <https://example.org/ns#> .\n"
      "@prefix log: <http://www.w3.org/2000/10/swap/log#> .\n"
      ":MyPub a :Publication .\n"
      "() log:onNegativeSurface { :MyPub a :Journal . } .\n");
  FreshLabelSource merge_fresh("m");
  Document kb = merge_documents(rules, data, merge_fresh);
  FreshLabelSource fresh;
  SaturationResult sat = saturate(kb, Limits{}, fresh);
  CHECK(sat.outcome == SaturationOutcome::Completed);
  CHECK(contains_item(sat.doc.root,
                      fact(ex("MyPub"), testsupport::rdf_type(), ex("Book"))));

  ProofCheck replay = check_proof(kb, sat.trace.steps);
  CHECK(replay.ok);
  CHECK(structural_equal(replay.final_doc.root, sat.doc.root));
}

TEST_CASE("a negative surface is not negation as failure") {
  Document d = prepared_fixture("listing_5_3_nonaf.n3s");
  FreshLabelSource fresh;
  SaturationResult sat = saturate(d, Limits{}, fresh);
  CHECK(sat.outcome == SaturationOutcome::Completed);
  CHECK(derived_facts(sat).empty());
  CHECK_FALSE(sat.trace.fuse.has_value());
  CHECK_FALSE(contains_item(sat.doc.root, fact(ex("Surface"), ex("is"), ex("JournalLess"))));
}

TEST_CASE("detect_fuse flags direct contradictions") {
  Document d = parse_document("@prefix : <urn:p:> .\n"
                              "@prefix log: <http://www.w3.org/2000/10/swap/log#> .\n"
                              ":a :p :b .\n"
                              "() log:onNegativeSurface { :a :p :b . } .\n");
  auto fuse = detect_fuse(d);
  REQUIRE(fuse.has_value());
  CHECK(fuse->subst.empty());

  // an empty negative surface alone is already a contradiction
  Document empty_cut = parse_document("@prefix log: <http://www.w3.org/2000/10/swap/log#> .\n"
                                      "() log:onNegativeSurface { } .\n");
  CHECK(detect_fuse(empty_cut).has_value());

  Document fine = parse_document("@prefix : <urn:p:> . :a :p :b .");
  CHECK_FALSE(detect_fuse(fine).has_value());
}

TEST_CASE("saturation stops at the iteration limit with a partial trace") {
  Document d = prepared_fixture("looping.n3s");
  FreshLabelSource fresh;
  Limits tight;
  tight.max_iterations = 40;
  SaturationResult sat = saturate(d, tight, fresh);
  CHECK(sat.outcome == SaturationOutcome::LimitExceeded);
  CHECK(sat.trace.steps.size() <= 40);
  CHECK_THROWS_AS(detect_fuse(d, tight), LimitExceededError);

  Limits blank_bound;
  blank_bound.max_fresh_blanks = 3;
  FreshLabelSource fresh2;
  CHECK(saturate(d, blank_bound, fresh2).outcome == SaturationOutcome::LimitExceeded);
}

TEST_CASE("check_proof validates the two-step script and rejects the swap") {
  Document d = prepared_fixture("listing_5_1.n3s");
  std::string script =
      "R4D /0 _:A :indexed _:B . {A=:WOS, B=:JournalA}\n"
      "R3R /0\n";
  auto steps = parse_proof_script(script, d.prefixes);
  REQUIRE(steps.size() == 2);
  ProofCheck check = check_proof(d, steps);
  CHECK(check.ok);
  CHECK(contains_item(check.final_doc.root,
                      fact(Term::blank("C"), ex("accredit"), ex("JournalA"))));

  std::string swapped =
      "R3R /0\n"
      "R4D /0 _:A :indexed _:B . {A=:WOS, B=:JournalA}\n";
  ProofCheck bad = check_proof(d, parse_proof_script(swapped, d.prefixes));
  CHECK_FALSE(bad.ok);
  CHECK(bad.failed_step == 0);

  CHECK(check_proof(d, {}).ok); // empty script

  // erasing at parity 1 fails at that index
  std::string wrong_parity = "R2E /0 _:A :indexed _:B .\n";
  ProofCheck parity_check = check_proof(d, parse_proof_script(wrong_parity, d.prefixes));
  CHECK_FALSE(parity_check.ok);
  CHECK(parity_check.failed_step == 0);
}

TEST_CASE("proof scripts and traces round-trip through their text form") {
  Document d = prepared_fixture("listing_5_1.n3s");
  FreshLabelSource fresh;
  SaturationResult sat = saturate(d, Limits{}, fresh);
  std::string text = format_trace(sat.trace, d.prefixes);
  auto steps = parse_proof_script(text, d.prefixes);
  REQUIRE(steps.size() == sat.trace.steps.size());
  ProofCheck replay = check_proof(d, steps);
  CHECK(replay.ok);
  CHECK(structural_equal(replay.final_doc.root, sat.doc.root));
}

TEST_CASE("the 7.1 footnote construction: wrap, insert, deiterate") {
  // (A→C) ∧ (B→C) with a double cut drawn around the whole diagram
  Term marker = ex("holds");
  auto prop = [&](const char* name) { return fact(ex(name), marker, ex(name)); };
  auto implication = [&](const char* antecedent) {
    Surface conclusion = make_surface(SurfaceKind::Negative, {}, {prop("C")});
    return SurfaceItem::child(make_surface(
        SurfaceKind::Negative, {}, {prop(antecedent), SurfaceItem::child(conclusion)}));
  };
  Document d;
  d.root = make_surface(SurfaceKind::Positive, {}, {implication("A"), implication("B")});

  Document wrapped =
      apply_r3_insert_double_cut(d, std::vector<int>{}, {d.root.contents[0], d.root.contents[1]});
  REQUIRE(child_positions(wrapped.root).size() == 1);
  CHECK(parity(wrapped, std::vector<int>{0}) == 1);

  // R1: a new C symbol on the outer negative surface with parity 1
  Document inserted = apply_r1_insert(wrapped, std::vector<int>{0}, prop("C"));
  CHECK(contains_item(surface_at(inserted, std::vector<int>{0}), prop("C")));

  // R4: deiterate the C copies from the inner conclusion cuts (level 3)
  Document step = inserted;
  for (int rule = 0; rule < 2; ++rule)
    step = apply_r4_deiterate(step, std::vector<int>{0, 0, rule, 0}, prop("C"));
  // the conclusion cuts are now empty: the (A ∨ B) → C diagram
  CHECK(surface_at(step, std::vector<int>{0, 0, 0, 0}).contents.empty());
  CHECK(surface_at(step, std::vector<int>{0, 0, 1, 0}).contents.empty());
}
