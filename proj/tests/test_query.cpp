#include <doctest.h>

#include "n3s/oracle.hpp"
#include "n3s/parser.hpp"
#include "n3s/query.hpp"
#include "support/fixtures.hpp"

using namespace n3s;
using testsupport::ex;
using testsupport::parse_fixture;
using testsupport::prepared_fixture;

namespace {

Document merged(std::initializer_list<const char*> names) {
  FreshLabelSource fresh("m");
  Document out;
  bool first = true;
  for (const char* name : names) {
    Document d = existential_closure(parse_fixture(name));
    if (first) {
      out = std::move(d);
      first = false;
    } else {
      out = merge_documents(out, d, fresh);
    }
  }
  return out;
}

Goal make_goal(const std::string& turtle) {
  return goal_from_document(parse_document(turtle));
}

const std::string prelude = "@prefix : <https://example.org/ns#> .\n";

} // namespace

TEST_CASE("proof by contradiction: scholarly preferences of 7.1") {
  Document kb = merged({"listing_7_1_researcher.n3s", "listing_7_1_department.n3s",
                        "listing_7_1_venues.n3s"});
  Goal goal = make_goal(prelude + ":ABC a :DepartmentPreference .\n"
                                  ":ABC a :ResearcherPreference .\n");
  ProofResult result = prove_by_contradiction(kb, goal, Limits{});
  CHECK(result.verdict == Verdict::Proved);
  CHECK(result.trace.fuse.has_value());
}

TEST_CASE("proof by contradiction: medicine prescriptions of 7.2") {
  Document kb = merged({"medication_policies.n3s", "appendix_b.n3s", "appendix_c.n3s"});
  Goal goal = make_goal(prelude + ":Ann :isPrescribed :aspirinHighDose .\n"
                                  ":Joe :isPrescribed :betaBlocker .\n");
  ProofResult result = prove_by_contradiction(kb, goal, Limits{});
  CHECK(result.verdict == Verdict::Proved);
}

TEST_CASE("nothing is provable from an empty knowledge base") {
  Document empty;
  Goal goal = make_goal(prelude + ":a :p :b .\n");
  CHECK(prove_by_contradiction(empty, goal, Limits{}).verdict == Verdict::NotProved);
  CHECK(prove_by_negation(empty, goal, Limits{}).verdict == Verdict::NotProved);
}

TEST_CASE("proof by negation finds explicit negations") {
  Document kb = prepared_fixture("listing_5_3_negation.n3s");
  Goal goal = make_goal(prelude + ":WOS :indexed :JournalABC .\n");
  ProofResult result = prove_by_negation(kb, goal, Limits{});
  CHECK(result.verdict == Verdict::Proved);
  // single-step discharge: the added fact empties the kb's negative surface
  REQUIRE(result.trace.fuse.has_value());
  CHECK(result.trace.fuse->subst.empty());
  // scaffold: wrap + iterate + one deiteration
  CHECK(result.trace.steps.size() == 3);

  // a kb holding both P and its negation mirrors P ∧ ¬P
  Document inconsistent = parse_document(
      prelude + "@prefix log: <http://www.w3.org/2000/10/swap/log#> .\n"
                ":P :holds :P .\n"
                "() log:onNegativeSurface { :P :holds :P . } .\n");
  Goal p = make_goal(prelude + ":P :holds :P .\n");
  CHECK(prove_by_negation(inconsistent, p, Limits{}).verdict == Verdict::Proved);
}

TEST_CASE("unknown verdict on limit") {
  Document kb = prepared_fixture("looping.n3s");
  Limits tight;
  tight.max_iterations = 30;
  Goal goal = make_goal(prelude + ":nobody :p :nothing .\n");
  CHECK(prove_by_contradiction(kb, goal, tight).verdict == Verdict::Unknown);
}

TEST_CASE("query surfaces answer the section 6 accreditation question") {
  Document kb = merged({"listing_5_1.n3s", "listing_6_query.n3s"});
  QueryResult result = answer_query_surfaces(kb, Limits{});
  CHECK(result.outcome == SaturationOutcome::Completed);
  REQUIRE(result.answers.size() == 1);
  REQUIRE(result.answers[0].triples.size() == 1);
  const Triple& t = result.answers[0].triples[0];
  CHECK(t.subject.is_blank());
  CHECK(t.predicate == ex("accredit"));
  CHECK(t.object == ex("JournalA"));

  std::string text = render_answers(result, kb.prefixes);
  CHECK(text.find(":accredit :JournalA .") != std::string::npos);
}

TEST_CASE("query surfaces list exactly the prescriptions of 7.2") {
  Document kb = merged({"medication_policies.n3s", "appendix_b.n3s", "appendix_c.n3s",
                        "listing_7_2_query.n3s"});
  QueryResult result = answer_query_surfaces(kb, Limits{});
  CHECK(result.outcome == SaturationOutcome::Completed);
  REQUIRE(result.answers.size() == 2);
  std::set<std::string> rendered;
  for (const auto& answer : result.answers)
    for (const auto& t : answer.triples)
      rendered.insert(render_triple_n3s(t, kb.prefixes));
  CHECK(rendered == std::set<std::string>{":Ann :isPrescribed :aspirinHighDose .",
                                          ":Joe :isPrescribed :betaBlocker ."});
}

TEST_CASE("queries over knowledge without matches give no answers") {
  Document kb = merged({"listing_6_query.n3s"});
  QueryResult result = answer_query_surfaces(kb, Limits{});
  CHECK(result.answers.empty());
  CHECK(result.outcome == SaturationOutcome::Completed);
}

TEST_CASE("missing query surfaces raise the dedicated error") {
  Document kb = prepared_fixture("listing_5_1.n3s");
  CHECK_THROWS_AS(answer_query_surfaces(kb, Limits{}), QueryError);
}

TEST_CASE("a fuse during query answering is reported with its bindings") {
  Document kb = merged({"listing_7_1_researcher.n3s", "listing_7_1_department.n3s",
                        "listing_7_1_venues.n3s", "listing_7_1_negated_query.n3s",
                        "listing_6_query.n3s"});
  QueryResult result = answer_query_surfaces(kb, Limits{});
  CHECK(result.outcome == SaturationOutcome::Fused);
  CHECK(result.fuse.has_value());
  CHECK(result.answers.empty());
}

TEST_CASE("double-negation coherence: negation proof equals contradiction of the wrapped goal") {
  // prove_by_negation(kb, G) adds G; wrapping G in a double cut and saturating
  // must agree on every regression document.
  for (const char* kb_name :
       {"listing_5_3_negation.n3s", "listing_5_1.n3s", "listing_5_3_nonaf.n3s"}) {
    CAPTURE(kb_name);
    Document kb = prepared_fixture(kb_name);
    Goal goal = make_goal(prelude + ":WOS :indexed :JournalABC .\n");
    ProofResult direct = prove_by_negation(kb, goal, Limits{});

    Surface inner;
    inner.kind = SurfaceKind::Negative;
    for (const auto& f : goal.facts)
      add_item(inner, SurfaceItem::fact(f));
    Surface wrap;
    wrap.kind = SurfaceKind::Negative;
    add_item(wrap, SurfaceItem::child(inner));
    Document wrapped = kb;
    add_item(wrapped.root, SurfaceItem::child(wrap));
    FreshLabelSource fresh;
    SaturationResult sat = saturate(wrapped, Limits{}, fresh);
    bool wrapped_fuses = sat.outcome == SaturationOutcome::Fused;
    CHECK(wrapped_fuses == (direct.verdict == Verdict::Proved));
  }
}

TEST_CASE("proved goals are entailed per the finite-model oracle") {
  // soundness spot-check on a tiny instance
  Document kb = prepared_fixture("listing_5_1.n3s");
  Goal goal = make_goal(prelude + "_:c :accredit :JournalA .\n");
  ProofResult result = prove_by_contradiction(kb, goal, Limits{});
  REQUIRE(result.verdict == Verdict::Proved);

  FormulaPtr oracle_goal =
      f_exists(500, "c",
               f_atom(ex("accredit"), FTerm::variable(500), FTerm::of(ex("JournalA"))));
  CHECK(entails(kb, oracle_goal, 3).verdict == EntailVerdict::EntailedAtK);
}

TEST_CASE("query answers are monotone in the saturation limits") {
  Document kb = merged({"listing_5_1.n3s", "listing_6_query.n3s"});
  Limits small;
  small.max_iterations = 2; // not enough to derive anything
  QueryResult limited = answer_query_surfaces(kb, small);
  QueryResult full = answer_query_surfaces(kb, Limits{});
  for (const auto& answer : limited.answers) {
    bool found = false;
    for (const auto& other : full.answers)
      if (answer.triples.size() == other.triples.size()) {
        bool same = true;
        for (size_t i = 0; i < answer.triples.size(); ++i) {
          const Triple &a = answer.triples[i], &b = other.triples[i];
          if (a.predicate != b.predicate || a.subject.is_blank() != b.subject.is_blank() ||
              (!a.subject.is_blank() && a.subject != b.subject) ||
              a.object.is_blank() != b.object.is_blank() ||
              (!a.object.is_blank() && a.object != b.object))
            same = false;
        }
        found = found || same;
      }
    CHECK(found);
  }
  CHECK(full.answers.size() >= limited.answers.size());
}
