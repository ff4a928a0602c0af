#include "n3s/oracle.hpp"

#include <algorithm>
#include <functional>

namespace n3s {

FormulaPtr f_true() {
  static FormulaPtr instance = std::make_shared<Formula>();
  return instance;
}

FormulaPtr f_atom(Term predicate, FTerm subject, FTerm object) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Atom;
  f->predicate = std::move(predicate);
  f->subject = std::move(subject);
  f->object = std::move(object);
  return f;
}

FormulaPtr f_and(std::vector<FormulaPtr> parts) {
  if (parts.empty())
    return f_true();
  if (parts.size() == 1)
    return parts[0];
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::And;
  f->parts = std::move(parts);
  return f;
}

FormulaPtr f_not(FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Not;
  f->body = std::move(body);
  return f;
}

FormulaPtr f_exists(int var, std::string name, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Exists;
  f->var = var;
  f->var_name = std::move(name);
  f->body = std::move(body);
  return f;
}

namespace {

FTerm translate_term(const Term& t, const std::map<std::string, int>& env) {
  if (t.is_blank()) {
    auto it = env.find(t.value());
    if (it != env.end())
      return FTerm::variable(it->second);
  }
  return FTerm::of(t);
}

FormulaPtr translate_surface(const Surface& s, std::map<std::string, int> env, int& next_var) {
  std::vector<int> bound;
  std::vector<std::string> names;
  for (const auto& g : s.graffiti) {
    env[g] = next_var; // shadows outer binders
    bound.push_back(next_var);
    names.push_back(g);
    ++next_var;
  }
  std::vector<FormulaPtr> parts;
  for (const auto& item : s.contents) {
    if (item.is_fact()) {
      const Triple& t = item.fact();
      parts.push_back(f_atom(t.predicate, translate_term(t.subject, env),
                             translate_term(t.object, env)));
    } else if (item.child().kind == SurfaceKind::Negative) {
      parts.push_back(f_not(translate_surface(item.child(), env, next_var)));
    }
    // query surfaces carry no truth value
  }
  FormulaPtr body = f_and(std::move(parts));
  for (size_t i = bound.size(); i-- > 0;)
    body = f_exists(bound[i], names[i], std::move(body));
  return body;
}

} // namespace

FormulaPtr to_formula_offset(const Document& d, int& next_var) {
  return translate_surface(d.root, {}, next_var);
}

FormulaPtr to_formula(const Document& d) {
  int next_var = 0;
  return to_formula_offset(d, next_var);
}

namespace {

void collect_vocab(const Formula& f, Vocabulary& out) {
  switch (f.kind) {
  case Formula::Kind::True:
    return;
  case Formula::Kind::Atom: {
    auto add = [](std::vector<Term>& v, const Term& t) {
      if (std::find(v.begin(), v.end(), t) == v.end())
        v.push_back(t);
    };
    add(out.predicates, *f.predicate);
    if (!f.subject.is_var)
      add(out.constants, *f.subject.constant);
    if (!f.object.is_var)
      add(out.constants, *f.object.constant);
    return;
  }
  case Formula::Kind::And:
    for (const auto& p : f.parts)
      collect_vocab(*p, out);
    return;
  case Formula::Kind::Not:
  case Formula::Kind::Exists:
    collect_vocab(*f.body, out);
    return;
  }
}

} // namespace

Vocabulary vocabulary_of(const FormulaPtr& f) {
  Vocabulary out;
  collect_vocab(*f, out);
  return out;
}

Vocabulary vocabulary_union(const Vocabulary& a, const Vocabulary& b) {
  Vocabulary out = a;
  for (const auto& c : b.constants)
    if (std::find(out.constants.begin(), out.constants.end(), c) == out.constants.end())
      out.constants.push_back(c);
  for (const auto& p : b.predicates)
    if (std::find(out.predicates.begin(), out.predicates.end(), p) == out.predicates.end())
      out.predicates.push_back(p);
  return out;
}

bool eval(const Formula& f, const Interpretation& interp, std::map<int, int>& env) {
  switch (f.kind) {
  case Formula::Kind::True:
    return true;
  case Formula::Kind::Atom: {
    auto resolve = [&](const FTerm& t) {
      if (t.is_var)
        return env.at(t.var);
      return interp.constants.at(*t.constant);
    };
    auto it = interp.relations.find(*f.predicate);
    if (it == interp.relations.end())
      return false;
    return it->second.count({resolve(f.subject), resolve(f.object)}) > 0;
  }
  case Formula::Kind::And:
    return std::all_of(f.parts.begin(), f.parts.end(),
                       [&](const auto& p) { return eval(*p, interp, env); });
  case Formula::Kind::Not:
    return !eval(*f.body, interp, env);
  case Formula::Kind::Exists: {
    auto saved = env.find(f.var) != env.end() ? std::optional<int>(env[f.var]) : std::nullopt;
    for (int e = 0; e < interp.domain_size; ++e) {
      env[f.var] = e;
      if (eval(*f.body, interp, env)) {
        if (saved)
          env[f.var] = *saved;
        else
          env.erase(f.var);
        return true;
      }
    }
    if (saved)
      env[f.var] = *saved;
    else
      env.erase(f.var);
    return false;
  }
  }
  return false;
}

namespace {

// Propositional grounding over relation bits.
struct Prop {
  enum class Kind { Const, Lit, And, Or, Not } kind = Kind::Const;
  bool value = false;
  int lit = -1;
  std::vector<std::shared_ptr<Prop>> parts;
};
using PropPtr = std::shared_ptr<Prop>;

PropPtr p_const(bool v) {
  auto p = std::make_shared<Prop>();
  p->kind = Prop::Kind::Const;
  p->value = v;
  return p;
}

PropPtr p_lit(int id) {
  auto p = std::make_shared<Prop>();
  p->kind = Prop::Kind::Lit;
  p->lit = id;
  return p;
}

PropPtr p_not(PropPtr x) {
  if (x->kind == Prop::Kind::Const)
    return p_const(!x->value);
  auto p = std::make_shared<Prop>();
  p->kind = Prop::Kind::Not;
  p->parts.push_back(std::move(x));
  return p;
}

PropPtr p_nary(Prop::Kind kind, std::vector<PropPtr> parts) {
  bool absorbing = kind == Prop::Kind::Or; // Or: true absorbs; And: false absorbs
  std::vector<PropPtr> kept;
  for (auto& part : parts) {
    if (part->kind == Prop::Kind::Const) {
      if (part->value == absorbing)
        return p_const(absorbing);
      continue; // identity element
    }
    kept.push_back(std::move(part));
  }
  if (kept.empty())
    return p_const(!absorbing);
  if (kept.size() == 1)
    return kept[0];
  auto p = std::make_shared<Prop>();
  p->kind = kind;
  p->parts = std::move(kept);
  return p;
}

struct Grounder {
  int domain = 1;
  const std::map<Term, int>* constants = nullptr;
  const std::vector<Term>* predicates = nullptr;

  int lit_id(const Term& pred, int s, int o) const {
    auto it = std::find(predicates->begin(), predicates->end(), pred);
    int p = static_cast<int>(it - predicates->begin());
    return (p * domain + s) * domain + o;
  }

  PropPtr ground(const Formula& f, std::map<int, int>& env) const {
    switch (f.kind) {
    case Formula::Kind::True:
      return p_const(true);
    case Formula::Kind::Atom: {
      auto resolve = [&](const FTerm& t) {
        return t.is_var ? env.at(t.var) : constants->at(*t.constant);
      };
      return p_lit(lit_id(*f.predicate, resolve(f.subject), resolve(f.object)));
    }
    case Formula::Kind::And: {
      std::vector<PropPtr> parts;
      for (const auto& part : f.parts)
        parts.push_back(ground(*part, env));
      return p_nary(Prop::Kind::And, std::move(parts));
    }
    case Formula::Kind::Not:
      return p_not(ground(*f.body, env));
    case Formula::Kind::Exists: {
      std::vector<PropPtr> parts;
      for (int e = 0; e < domain; ++e) {
        env[f.var] = e;
        parts.push_back(ground(*f.body, env));
      }
      env.erase(f.var);
      return p_nary(Prop::Kind::Or, std::move(parts));
    }
    }
    return p_const(false);
  }
};

// 1 true, 0 false, -1 undecided; fills `pick` with an unassigned literal from
// an undecided subtree.
int eval3(const Prop& p, const std::vector<int8_t>& assign, int* pick) {
  switch (p.kind) {
  case Prop::Kind::Const:
    return p.value ? 1 : 0;
  case Prop::Kind::Lit:
    if (assign[p.lit] >= 0)
      return assign[p.lit];
    if (pick && *pick < 0)
      *pick = p.lit;
    return -1;
  case Prop::Kind::Not: {
    int v = eval3(*p.parts[0], assign, pick);
    return v < 0 ? -1 : 1 - v;
  }
  case Prop::Kind::And: {
    bool undecided = false;
    for (const auto& part : p.parts) {
      int v = eval3(*part, assign, pick);
      if (v == 0)
        return 0;
      if (v < 0)
        undecided = true;
    }
    return undecided ? -1 : 1;
  }
  case Prop::Kind::Or: {
    bool undecided = false;
    for (const auto& part : p.parts) {
      int v = eval3(*part, assign, pick);
      if (v == 1)
        return 1;
      if (v < 0)
        undecided = true;
    }
    return undecided ? -1 : 0;
  }
  }
  return 0;
}

bool prop_sat(const Prop& p, std::vector<int8_t>& assign) {
  int pick = -1;
  int v = eval3(p, assign, &pick);
  if (v == 1)
    return true;
  if (v == 0)
    return false;
  for (int8_t choice : {int8_t{1}, int8_t{0}}) {
    assign[pick] = choice;
    if (prop_sat(p, assign))
      return true;
  }
  assign[pick] = -1;
  return false;
}

} // namespace

std::optional<Interpretation> find_model(const FormulaPtr& f, const Vocabulary& vocab, int k,
                                         bool force) {
  if (!force && (vocab.predicates.size() > 2 || k > 3))
    throw TooLargeError("vocabulary beyond 2 predicates x domain 3; pass force to override");
  size_t n_constants = vocab.constants.size();
  for (int domain = 1; domain <= k; ++domain) {
    std::vector<int> assignment(n_constants, 0);
    while (true) {
      Interpretation interp;
      interp.domain_size = domain;
      for (size_t i = 0; i < n_constants; ++i)
        interp.constants.emplace(vocab.constants[i], assignment[i]);

      Grounder grounder{domain, &interp.constants, &vocab.predicates};
      std::map<int, int> env;
      PropPtr grounded = grounder.ground(*f, env);
      std::vector<int8_t> bits(vocab.predicates.size() * domain * domain, -1);
      if (prop_sat(*grounded, bits)) {
        for (size_t pi = 0; pi < vocab.predicates.size(); ++pi) {
          auto& rel = interp.relations[vocab.predicates[pi]];
          for (int s = 0; s < domain; ++s)
            for (int o = 0; o < domain; ++o) {
              int id = (static_cast<int>(pi) * domain + s) * domain + o;
              if (bits[id] == 1)
                rel.insert({s, o});
            }
        }
        return interp;
      }

      // next constant assignment in base `domain`
      size_t i = 0;
      for (; i < n_constants; ++i) {
        if (++assignment[i] < domain)
          break;
        assignment[i] = 0;
      }
      if (i == n_constants)
        break;
    }
  }
  return std::nullopt;
}

EntailResult entails(const Document& kb, const FormulaPtr& goal, int k, bool force) {
  int next_var = 0;
  FormulaPtr kb_formula = to_formula_offset(kb, next_var);
  FormulaPtr test = f_and({kb_formula, f_not(goal)});
  Vocabulary vocab = vocabulary_of(test);
  EntailResult out;
  auto model = find_model(test, vocab, k, force);
  if (model) {
    out.verdict = EntailVerdict::NotEntailed;
    out.k = model->domain_size;
    out.counter_model = std::move(model);
  } else {
    out.verdict = EntailVerdict::EntailedAtK;
    out.k = k;
  }
  return out;
}

namespace {

std::string short_term(const Term& t) {
  if (t.is_iri()) {
    const std::string& v = t.value();
    auto pos = v.find_last_of("#/");
    return pos == std::string::npos ? v : v.substr(pos + 1);
  }
  if (t.is_blank())
    return "_:" + t.value();
  return "\"" + t.value() + "\"";
}

void print(const Formula& f, std::string& out) {
  switch (f.kind) {
  case Formula::Kind::True:
    out += "true";
    return;
  case Formula::Kind::Atom:
    out += "<" + (f.subject.is_var ? "?" + std::to_string(f.subject.var)
                                   : short_term(*f.subject.constant)) +
           " " + short_term(*f.predicate) + " " +
           (f.object.is_var ? "?" + std::to_string(f.object.var)
                            : short_term(*f.object.constant)) +
           ">";
    return;
  case Formula::Kind::And: {
    out += "(";
    for (size_t i = 0; i < f.parts.size(); ++i) {
      if (i)
        out += " & ";
      print(*f.parts[i], out);
    }
    out += ")";
    return;
  }
  case Formula::Kind::Not:
    out += "~";
    print(*f.body, out);
    return;
  case Formula::Kind::Exists:
    out += "exists ?" + std::to_string(f.var) + "(" + f.var_name + ").";
    print(*f.body, out);
    return;
  }
}

} // namespace

std::string to_string(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

std::string describe(const Interpretation& interp, const Vocabulary& vocab) {
  std::string out = "domain size " + std::to_string(interp.domain_size) + "\n";
  for (const auto& c : vocab.constants) {
    auto it = interp.constants.find(c);
    if (it != interp.constants.end())
      out += "  " + short_term(c) + " -> e" + std::to_string(it->second) + "\n";
  }
  for (const auto& p : vocab.predicates) {
    out += "  " + short_term(p) + " = {";
    auto it = interp.relations.find(p);
    bool first = true;
    if (it != interp.relations.end()) {
      for (const auto& [s, o] : it->second) {
        if (!first)
          out += ", ";
        first = false;
        out += "(e" + std::to_string(s) + ",e" + std::to_string(o) + ")";
      }
    }
    out += "}\n";
  }
  return out;
}

} // namespace n3s
