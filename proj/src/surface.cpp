#include "n3s/surface.hpp"

#include <algorithm>
#include <functional>

namespace n3s {

SurfaceItem SurfaceItem::child(Surface s) {
  return SurfaceItem(std::make_shared<const Surface>(std::move(s)));
}

const std::string* PrefixMap::find(const std::string& prefix) const {
  for (const auto& [p, ns] : entries)
    if (p == prefix)
      return &ns;
  return nullptr;
}

void PrefixMap::set(const std::string& prefix, const std::string& ns) {
  for (auto& [p, existing] : entries)
    if (p == prefix) {
      existing = ns;
      return;
    }
  entries.emplace_back(prefix, ns);
}

Surface make_surface(SurfaceKind kind, std::vector<std::string> graffiti,
                     std::vector<SurfaceItem> items) {
  std::set<std::string> seen;
  for (const auto& g : graffiti)
    if (!seen.insert(g).second)
      throw std::invalid_argument("duplicate graffiti label '" + g + "' on one surface");
  Surface s;
  s.kind = kind;
  s.graffiti = std::move(graffiti);
  for (auto& item : items) {
    if (kind == SurfaceKind::Query && item.is_child())
      throw std::invalid_argument("query surface may contain only triples");
    add_item(s, std::move(item));
  }
  return s;
}

bool structural_equal(const Surface& a, const Surface& b) {
  if (a.kind != b.kind)
    return false;
  if (a.graffiti.size() != b.graffiti.size())
    return false;
  std::set<std::string> ga(a.graffiti.begin(), a.graffiti.end());
  std::set<std::string> gb(b.graffiti.begin(), b.graffiti.end());
  if (ga != gb)
    return false;
  if (a.contents.size() != b.contents.size())
    return false;
  // Contents are deduplicated sets, so a greedy one-to-one scan suffices.
  std::vector<bool> used(b.contents.size(), false);
  for (const auto& item : a.contents) {
    bool found = false;
    for (size_t j = 0; j < b.contents.size(); ++j) {
      if (!used[j] && structural_equal(item, b.contents[j])) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found)
      return false;
  }
  return true;
}

bool structural_equal(const SurfaceItem& a, const SurfaceItem& b) {
  if (a.is_fact() != b.is_fact())
    return false;
  if (a.is_fact())
    return a.fact() == b.fact();
  return structural_equal(a.child(), b.child());
}

bool contains_item(const Surface& s, const SurfaceItem& item) {
  return std::any_of(s.contents.begin(), s.contents.end(),
                     [&](const SurfaceItem& x) { return structural_equal(x, item); });
}

bool add_item(Surface& s, SurfaceItem item) {
  if (contains_item(s, item))
    return false;
  s.contents.push_back(std::move(item));
  return true;
}

bool remove_item(Surface& s, const SurfaceItem& item) {
  for (auto it = s.contents.begin(); it != s.contents.end(); ++it)
    if (structural_equal(*it, item)) {
      s.contents.erase(it);
      return true;
    }
  return false;
}

std::vector<size_t> child_positions(const Surface& s) {
  std::vector<size_t> out;
  for (size_t i = 0; i < s.contents.size(); ++i)
    if (s.contents[i].is_child())
      out.push_back(i);
  return out;
}

const Surface* find_surface(const Document& d, std::span<const int> path) {
  const Surface* cur = &d.root;
  for (int ordinal : path) {
    auto kids = child_positions(*cur);
    if (ordinal < 0 || static_cast<size_t>(ordinal) >= kids.size())
      return nullptr;
    cur = &cur->contents[kids[ordinal]].child();
  }
  return cur;
}

const Surface& surface_at(const Document& d, std::span<const int> path) {
  const Surface* s = find_surface(d, path);
  if (!s)
    throw AddressError("no surface at the given path");
  return *s;
}

std::vector<const Surface*> surface_chain(const Document& d, std::span<const int> path) {
  std::vector<const Surface*> chain{&d.root};
  const Surface* cur = &d.root;
  for (int ordinal : path) {
    auto kids = child_positions(*cur);
    if (ordinal < 0 || static_cast<size_t>(ordinal) >= kids.size())
      throw AddressError("no surface at the given path");
    cur = &cur->contents[kids[ordinal]].child();
    chain.push_back(cur);
  }
  return chain;
}

int parity(const Document& d, std::span<const int> path) {
  auto chain = surface_chain(d, path);
  int crossings = 0;
  for (const Surface* s : chain)
    if (s->kind == SurfaceKind::Negative)
      ++crossings;
  return crossings % 2;
}

size_t containment_size(const Surface& s) {
  size_t n = 1;
  for (const auto& item : s.contents)
    n += item.is_fact() ? 1 : containment_size(item.child());
  return n;
}

Document replace_surface(const Document& d, std::span<const int> path, Surface replacement) {
  std::function<Surface(const Surface&, std::span<const int>)> rebuild =
      [&](const Surface& cur, std::span<const int> rest) -> Surface {
    if (rest.empty())
      return replacement;
    auto kids = child_positions(cur);
    int ordinal = rest[0];
    if (ordinal < 0 || static_cast<size_t>(ordinal) >= kids.size())
      throw AddressError("no surface at the given path");
    Surface out = cur;
    Surface next = rebuild(cur.contents[kids[ordinal]].child(), rest.subspan(1));
    out.contents[kids[ordinal]] = SurfaceItem::child(std::move(next));
    return out;
  };
  Document out = d;
  out.root = rebuild(d.root, path);
  return out;
}

Surface substitute(const Substitution& s, const Surface& surface) {
  Substitution scoped = s;
  for (const auto& g : surface.graffiti)
    scoped.erase(g);
  if (scoped.empty())
    return surface;
  // Graffiti colliding with a blank in the substitution's range would capture
  // it; alpha-rename such binders first.
  std::set<std::string> range_blanks;
  for (const auto& [key, term] : scoped) {
    (void)key;
    if (term.is_blank())
      range_blanks.insert(term.value());
  }
  Surface out;
  out.kind = surface.kind;
  std::set<std::string> taken;
  if (!range_blanks.empty()) {
    collect_labels(surface, taken);
    taken.insert(range_blanks.begin(), range_blanks.end());
  }
  Substitution effective = scoped;
  for (const auto& g : surface.graffiti) {
    if (range_blanks.count(g)) {
      std::string renamed;
      int n = 0;
      do {
        renamed = g + "x" + std::to_string(++n);
      } while (taken.count(renamed));
      taken.insert(renamed);
      effective.insert_or_assign(g, Term::blank(renamed));
      out.graffiti.push_back(renamed);
    } else {
      out.graffiti.push_back(g);
    }
  }
  for (const auto& item : surface.contents)
    add_item(out, substitute(effective, item));
  return out;
}

SurfaceItem substitute(const Substitution& s, const SurfaceItem& item) {
  if (s.empty())
    return item;
  if (item.is_fact())
    return SurfaceItem::fact(substitute(s, item.fact()));
  return SurfaceItem::child(substitute(s, item.child()));
}

void collect_labels(const Surface& s, std::set<std::string>& out) {
  for (const auto& g : s.graffiti)
    out.insert(g);
  for (const auto& item : s.contents) {
    if (item.is_fact()) {
      for (const Term* t : {&item.fact().subject, &item.fact().predicate, &item.fact().object})
        if (t->is_blank())
          out.insert(t->value());
    } else {
      collect_labels(item.child(), out);
    }
  }
}

void collect_occurring_labels(const Surface& s, std::set<std::string>& out) {
  for (const auto& item : s.contents) {
    if (item.is_fact()) {
      for (const Term* t : {&item.fact().subject, &item.fact().predicate, &item.fact().object})
        if (t->is_blank())
          out.insert(t->value());
    } else {
      collect_occurring_labels(item.child(), out);
    }
  }
}

std::string to_string(SurfaceKind k) {
  switch (k) {
  case SurfaceKind::Positive: return "positive";
  case SurfaceKind::Negative: return "negative";
  case SurfaceKind::Query: return "query";
  }
  return {};
}

static void key_term(std::string& out, const Term& t) {
  switch (t.kind()) {
  case TermKind::Iri: out += "I<" + t.value() + ">"; break;
  case TermKind::BlankNode: out += "B<" + t.value() + ">"; break;
  case TermKind::Literal:
    out += "L<" + t.value() + "^" + t.datatype() + "@" + t.language() + ">";
    break;
  }
}

static void key_item(std::string& out, const SurfaceItem& item);

static void key_surface(std::string& out, const Surface& s) {
  out += to_string(s.kind)[0];
  out += '(';
  std::vector<std::string> g(s.graffiti.begin(), s.graffiti.end());
  std::sort(g.begin(), g.end());
  for (const auto& l : g)
    out += l + " ";
  out += "){";
  for (const auto& item : s.contents) {
    key_item(out, item);
    out += ';';
  }
  out += '}';
}

static void key_item(std::string& out, const SurfaceItem& item) {
  if (item.is_fact()) {
    out += 'T';
    key_term(out, item.fact().subject);
    key_term(out, item.fact().predicate);
    key_term(out, item.fact().object);
  } else {
    key_surface(out, item.child());
  }
}

std::string canonical_key(const SurfaceItem& item) {
  std::string out;
  key_item(out, item);
  return out;
}

std::string canonical_key(const Surface& s) {
  std::string out;
  key_surface(out, s);
  return out;
}

std::string canonical_key(const Substitution& s) {
  std::string out;
  for (const auto& [label, term] : s) {
    out += label + "=";
    key_term(out, term);
    out += ',';
  }
  return out;
}

namespace {

// Backtracking matcher. p2t maps pattern-bound labels to target-bound labels
// for the scopes currently open; universals bind into the substitution.
// Scope pairings pop on exit (shadowing overrides and is restored).
struct Matcher {
  const std::set<std::string>* universals = nullptr;
  Substitution subst;
  std::map<std::string, std::string> p2t;
  std::set<std::string> target_bound;

  bool term(const Term& pat, const Term& tgt) {
    if (!pat.is_blank())
      return pat == tgt;
    const std::string& label = pat.value();
    if (auto it = p2t.find(label); it != p2t.end())
      return tgt.is_blank() && tgt.value() == it->second;
    if (universals->count(label)) {
      // A universal may not capture a label bound inside the target.
      if (tgt.is_blank() && target_bound.count(tgt.value()))
        return false;
      if (auto it = subst.find(label); it != subst.end())
        return it->second == tgt;
      subst.emplace(label, tgt);
      return true;
    }
    // Outer coreference: a constant from this match's point of view.
    return tgt.is_blank() && !target_bound.count(tgt.value()) && tgt.value() == label;
  }

  bool fact(const Triple& pat, const Triple& tgt) {
    return term(pat.subject, tgt.subject) && term(pat.predicate, tgt.predicate) &&
           term(pat.object, tgt.object);
  }

  bool item(const SurfaceItem& pat, const SurfaceItem& tgt) {
    if (pat.is_fact() != tgt.is_fact())
      return false;
    if (pat.is_fact())
      return fact(pat.fact(), tgt.fact());
    return surface(pat.child(), tgt.child());
  }

  bool surface(const Surface& pat, const Surface& tgt) {
    if (pat.kind != tgt.kind)
      return false;
    if (pat.graffiti.size() != tgt.graffiti.size())
      return false;
    if (pat.contents.size() != tgt.contents.size())
      return false;
    std::vector<std::string> perm = tgt.graffiti;
    std::sort(perm.begin(), perm.end());
    auto entry_p2t = p2t;
    auto entry_bound = target_bound;
    do {
      Substitution saved_subst = subst;
      for (size_t i = 0; i < pat.graffiti.size(); ++i) {
        p2t[pat.graffiti[i]] = perm[i]; // shadows any outer pairing
        target_bound.insert(perm[i]);
      }
      if (contents(pat.contents, tgt.contents, 0,
                   std::vector<bool>(tgt.contents.size(), false))) {
        p2t = entry_p2t; // close this scope; keep the substitution
        target_bound = entry_bound;
        return true;
      }
      subst = std::move(saved_subst);
      p2t = entry_p2t;
      target_bound = entry_bound;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
  }

  bool contents(const std::vector<SurfaceItem>& pat, const std::vector<SurfaceItem>& tgt,
                size_t i, std::vector<bool> used) {
    if (i == pat.size())
      return true;
    for (size_t j = 0; j < tgt.size(); ++j) {
      if (used[j])
        continue;
      Matcher saved = *this;
      if (item(pat[i], tgt[j])) {
        used[j] = true;
        if (contents(pat, tgt, i + 1, used))
          return true;
        used[j] = false;
      }
      *this = std::move(saved);
    }
    return false;
  }
};

} // namespace

std::optional<Substitution> match_surfaces(const Surface& pattern, const Surface& target,
                                           const std::set<std::string>& universals,
                                           const Substitution& s0) {
  Matcher m{&universals, s0, {}, {}};
  if (m.surface(pattern, target))
    return m.subst;
  return std::nullopt;
}

} // namespace n3s
