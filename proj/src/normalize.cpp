#include "n3s/normalize.hpp"

#include <algorithm>
#include <functional>

namespace n3s {

void FreshLabelSource::reserve_all(const Document& d) {
  std::set<std::string> labels;
  collect_labels(d.root, labels);
  used_.insert(labels.begin(), labels.end());
}

std::string FreshLabelSource::next() {
  std::string label;
  do {
    label = prefix_ + std::to_string(++counter_);
  } while (used_.count(label));
  used_.insert(label);
  return label;
}

namespace {

struct ScopeWalker {
  ScopedDocument& out;
  // innermost binder per label, with shadow stack semantics
  std::map<std::string, std::vector<BinderRef>> env;

  void enter(const Surface& s, const std::vector<int>& path) {
    for (size_t gi = 0; gi < s.graffiti.size(); ++gi) {
      const auto& label = s.graffiti[gi];
      auto& stack = env[label];
      if (!stack.empty())
        out.warnings.push_back("graffiti '_:" + label + "' shadows an outer declaration");
      stack.push_back(BinderRef{path, gi});
    }
    for (size_t ii = 0; ii < s.contents.size(); ++ii) {
      const auto& item = s.contents[ii];
      if (item.is_fact()) {
        const Triple& t = item.fact();
        const Term* terms[3] = {&t.subject, &t.predicate, &t.object};
        for (int slot : {0, 2}) {
          if (!terms[slot]->is_blank())
            continue;
          auto it = env.find(terms[slot]->value());
          std::optional<BinderRef> binder;
          if (it != env.end() && !it->second.empty())
            binder = it->second.back();
          out.binding.emplace(OccurrenceRef{path, ii, slot}, binder);
        }
      } else {
        std::vector<int> child_path = path;
        int ordinal = 0;
        for (size_t j = 0; j < ii; ++j)
          if (s.contents[j].is_child())
            ++ordinal;
        child_path.push_back(ordinal);
        enter(item.child(), child_path);
      }
    }
    for (const auto& label : s.graffiti)
      env[label].pop_back();
  }
};

} // namespace

ScopedDocument resolve_scopes(const Document& d) {
  ScopedDocument out{d, {}, {}};
  ScopeWalker walker{out, {}};
  walker.enter(d.root, {});
  return out;
}

std::vector<std::string> free_labels(const Document& d) {
  ScopedDocument scoped = resolve_scopes(d);
  std::vector<std::string> order;
  std::set<std::string> seen;
  // binding map is ordered by path/item/slot, which follows document order
  // closely enough only for identical paths; walk the document instead.
  std::function<void(const Surface&, std::vector<int>&)> walk =
      [&](const Surface& s, std::vector<int>& path) {
        for (size_t ii = 0; ii < s.contents.size(); ++ii) {
          const auto& item = s.contents[ii];
          if (item.is_fact()) {
            for (int slot : {0, 2}) {
              const Term& t = slot == 0 ? item.fact().subject : item.fact().object;
              if (!t.is_blank())
                continue;
              auto it = scoped.binding.find(OccurrenceRef{path, ii, slot});
              if (it != scoped.binding.end() && !it->second && !seen.count(t.value())) {
                seen.insert(t.value());
                order.push_back(t.value());
              }
            }
          } else {
            int ordinal = 0;
            for (size_t j = 0; j < ii; ++j)
              if (s.contents[j].is_child())
                ++ordinal;
            path.push_back(ordinal);
            walk(item.child(), path);
            path.pop_back();
          }
        }
      };
  std::vector<int> path;
  walk(d.root, path);
  return order;
}

Document existential_closure(const Document& d) {
  auto free = free_labels(d);
  if (free.empty())
    return d;
  Document out = d;
  std::set<std::string> present(out.root.graffiti.begin(), out.root.graffiti.end());
  for (const auto& label : free)
    if (present.insert(label).second)
      out.root.graffiti.push_back(label);
  return out;
}

namespace {

Surface rename_apart(const Surface& s, FreshLabelSource& fresh,
                     std::map<std::string, std::string> env) {
  Surface out;
  out.kind = s.kind;
  for (const auto& label : s.graffiti) {
    std::string renamed = fresh.next();
    env[label] = renamed; // shadows any outer renaming
    out.graffiti.push_back(renamed);
  }
  for (const auto& item : s.contents) {
    if (item.is_fact()) {
      auto rename_term = [&](const Term& t) {
        if (t.is_blank()) {
          auto it = env.find(t.value());
          if (it != env.end())
            return Term::blank(it->second);
        }
        return t;
      };
      const Triple& t = item.fact();
      out.contents.push_back(SurfaceItem::fact(
          Triple(rename_term(t.subject), t.predicate, rename_term(t.object))));
    } else {
      out.contents.push_back(SurfaceItem::child(rename_apart(item.child(), fresh, env)));
    }
  }
  return out;
}

} // namespace

Document standardize_apart(const Document& d, FreshLabelSource& fresh) {
  fresh.reserve_all(d);
  Document out = d;
  out.root = rename_apart(d.root, fresh, {});
  return out;
}

Document merge_documents(const Document& a, const Document& b, FreshLabelSource& fresh) {
  Document out;
  out.prefixes = a.prefixes;
  for (const auto& [prefix, ns] : b.prefixes.entries) {
    const std::string* existing = out.prefixes.find(prefix);
    if (existing && *existing != ns)
      throw NormalizeError(NormalizeErrorKind::PrefixCollision,
                           "prefix '" + prefix + ":' bound to both <" + *existing + "> and <" +
                               ns + ">");
    out.prefixes.set(prefix, ns);
  }
  fresh.reserve_all(a);
  fresh.reserve_all(b);
  Document a2 = standardize_apart(existential_closure(a), fresh);
  Document b2 = standardize_apart(existential_closure(b), fresh);
  out.root.kind = SurfaceKind::Positive;
  out.root.graffiti = a2.root.graffiti;
  out.root.graffiti.insert(out.root.graffiti.end(), b2.root.graffiti.begin(),
                           b2.root.graffiti.end());
  for (const auto& item : a2.root.contents)
    add_item(out.root, item);
  for (const auto& item : b2.root.contents)
    add_item(out.root, item);
  return out;
}

bool isomorphic(const Surface& a, const Surface& b, const Substitution& under) {
  Surface substituted = substitute(under, a);
  return match_surfaces(substituted, b, {}, {}).has_value();
}

} // namespace n3s
