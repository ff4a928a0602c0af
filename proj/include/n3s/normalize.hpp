#pragma once

#include <map>

#include "n3s/surface.hpp"

namespace n3s {

enum class NormalizeErrorKind { PrefixCollision };

class NormalizeError : public std::runtime_error {
public:
  NormalizeError(NormalizeErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  NormalizeErrorKind kind() const { return kind_; }

private:
  NormalizeErrorKind kind_;
};

/// Mints blank labels of the form `<prefix><N>` that never collide with a
/// label already reserved. One source per derivation run.
class FreshLabelSource {
public:
  explicit FreshLabelSource(std::string prefix = "e") : prefix_(std::move(prefix)) {}

  void reserve(const std::string& label) { used_.insert(label); }
  void reserve_all(const Document& d);
  std::string next();
  int counter() const { return counter_; }

private:
  std::string prefix_;
  int counter_ = 0;
  std::set<std::string> used_;
};

/// Address of one blank-node occurrence: surface path, item index within
/// that surface's contents, and triple slot (0 subject, 2 object).
struct OccurrenceRef {
  std::vector<int> surface_path;
  size_t item_index = 0;
  int slot = 0;

  auto operator<=>(const OccurrenceRef&) const = default;
};

/// The graffiti declaration an occurrence binds to.
struct BinderRef {
  std::vector<int> surface_path;
  size_t graffiti_index = 0;

  auto operator<=>(const BinderRef&) const = default;
};

struct ScopedDocument {
  Document doc;
  /// nullopt value = free occurrence.
  std::map<OccurrenceRef, std::optional<BinderRef>> binding;
  std::vector<std::string> warnings; // shadowed graffiti diagnostics
};

/// Binds every blank occurrence to the same-label graffiti on the closest
/// enclosing surface that declares it.
ScopedDocument resolve_scopes(const Document& d);

/// Labels with at least one free occurrence, in first-occurrence order.
std::vector<std::string> free_labels(const Document& d);

/// Appends every free label to the root graffiti (once per label). Idempotent.
Document existential_closure(const Document& d);

/// Renames every binder and its bound occurrences to fresh labels. Free
/// occurrences are left alone; close the document first to rename everything.
Document standardize_apart(const Document& d, FreshLabelSource& fresh);

/// Union of prefixes (PrefixCollision on conflicting namespaces), both roots
/// closed and standardized apart, contents combined on one positive root.
Document merge_documents(const Document& a, const Document& b, FreshLabelSource& fresh);

/// True iff a under `under` equals b up to a bijection of locally bound
/// graffiti labels and content-set order.
bool isomorphic(const Surface& a, const Surface& b, const Substitution& under = {});

} // namespace n3s
