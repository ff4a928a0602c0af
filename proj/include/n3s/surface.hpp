#pragma once

#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "n3s/term.hpp"

namespace n3s {

enum class SurfaceKind { Positive, Negative, Query };

struct Surface;
using SurfacePtr = std::shared_ptr<const Surface>;

/// One element of a Hayes graph: either an asserted triple or a nested surface.
class SurfaceItem {
public:
  static SurfaceItem fact(Triple t) { return SurfaceItem(std::move(t)); }
  static SurfaceItem child(Surface s);
  static SurfaceItem child(SurfacePtr s) { return SurfaceItem(std::move(s)); }

  bool is_fact() const { return std::holds_alternative<Triple>(node_); }
  bool is_child() const { return !is_fact(); }
  const Triple& fact() const { return std::get<Triple>(node_); }
  const Surface& child() const { return *std::get<SurfacePtr>(node_); }
  const SurfacePtr& child_ptr() const { return std::get<SurfacePtr>(node_); }

private:
  explicit SurfaceItem(Triple t) : node_(std::move(t)) {}
  explicit SurfaceItem(SurfacePtr s) : node_(std::move(s)) {}
  std::variant<Triple, SurfacePtr> node_;
};

/// A surface node: graffiti labels, kind, and a content set (Hayes graph).
/// Contents keep insertion order but behave as a set (see add_item).
struct Surface {
  std::vector<std::string> graffiti;
  SurfaceKind kind = SurfaceKind::Positive;
  std::vector<SurfaceItem> contents;
};

struct PrefixMap {
  std::vector<std::pair<std::string, std::string>> entries; // insertion order

  const std::string* find(const std::string& prefix) const;
  void set(const std::string& prefix, const std::string& ns);
};

struct Document {
  PrefixMap prefixes;
  std::optional<std::string> base;
  Surface root; // always Positive
};

struct AddressError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Validating constructor: graffiti must be pairwise distinct, query surfaces
/// may hold only facts; items are deduplicated.
Surface make_surface(SurfaceKind kind, std::vector<std::string> graffiti,
                     std::vector<SurfaceItem> items);

bool structural_equal(const Surface& a, const Surface& b);
bool structural_equal(const SurfaceItem& a, const SurfaceItem& b);

/// Set-semantics insert; returns false when an equal item is already present.
bool add_item(Surface& s, SurfaceItem item);
bool remove_item(Surface& s, const SurfaceItem& item);
bool contains_item(const Surface& s, const SurfaceItem& item);

/// Number of crossed negative borders mod 2 for the surface addressed by
/// `path` (child-surface ordinals from the root). Query borders do not count.
int parity(const Document& d, std::span<const int> path);

/// Transitively enclosed items plus the surface itself.
size_t containment_size(const Surface& s);

/// Ordinals of Child items within contents (facts are not addressable).
std::vector<size_t> child_positions(const Surface& s);

const Surface* find_surface(const Document& d, std::span<const int> path);
/// Like find_surface but throws AddressError.
const Surface& surface_at(const Document& d, std::span<const int> path);
/// Root-to-target chain, inclusive.
std::vector<const Surface*> surface_chain(const Document& d, std::span<const int> path);

/// Functional update: new document with the surface at `path` replaced.
Document replace_surface(const Document& d, std::span<const int> path, Surface replacement);

/// Capture-avoiding: bindings shadowed by a surface's own graffiti are dropped
/// inside its scope.
Surface substitute(const Substitution& s, const Surface& surface);
SurfaceItem substitute(const Substitution& s, const SurfaceItem& item);

/// Every blank label in the subtree, both declared graffiti and occurrences.
void collect_labels(const Surface& s, std::set<std::string>& out);
/// Blank labels occurring in triples of the subtree (not graffiti declarations).
void collect_occurring_labels(const Surface& s, std::set<std::string>& out);

/// Stable textual key for caches and dedup maps.
std::string canonical_key(const SurfaceItem& item);
std::string canonical_key(const Surface& s);
std::string canonical_key(const Substitution& s);

/// Matches `pattern` against `target` up to a bijection of their bound
/// graffiti, extending `subst` over labels in `universals` (which may only
/// bind to terms free in `target`). Pattern blanks outside both sets are
/// constants. Returns the extended substitution or nothing.
std::optional<Substitution> match_surfaces(const Surface& pattern, const Surface& target,
                                           const std::set<std::string>& universals,
                                           const Substitution& s0);

std::string to_string(SurfaceKind k);

} // namespace n3s
