#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dstf {

// A per-variable value subset, one bit per frame label (frame order).
using PartMask = std::uint32_t;

// Product frames with at most this many configurations admit explicit-mode
// (subset-indexed) computation.
inline constexpr std::size_t kExplicitCapacity = 24;

struct Variable {
  std::string name;
  std::vector<std::string> frame;

  std::size_t size() const { return frame.size(); }
  PartMask full_mask() const { return (PartMask{1} << frame.size()) - 1; }
  int label_index(const std::string& label) const;  // -1 if absent

  bool operator==(const Variable&) const = default;
};

// Ordered set of variables; order is declaration order and is preserved by
// every operation.
class Scope {
 public:
  Scope() = default;
  explicit Scope(std::vector<Variable> vars);

  const std::vector<Variable>& variables() const { return vars_; }
  std::size_t size() const { return vars_.size(); }
  const Variable& at(std::size_t i) const { return vars_[i]; }
  int index_of(const std::string& name) const;  // -1 if absent

  // Product-frame cardinality (number of configurations).
  std::size_t frame_cardinality() const;

  // Sub-scope of the named variables, kept in this scope's order.
  Scope subscope(const std::vector<std::string>& names) const;
  // Indices of the named variables, sorted ascending.
  std::vector<std::size_t> indices_of(const std::vector<std::string>& names) const;

  bool contains_all(const Scope& other) const;

  bool operator==(const Scope&) const = default;

 private:
  std::vector<Variable> vars_;
};

// Per-variable parts of a product-form subset; parts[i] is a nonempty mask
// over vars[i]'s frame.
using ProductParts = std::vector<PartMask>;

struct ProductFocalSet {
  Scope scope;
  ProductParts parts;

  ProductFocalSet() = default;
  ProductFocalSet(Scope s, ProductParts p);

  std::size_t tuple_count() const;
  std::string to_string() const;

  bool operator==(const ProductFocalSet&) const = default;
};

enum class SetRelation { subset, superset, equal, disjoint, overlapping };

// Tuple-level subset of a product frame, as a bitmask over enumerated
// configurations (first variable fastest).
struct ExplicitSubset {
  Scope scope;
  std::uint32_t tuples = 0;
};

ProductFocalSet full_focal(const Scope& scope);

ProductFocalSet project_focal(const ProductFocalSet& a,
                              const std::vector<std::string>& keep);

// Empty intersections are reported via the bool, never as an empty part.
struct IntersectResult {
  bool empty = true;
  ProductFocalSet set;
};
IntersectResult intersect_focal(const ProductFocalSet& a, const ProductFocalSet& b);

ProductFocalSet vacuous_extend_focal(const ProductFocalSet& a, const Scope& target);

SetRelation focal_relation(const ProductFocalSet& a, const ProductFocalSet& b);

ExplicitSubset enumerate_tuples(const ProductFocalSet& a);

// Part-mask helpers shared by the explicit-mode code.
bool parts_subset(const ProductParts& a, const ProductParts& b);       // a within b
bool parts_disjoint(const ProductParts& a, const ProductParts& b);
std::size_t parts_tuple_count(const ProductParts& p);

std::string part_to_string(const Variable& var, PartMask mask);

}  // namespace dstf
