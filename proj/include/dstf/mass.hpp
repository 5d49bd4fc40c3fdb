#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dstf/frame.hpp"

namespace dstf {

// Non-product focal set in explicit mode, stored as sorted tuple indices.
struct TupleList {
  std::vector<std::uint32_t> tuples;
  auto operator<=>(const TupleList&) const = default;
};

// Focal sets are product-form wherever possible; TupleList appears only for
// non-product sets produced by explicit-mode inversion.
using FocalKey = std::variant<ProductParts, TupleList>;

inline bool is_product(const FocalKey& k) {
  return std::holds_alternative<ProductParts>(k);
}

struct ValuationClass {
  bool proper = false;
  bool normal = false;
  bool positive_normal = false;
  bool zero = false;
};

// Scope plus focal-set -> mass map. Zero masses are dropped on construction;
// the map's canonical key order fixes every accumulation order.
class MassFunction {
 public:
  MassFunction() = default;
  MassFunction(Scope scope, std::map<FocalKey, double> assignments);

  const Scope& scope() const { return scope_; }
  const std::map<FocalKey, double>& assignments() const { return assignments_; }
  std::size_t focal_count() const { return assignments_.size(); }
  double mass_of(const FocalKey& k) const;
  double total_mass() const;
  bool all_product() const;

  std::string focal_to_string(const FocalKey& k) const;

 private:
  Scope scope_;
  std::map<FocalKey, double> assignments_;
};

MassFunction vacuous(const Scope& scope);

ValuationClass classify(const MassFunction& m);

double bel_of(const MassFunction& m, const ProductFocalSet& a);
double pl_of(const MassFunction& m, const ProductFocalSet& a);
double q_of(const MassFunction& m, const ProductFocalSet& a);

struct CombineResult {
  bool inconsistent = false;  // zero-valuation outcome (total conflict)
  double conflict = 0.0;      // mass lost to empty intersections, pre-normalization
  MassFunction mass;          // meaningful only when !inconsistent
};

// Dempster's rule; operands over differing scopes are vacuously extended to
// the union scope (first operand's order, then the second's extras).
CombineResult combine(const MassFunction& m1, const MassFunction& m2);

MassFunction vacuous_extend(const MassFunction& m, const Scope& target);

MassFunction marginalize(const MassFunction& m, const std::vector<std::string>& keep);

Scope union_scope(const Scope& a, const Scope& b);

}  // namespace dstf
