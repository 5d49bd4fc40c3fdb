#pragma once

#include <map>
#include <string>
#include <vector>

#include "dstf/mass.hpp"

namespace dstf {

// Disjoint nonempty variable subsets covering the scope.
struct DimensionPartition {
  std::vector<std::string> r, s, v;
};

void validate_partition(const Scope& scope, const DimensionPartition& part);

// The F measure: exact mass matching on the (r u s) part, commonality-style
// superset accumulation on the v part. Keys are (rs-parts, v-parts) over the
// respective sub-scopes; zero cells are omitted.
struct FTable {
  Scope rs_scope;
  Scope v_scope;
  DimensionPartition partition;
  std::map<std::pair<ProductParts, ProductParts>, double> entries;

  double at(const ProductParts& rs, const ProductParts& v) const;
  std::vector<ProductParts> rs_parts() const;  // distinct, canonical order
  std::vector<ProductParts> v_parts() const;
};

FTable f_measure(const MassFunction& m, const DimensionPartition& part);

// Marginals of F: sum out s (keep r), sum out r (keep s), or sum out both.
std::map<std::pair<ProductParts, ProductParts>, double> f_marginal_r(const FTable& f);
std::map<std::pair<ProductParts, ProductParts>, double> f_marginal_s(const FTable& f);
std::map<ProductParts, double> f_marginal_v(const FTable& f);

enum class CondIndepVariant { verbatim, normalized };

struct CellDeviation {
  ProductParts rs;  // empty for v-only cells
  ProductParts v;
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_deviation = 0.0;
};

struct FactorizationReport {
  bool holds = false;
  double max_abs_deviation = 0.0;
  double max_rel_deviation = 0.0;
  std::vector<CellDeviation> per_cell;
};

// Identity F(RS,V) = m_rs(RS) * F_v(V): v carries no information about the
// (r,s) relationship. m_rs must be the (r u s)-marginal of the same mass.
FactorizationReport check_noninfluence(const FTable& f, const MassFunction& m_rs,
                                       double tol);

// Conditional-independence identity on F. The verbatim variant tests
// F(RS,V) = F_r(R,V) * F_s(S,V); the normalized variant scales the left side
// by F_v(V).
FactorizationReport check_cond_independence(const FTable& f, CondIndepVariant variant,
                                            double tol);

struct RatioViolation {
  ProductParts rs1, rs2;  // the two rs-parts compared
  ProductParts va, vb;    // the v-part pair
  double ratio1 = 0.0;    // m(rs1,va)/m(rs1,vb)
  double ratio2 = 0.0;    // m(rs2,va)/m(rs2,vb)
};

// Cross-ratio proportionality check across rs-parts sharing v-parts; a
// nonempty result obstructs any proper-belief factorization of the v block.
std::vector<RatioViolation> ratio_obstruction(const MassFunction& m,
                                              const DimensionPartition& part,
                                              double rel_tol = 1e-9);

}  // namespace dstf
