#pragma once

#include <vector>

#include "dstf/mass.hpp"

namespace dstf {

// Explicit-mode commonality function: values[A] = Q(A) for every subset A of
// the product frame, indexed by tuple bitmask. values[0] = Q(emptyset) = sum
// of all masses.
struct CommonalityTable {
  Scope scope;
  std::vector<double> values;

  double at_mask(std::uint32_t mask) const { return values[mask]; }
};

CommonalityTable q_table(const MassFunction& m);

// Moebius inversion of a commonality table. Masses below the drop threshold
// are treated as zero; negative masses are kept.
MassFunction mass_from_q(const CommonalityTable& q, double drop_tol = 1e-12);

struct QResult {
  bool zero_valuation = false;  // inconsistency / no valid normalization
  CommonalityTable q;
};

// Pointwise product renormalized so the induced mass sums to 1.
QResult combine_q(const CommonalityTable& q1, const CommonalityTable& q2);

// Shenoy removal: Q = c * Q1/Q2 where Q2 != 0, 0 elsewhere; c normalizes the
// induced mass. Result may be pseudo (negative induced masses).
QResult remove(const CommonalityTable& q1, const CommonalityTable& q2);

struct ConditionResult {
  bool zero_valuation = false;
  MassFunction mass;
  ValuationClass cls;
};

// Bel conditioned on the sub-scope p: Bel minus (by removal) its p-marginal.
ConditionResult condition(const MassFunction& m, const std::vector<std::string>& on);

struct DecompositionReport {
  bool holds = false;
  double max_abs_deviation = 0.0;   // decomposition route vs m
  double route_disagreement = 0.0;  // conditional-product route vs removal route
};

// Tests whether m decomposes as the combination of its (r u v)- and
// (s u v)-conditionals with its v-marginal. Both algebraic routes are
// computed and compared.
DecompositionReport verify_decomposition(const MassFunction& m, const std::vector<std::string>& r,
                     const std::vector<std::string>& s,
                     const std::vector<std::string>& v, double tol);

}  // namespace dstf
