#include "dstf/mass.hpp"

#include <cmath>
#include <stdexcept>

#include "dstf/tuples.hpp"

namespace dstf {

namespace {

constexpr double kProperTol = 1e-12;
constexpr double kNormalTol = 1e-9;

void validate_key(const Scope& scope, const FocalKey& k) {
  if (const auto* parts = std::get_if<ProductParts>(&k)) {
    ProductFocalSet check(scope, *parts);  // throws on empty/out-of-frame parts
    (void)check;
    return;
  }
  const auto& tl = std::get<TupleList>(k);
  if (tl.tuples.empty()) throw std::invalid_argument("empty explicit focal set");
  require_explicit_capacity(scope);
  std::size_t card = scope.frame_cardinality();
  std::uint32_t prev = 0;
  bool first = true;
  for (auto t : tl.tuples) {
    if (t >= card) throw std::invalid_argument("tuple index outside product frame");
    if (!first && t <= prev) throw std::invalid_argument("tuple list not sorted unique");
    prev = t;
    first = false;
  }
}

}  // namespace

MassFunction::MassFunction(Scope scope, std::map<FocalKey, double> assignments)
    : scope_(std::move(scope)) {
  for (auto& [k, v] : assignments) {
    validate_key(scope_, k);
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite mass");
    if (v != 0.0) assignments_.emplace(k, v);
  }
}

double MassFunction::mass_of(const FocalKey& k) const {
  auto it = assignments_.find(k);
  return it == assignments_.end() ? 0.0 : it->second;
}

double MassFunction::total_mass() const {
  double s = 0.0;
  for (const auto& [k, v] : assignments_) s += v;
  return s;
}

bool MassFunction::all_product() const {
  for (const auto& [k, v] : assignments_)
    if (!is_product(k)) return false;
  return true;
}

std::string MassFunction::focal_to_string(const FocalKey& k) const {
  if (const auto* parts = std::get_if<ProductParts>(&k))
    return ProductFocalSet(scope_, *parts).to_string();
  const auto& tl = std::get<TupleList>(k);
  std::string out = "{";
  for (std::size_t j = 0; j < tl.tuples.size(); ++j) {
    if (j) out += ",";
    auto digits = decode_tuple(scope_, tl.tuples[j]);
    out += "(";
    for (std::size_t i = 0; i < scope_.size(); ++i) {
      if (i) out += ",";
      out += scope_.at(i).frame[digits[i]];
    }
    out += ")";
  }
  return out + "}";
}

MassFunction vacuous(const Scope& scope) {
  std::map<FocalKey, double> a;
  a.emplace(full_focal(scope).parts, 1.0);
  return MassFunction(scope, std::move(a));
}

ValuationClass classify(const MassFunction& m) {
  ValuationClass c;
  c.zero = m.assignments().empty();
  c.proper = true;
  double total = 0.0;
  for (const auto& [k, v] : m.assignments()) {
    if (v < -kProperTol) c.proper = false;
    total += v;
  }
  c.normal = !c.zero && std::fabs(total - 1.0) <= kNormalTol;
  c.positive_normal = c.normal && m.mass_of(full_focal(m.scope()).parts) > 0.0;
  return c;
}

namespace {

// Containment / intersection tests of a focal key against a product set,
// falling back to tuple masks for explicit keys.
bool key_within(const Scope& scope, const FocalKey& k, const ProductFocalSet& a) {
  if (const auto* parts = std::get_if<ProductParts>(&k))
    return parts_subset(*parts, a.parts);
  std::uint32_t am = focal_tuple_mask(scope, a.parts);
  std::uint32_t km = focal_tuple_mask(scope, k);
  return (km & ~am) == 0;
}

bool key_contains(const Scope& scope, const FocalKey& k, const ProductFocalSet& a) {
  if (const auto* parts = std::get_if<ProductParts>(&k))
    return parts_subset(a.parts, *parts);
  std::uint32_t am = focal_tuple_mask(scope, a.parts);
  std::uint32_t km = focal_tuple_mask(scope, k);
  return (am & ~km) == 0;
}

bool key_meets(const Scope& scope, const FocalKey& k, const ProductFocalSet& a) {
  if (const auto* parts = std::get_if<ProductParts>(&k))
    return !parts_disjoint(*parts, a.parts);
  std::uint32_t am = focal_tuple_mask(scope, a.parts);
  std::uint32_t km = focal_tuple_mask(scope, k);
  return (am & km) != 0;
}

void check_query(const MassFunction& m, const ProductFocalSet& a) {
  if (m.scope() != a.scope) throw std::invalid_argument("scope mismatch in query");
}

}  // namespace

double bel_of(const MassFunction& m, const ProductFocalSet& a) {
  check_query(m, a);
  double s = 0.0;
  for (const auto& [k, v] : m.assignments())
    if (key_within(m.scope(), k, a)) s += v;
  return s;
}

double pl_of(const MassFunction& m, const ProductFocalSet& a) {
  check_query(m, a);
  double s = 0.0;
  for (const auto& [k, v] : m.assignments())
    if (key_meets(m.scope(), k, a)) s += v;
  return s;
}

double q_of(const MassFunction& m, const ProductFocalSet& a) {
  check_query(m, a);
  double s = 0.0;
  for (const auto& [k, v] : m.assignments())
    if (key_contains(m.scope(), k, a)) s += v;
  return s;
}

Scope union_scope(const Scope& a, const Scope& b) {
  std::vector<Variable> vars = a.variables();
  for (const auto& v : b.variables()) {
    int i = a.index_of(v.name);
    if (i < 0) {
      vars.push_back(v);
    } else if (a.at(static_cast<std::size_t>(i)) != v) {
      throw std::invalid_argument("conflicting frames for variable '" + v.name + "'");
    }
  }
  return Scope(std::move(vars));
}

MassFunction vacuous_extend(const MassFunction& m, const Scope& target) {
  if (!target.contains_all(m.scope()))
    throw std::invalid_argument("target scope does not cover the valuation's scope");
  std::map<FocalKey, double> out;
  for (const auto& [k, v] : m.assignments()) {
    const auto* parts = std::get_if<ProductParts>(&k);
    if (!parts)
      throw std::invalid_argument("vacuous extension of explicit focal sets is unsupported");
    ProductFocalSet f(m.scope(), *parts);
    out[vacuous_extend_focal(f, target).parts] += v;
  }
  return MassFunction(target, std::move(out));
}

CombineResult combine(const MassFunction& m1, const MassFunction& m2) {
  Scope target = union_scope(m1.scope(), m2.scope());
  MassFunction a = m1.scope() == target ? m1 : vacuous_extend(m1, target);
  MassFunction b = m2.scope() == target ? m2 : vacuous_extend(m2, target);
  if (!a.all_product() || !b.all_product())
    throw std::invalid_argument("combine requires product-form focal sets");

  CombineResult res;
  std::map<FocalKey, double> acc;
  double kept = 0.0;
  for (const auto& [ka, va] : a.assignments()) {
    const auto& pa = std::get<ProductParts>(ka);
    for (const auto& [kb, vb] : b.assignments()) {
      const auto& pb = std::get<ProductParts>(kb);
      ProductParts inter(pa.size());
      bool empty = false;
      for (std::size_t i = 0; i < pa.size(); ++i) {
        inter[i] = pa[i] & pb[i];
        if (inter[i] == 0) { empty = true; break; }
      }
      double w = va * vb;
      if (empty) {
        res.conflict += w;
      } else {
        acc[std::move(inter)] += w;
        kept += w;
      }
    }
  }
  if (kept == 0.0) {
    res.inconsistent = true;
    res.mass = MassFunction(target, {});
    return res;
  }
  for (auto& [k, v] : acc) v /= kept;
  res.mass = MassFunction(target, std::move(acc));
  return res;
}

MassFunction marginalize(const MassFunction& m, const std::vector<std::string>& keep) {
  auto idx = m.scope().indices_of(keep);
  if (idx.empty()) throw std::invalid_argument("marginalization scope is empty");
  std::vector<Variable> vs;
  for (auto i : idx) vs.push_back(m.scope().at(i));
  Scope sub(std::move(vs));

  std::map<FocalKey, double> out;
  for (const auto& [k, v] : m.assignments()) {
    if (const auto* parts = std::get_if<ProductParts>(&k)) {
      ProductParts p;
      for (auto i : idx) p.push_back((*parts)[i]);
      out[std::move(p)] += v;
    } else {
      // Explicit focal set: project tuples, then re-decompose.
      const auto& tl = std::get<TupleList>(k);
      std::uint32_t mask = 0;
      for (auto t : tl.tuples) {
        auto digits = decode_tuple(m.scope(), t);
        std::vector<std::size_t> sub_digits;
        for (auto i : idx) sub_digits.push_back(digits[i]);
        mask |= std::uint32_t{1} << encode_tuple(sub, sub_digits);
      }
      out[tuple_mask_to_key(sub, mask)] += v;
    }
  }
  return MassFunction(sub, std::move(out));
}

}  // namespace dstf
