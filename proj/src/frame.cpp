#include "dstf/frame.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <stdexcept>

namespace dstf {

int Variable::label_index(const std::string& label) const {
  for (std::size_t i = 0; i < frame.size(); ++i)
    if (frame[i] == label) return static_cast<int>(i);
  return -1;
}

Scope::Scope(std::vector<Variable> vars) : vars_(std::move(vars)) {
  std::set<std::string> names;
  for (const auto& v : vars_) {
    if (v.name.empty()) throw std::invalid_argument("variable name is empty");
    if (v.frame.empty())
      throw std::invalid_argument("variable '" + v.name + "' has an empty frame");
    if (v.frame.size() > 31)
      throw std::invalid_argument("variable '" + v.name + "' frame too large");
    std::set<std::string> labels(v.frame.begin(), v.frame.end());
    if (labels.size() != v.frame.size())
      throw std::invalid_argument("duplicate label in frame of '" + v.name + "'");
    if (!names.insert(v.name).second)
      throw std::invalid_argument("duplicate variable '" + v.name + "'");
  }
}

int Scope::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return static_cast<int>(i);
  return -1;
}

std::size_t Scope::frame_cardinality() const {
  std::size_t n = 1;
  for (const auto& v : vars_) n *= v.size();
  return n;
}

std::vector<std::size_t> Scope::indices_of(const std::vector<std::string>& names) const {
  std::vector<std::size_t> idx;
  for (const auto& n : names) {
    int i = index_of(n);
    if (i < 0) throw std::invalid_argument("unknown variable '" + n + "'");
    idx.push_back(static_cast<std::size_t>(i));
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

Scope Scope::subscope(const std::vector<std::string>& names) const {
  std::vector<Variable> vs;
  for (auto i : indices_of(names)) vs.push_back(vars_[i]);
  return Scope(std::move(vs));
}

bool Scope::contains_all(const Scope& other) const {
  for (const auto& v : other.variables()) {
    int i = index_of(v.name);
    if (i < 0 || vars_[i] != v) return false;
  }
  return true;
}

ProductFocalSet::ProductFocalSet(Scope s, ProductParts p)
    : scope(std::move(s)), parts(std::move(p)) {
  if (parts.size() != scope.size())
    throw std::invalid_argument("part count does not match scope");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i] == 0)
      throw std::invalid_argument("empty part for variable '" + scope.at(i).name + "'");
    if (parts[i] & ~scope.at(i).full_mask())
      throw std::invalid_argument("part outside frame of '" + scope.at(i).name + "'");
  }
}

std::size_t parts_tuple_count(const ProductParts& p) {
  std::size_t n = 1;
  for (auto m : p) n *= std::popcount(m);
  return n;
}

std::size_t ProductFocalSet::tuple_count() const { return parts_tuple_count(parts); }

std::string part_to_string(const Variable& var, PartMask mask) {
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 0; i < var.size(); ++i) {
    if (!(mask >> i & 1)) continue;
    if (!first) out += ",";
    out += var.frame[i];
    first = false;
  }
  return out + "}";
}

std::string ProductFocalSet::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += "x";
    out += part_to_string(scope.at(i), parts[i]);
  }
  return out;
}

ProductFocalSet full_focal(const Scope& scope) {
  ProductParts p;
  for (const auto& v : scope.variables()) p.push_back(v.full_mask());
  return ProductFocalSet(scope, std::move(p));
}

ProductFocalSet project_focal(const ProductFocalSet& a,
                              const std::vector<std::string>& keep) {
  auto idx = a.scope.indices_of(keep);
  if (idx.empty()) throw std::invalid_argument("projection scope is empty");
  std::vector<Variable> vs;
  ProductParts p;
  for (auto i : idx) {
    vs.push_back(a.scope.at(i));
    p.push_back(a.parts[i]);
  }
  return ProductFocalSet(Scope(std::move(vs)), std::move(p));
}

IntersectResult intersect_focal(const ProductFocalSet& a, const ProductFocalSet& b) {
  if (a.scope != b.scope) throw std::invalid_argument("scope mismatch in intersection");
  ProductParts p(a.parts.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = a.parts[i] & b.parts[i];
    if (p[i] == 0) return {};
  }
  return {false, ProductFocalSet(a.scope, std::move(p))};
}

ProductFocalSet vacuous_extend_focal(const ProductFocalSet& a, const Scope& target) {
  if (!target.contains_all(a.scope))
    throw std::invalid_argument("target scope does not cover the focal set's scope");
  ProductParts p;
  for (const auto& v : target.variables()) {
    int i = a.scope.index_of(v.name);
    p.push_back(i >= 0 ? a.parts[i] : v.full_mask());
  }
  return ProductFocalSet(target, std::move(p));
}

bool parts_subset(const ProductParts& a, const ProductParts& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] & ~b[i]) return false;
  return true;
}

bool parts_disjoint(const ProductParts& a, const ProductParts& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if ((a[i] & b[i]) == 0) return true;
  return false;
}

SetRelation focal_relation(const ProductFocalSet& a, const ProductFocalSet& b) {
  if (a.scope != b.scope) throw std::invalid_argument("scope mismatch in relation");
  bool ab = parts_subset(a.parts, b.parts);
  bool ba = parts_subset(b.parts, a.parts);
  if (ab && ba) return SetRelation::equal;
  if (ab) return SetRelation::subset;
  if (ba) return SetRelation::superset;
  if (parts_disjoint(a.parts, b.parts)) return SetRelation::disjoint;
  return SetRelation::overlapping;
}

ExplicitSubset enumerate_tuples(const ProductFocalSet& a) {
  std::size_t card = a.scope.frame_cardinality();
  if (card > kExplicitCapacity)
    throw std::invalid_argument("product frame exceeds explicit-mode capacity");
  ExplicitSubset out{a.scope, 0};
  std::size_t n = a.scope.size();
  // Mixed-radix walk over the product frame, first variable fastest.
  std::vector<std::size_t> digit(n, 0);
  for (std::size_t t = 0; t < card; ++t) {
    bool in = true;
    for (std::size_t i = 0; i < n; ++i)
      if (!(a.parts[i] >> digit[i] & 1)) { in = false; break; }
    if (in) out.tuples |= std::uint32_t{1} << t;
    for (std::size_t i = 0; i < n; ++i) {
      if (++digit[i] < a.scope.at(i).size()) break;
      digit[i] = 0;
    }
  }
  return out;
}

}  // namespace dstf
