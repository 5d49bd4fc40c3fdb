#include "dstf/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace dstf {

void validate_partition(const Scope& scope, const DimensionPartition& part) {
  if (part.r.empty() || part.s.empty() || part.v.empty())
    throw std::invalid_argument("r, s, v must all be nonempty");
  auto ri = scope.indices_of(part.r);
  auto si = scope.indices_of(part.s);
  auto vi = scope.indices_of(part.v);
  std::vector<bool> seen(scope.size(), false);
  for (auto set : {&ri, &si, &vi})
    for (auto i : *set) {
      if (seen[i])
        throw std::invalid_argument("partition blocks overlap on '" + scope.at(i).name + "'");
      seen[i] = true;
    }
  for (std::size_t i = 0; i < scope.size(); ++i)
    if (!seen[i])
      throw std::invalid_argument("partition does not cover '" + scope.at(i).name + "'");
}

double FTable::at(const ProductParts& rs, const ProductParts& v) const {
  auto it = entries.find({rs, v});
  return it == entries.end() ? 0.0 : it->second;
}

std::vector<ProductParts> FTable::rs_parts() const {
  std::set<ProductParts> s;
  for (const auto& [k, w] : entries) s.insert(k.first);
  return {s.begin(), s.end()};
}

std::vector<ProductParts> FTable::v_parts() const {
  std::set<ProductParts> s;
  for (const auto& [k, w] : entries) s.insert(k.second);
  return {s.begin(), s.end()};
}

namespace {

ProductParts select(const ProductParts& parts, const std::vector<std::size_t>& idx) {
  ProductParts out;
  for (auto i : idx) out.push_back(parts[i]);
  return out;
}

}  // namespace

FTable f_measure(const MassFunction& m, const DimensionPartition& part) {
  validate_partition(m.scope(), part);
  if (!m.all_product())
    throw std::invalid_argument("F measure requires product-form focal sets");
  if (!classify(m).proper)
    throw std::invalid_argument("F measure is defined for proper mass functions only");

  std::vector<std::string> rs_names = part.r;
  rs_names.insert(rs_names.end(), part.s.begin(), part.s.end());
  auto rs_idx = m.scope().indices_of(rs_names);
  auto v_idx = m.scope().indices_of(part.v);

  FTable f;
  f.rs_scope = m.scope().subscope(rs_names);
  f.v_scope = m.scope().subscope(part.v);
  f.partition = part;

  // Split each focal set across the partition.
  std::vector<std::pair<std::pair<ProductParts, ProductParts>, double>> split;
  std::set<ProductParts> v_seen;
  for (const auto& [k, w] : m.assignments()) {
    const auto& parts = std::get<ProductParts>(k);
    auto rs = select(parts, rs_idx);
    auto v = select(parts, v_idx);
    v_seen.insert(v);
    split.push_back({{std::move(rs), std::move(v)}, w});
  }

  for (const auto& [key, w] : split) {
    for (const auto& v : v_seen) {
      if (!parts_subset(v, key.second)) continue;
      f.entries[{key.first, v}] += w;
    }
  }
  // Drop zero cells (possible only through cancellation; masses are >= 0).
  std::erase_if(f.entries, [](const auto& e) { return e.second == 0.0; });
  return f;
}

std::map<std::pair<ProductParts, ProductParts>, double> f_marginal_r(const FTable& f) {
  auto r_idx = f.rs_scope.indices_of(f.partition.r);
  std::map<std::pair<ProductParts, ProductParts>, double> out;
  for (const auto& [k, w] : f.entries) out[{select(k.first, r_idx), k.second}] += w;
  return out;
}

std::map<std::pair<ProductParts, ProductParts>, double> f_marginal_s(const FTable& f) {
  auto s_idx = f.rs_scope.indices_of(f.partition.s);
  std::map<std::pair<ProductParts, ProductParts>, double> out;
  for (const auto& [k, w] : f.entries) out[{select(k.first, s_idx), k.second}] += w;
  return out;
}

std::map<ProductParts, double> f_marginal_v(const FTable& f) {
  std::map<ProductParts, double> out;
  for (const auto& [k, w] : f.entries) out[k.second] += w;
  return out;
}

namespace {

void record_cell(FactorizationReport& rep, ProductParts rs, ProductParts v, double lhs,
                 double rhs) {
  if (lhs == 0.0 && rhs == 0.0) return;  // both-zero cells are skipped, not passes
  CellDeviation cell{std::move(rs), std::move(v), lhs, rhs, std::fabs(lhs - rhs)};
  rep.max_abs_deviation = std::max(rep.max_abs_deviation, cell.abs_deviation);
  double ref = std::fabs(rhs);
  if (ref >= 1e-12)
    rep.max_rel_deviation = std::max(rep.max_rel_deviation, cell.abs_deviation / ref);
  rep.per_cell.push_back(std::move(cell));
}

}  // namespace

FactorizationReport check_noninfluence(const FTable& f, const MassFunction& m_rs,
                                       double tol) {
  if (m_rs.scope() != f.rs_scope)
    throw std::invalid_argument("m_rs is not over the table's (r,s) scope");
  auto fv = f_marginal_v(f);

  std::set<ProductParts> rs_set;
  for (const auto& p : f.rs_parts()) rs_set.insert(p);
  for (const auto& [k, w] : m_rs.assignments()) {
    if (!is_product(k))
      throw std::invalid_argument("non-influence check requires product-form marginals");
    rs_set.insert(std::get<ProductParts>(k));
  }

  FactorizationReport rep;
  for (const auto& rs : rs_set)
    for (const auto& [v, fvv] : fv)
      record_cell(rep, rs, v, f.at(rs, v), m_rs.mass_of(rs) * fvv);
  rep.holds = rep.max_abs_deviation <= tol;
  return rep;
}

FactorizationReport check_cond_independence(const FTable& f, CondIndepVariant variant,
                                            double tol) {
  auto fr = f_marginal_r(f);
  auto fs = f_marginal_s(f);
  auto fv = f_marginal_v(f);
  auto r_idx = f.rs_scope.indices_of(f.partition.r);
  auto s_idx = f.rs_scope.indices_of(f.partition.s);

  auto lookup = [](const auto& table, const ProductParts& a, const ProductParts& b) {
    auto it = table.find(std::make_pair(a, b));
    return it == table.end() ? 0.0 : it->second;
  };

  FactorizationReport rep;
  for (const auto& rs : f.rs_parts()) {
    ProductParts rp = select(rs, r_idx), sp = select(rs, s_idx);
    for (const auto& [v, fvv] : fv) {
      double product = lookup(fr, rp, v) * lookup(fs, sp, v);
      if (variant == CondIndepVariant::verbatim) {
        record_cell(rep, rs, v, f.at(rs, v), product);
      } else {
        if (fvv == 0.0) continue;
        record_cell(rep, rs, v, f.at(rs, v) * fvv, product);
      }
    }
  }
  rep.holds = rep.max_abs_deviation <= tol;
  return rep;
}

std::vector<RatioViolation> ratio_obstruction(const MassFunction& m,
                                              const DimensionPartition& part,
                                              double rel_tol) {
  validate_partition(m.scope(), part);
  if (!m.all_product())
    throw std::invalid_argument("ratio check requires product-form focal sets");

  std::vector<std::string> rs_names = part.r;
  rs_names.insert(rs_names.end(), part.s.begin(), part.s.end());
  auto rs_idx = m.scope().indices_of(rs_names);
  auto v_idx = m.scope().indices_of(part.v);

  std::map<ProductParts, std::map<ProductParts, double>> by_rs;
  for (const auto& [k, w] : m.assignments()) {
    const auto& parts = std::get<ProductParts>(k);
    by_rs[select(parts, rs_idx)][select(parts, v_idx)] += w;
  }

  std::vector<RatioViolation> out;
  for (auto it1 = by_rs.begin(); it1 != by_rs.end(); ++it1) {
    for (auto it2 = std::next(it1); it2 != by_rs.end(); ++it2) {
      std::vector<ProductParts> common;
      for (const auto& [v, w] : it1->second)
        if (it2->second.count(v)) common.push_back(v);
      for (std::size_t a = 0; a < common.size(); ++a) {
        for (std::size_t b = a + 1; b < common.size(); ++b) {
          double r1 = it1->second.at(common[a]) / it1->second.at(common[b]);
          double r2 = it2->second.at(common[a]) / it2->second.at(common[b]);
          double scale = std::max({1.0, std::fabs(r1), std::fabs(r2)});
          if (std::fabs(r1 - r2) > rel_tol * scale)
            out.push_back({it1->first, it2->first, common[a], common[b], r1, r2});
        }
      }
    }
  }
  return out;
}

}  // namespace dstf
