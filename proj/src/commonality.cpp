#include "dstf/commonality.hpp"

#include <cmath>
#include <stdexcept>

#include "dstf/tuples.hpp"

namespace dstf {

namespace {

// Superset-sum zeta transform: v[A] <- sum over B >= A of v[B].
void zeta_superset(std::vector<double>& v, std::size_t nbits) {
  for (std::size_t i = 0; i < nbits; ++i) {
    std::size_t bit = std::size_t{1} << i;
    for (std::size_t mask = 0; mask < v.size(); ++mask)
      if (!(mask & bit)) v[mask] += v[mask | bit];
  }
}

void mobius_superset(std::vector<double>& v, std::size_t nbits) {
  for (std::size_t i = 0; i < nbits; ++i) {
    std::size_t bit = std::size_t{1} << i;
    for (std::size_t mask = 0; mask < v.size(); ++mask)
      if (!(mask & bit)) v[mask] -= v[mask | bit];
  }
}

std::vector<double> dense_mass(const MassFunction& m) {
  require_explicit_capacity(m.scope());
  std::size_t card = m.scope().frame_cardinality();
  std::vector<double> v(std::size_t{1} << card, 0.0);
  for (const auto& [k, w] : m.assignments())
    v[focal_tuple_mask(m.scope(), k)] += w;
  return v;
}

void check_same_scope(const CommonalityTable& a, const CommonalityTable& b) {
  if (a.scope != b.scope)
    throw std::invalid_argument("commonality tables over different scopes");
}

// Induced-mass sum of an unnormalized Q table (Moebius, empty set dropped).
double induced_mass_sum(const CommonalityTable& q, std::vector<double>* out_mass) {
  std::vector<double> v = q.values;
  mobius_superset(v, q.scope.frame_cardinality());
  v[0] = 0.0;
  double s = 0.0;
  for (double w : v) s += w;
  if (out_mass) *out_mass = std::move(v);
  return s;
}

}  // namespace

CommonalityTable q_table(const MassFunction& m) {
  CommonalityTable q{m.scope(), dense_mass(m)};
  zeta_superset(q.values, m.scope().frame_cardinality());
  return q;
}

MassFunction mass_from_q(const CommonalityTable& q, double drop_tol) {
  std::vector<double> v = q.values;
  mobius_superset(v, q.scope.frame_cardinality());
  std::map<FocalKey, double> out;
  for (std::size_t mask = 1; mask < v.size(); ++mask)
    if (std::fabs(v[mask]) > drop_tol)
      out.emplace(tuple_mask_to_key(q.scope, static_cast<std::uint32_t>(mask)), v[mask]);
  return MassFunction(q.scope, std::move(out));
}

QResult combine_q(const CommonalityTable& q1, const CommonalityTable& q2) {
  check_same_scope(q1, q2);
  QResult res;
  res.q.scope = q1.scope;
  res.q.values.resize(q1.values.size());
  for (std::size_t i = 0; i < q1.values.size(); ++i)
    res.q.values[i] = q1.values[i] * q2.values[i];
  double s = induced_mass_sum(res.q, nullptr);
  if (s == 0.0 || !std::isfinite(s)) {
    res.zero_valuation = true;
    return res;
  }
  for (auto& v : res.q.values) v /= s;
  res.q.values[0] = 1.0;
  return res;
}

QResult remove(const CommonalityTable& q1, const CommonalityTable& q2) {
  check_same_scope(q1, q2);
  QResult res;
  res.q.scope = q1.scope;
  res.q.values.resize(q1.values.size(), 0.0);
  for (std::size_t i = 1; i < q1.values.size(); ++i)
    if (q2.values[i] != 0.0) res.q.values[i] = q1.values[i] / q2.values[i];
  double s = induced_mass_sum(res.q, nullptr);
  if (s == 0.0 || !std::isfinite(s)) {
    res.zero_valuation = true;
    return res;
  }
  for (auto& v : res.q.values) v /= s;
  res.q.values[0] = 1.0;
  return res;
}

ConditionResult condition(const MassFunction& m, const std::vector<std::string>& on) {
  MassFunction marg = marginalize(m, on);
  CommonalityTable q1 = q_table(m);
  CommonalityTable q2 = q_table(vacuous_extend(marg, m.scope()));
  QResult rem = remove(q1, q2);
  ConditionResult res;
  if (rem.zero_valuation) {
    res.zero_valuation = true;
    res.mass = MassFunction(m.scope(), {});
    res.cls = classify(res.mass);
    return res;
  }
  res.mass = mass_from_q(rem.q);
  res.cls = classify(res.mass);
  return res;
}

DecompositionReport verify_decomposition(const MassFunction& m, const std::vector<std::string>& r,
                     const std::vector<std::string>& s,
                     const std::vector<std::string>& v, double tol) {
  const Scope& scope = m.scope();
  auto ri = scope.indices_of(r), si = scope.indices_of(s), vi = scope.indices_of(v);
  std::vector<bool> seen(scope.size(), false);
  for (auto set : {&ri, &si, &vi})
    for (auto i : *set) {
      if (seen[i])
        throw std::invalid_argument("r, s, v overlap on '" + scope.at(i).name + "'");
      seen[i] = true;
    }
  for (std::size_t i = 0; i < scope.size(); ++i)
    if (!seen[i])
      throw std::invalid_argument("r, s, v do not cover '" + scope.at(i).name + "'");

  std::vector<std::string> rv = r, sv = s;
  rv.insert(rv.end(), v.begin(), v.end());
  sv.insert(sv.end(), v.begin(), v.end());

  CommonalityTable q_rv = q_table(vacuous_extend(marginalize(m, rv), scope));
  CommonalityTable q_sv = q_table(vacuous_extend(marginalize(m, sv), scope));
  CommonalityTable q_v = q_table(vacuous_extend(marginalize(m, v), scope));

  // Route 1: combine both marginals, then remove the v-marginal.
  QResult joint = combine_q(q_rv, q_sv);
  if (joint.zero_valuation) throw std::runtime_error("marginal combination is inconsistent");
  QResult route1 = remove(joint.q, q_v);
  if (route1.zero_valuation) throw std::runtime_error("removal yields the zero valuation");

  // Route 2: condition each marginal on v, then combine with the v-marginal.
  QResult c_rv = remove(q_rv, q_v);
  QResult c_sv = remove(q_sv, q_v);
  if (c_rv.zero_valuation || c_sv.zero_valuation)
    throw std::runtime_error("conditioning yields the zero valuation");
  QResult route2 = combine_q(combine_q(c_rv.q, c_sv.q).q, q_v);
  if (route2.zero_valuation) throw std::runtime_error("conditional product is inconsistent");

  std::vector<double> m1 = route1.q.values, m2 = route2.q.values, m0 = dense_mass(m);
  std::size_t nbits = scope.frame_cardinality();
  mobius_superset(m1, nbits);
  mobius_superset(m2, nbits);
  m1[0] = m2[0] = 0.0;

  DecompositionReport rep;
  for (std::size_t mask = 1; mask < m0.size(); ++mask) {
    rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::fabs(m1[mask] - m0[mask]));
    rep.route_disagreement = std::max(rep.route_disagreement, std::fabs(m1[mask] - m2[mask]));
  }
  rep.holds = rep.max_abs_deviation <= tol;
  return rep;
}

}  // namespace dstf
