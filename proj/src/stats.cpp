#include "dstf/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace dstf {

namespace {

constexpr int kIpfMaxIterations = 1000;
constexpr double kIpfTol = 1e-8;

ProductParts select(const ProductParts& parts, const std::vector<std::size_t>& idx) {
  ProductParts out;
  for (auto i : idx) out.push_back(parts[i]);
  return out;
}

PartMask mask_of_labels(const Variable& var, const std::vector<std::string>& labels) {
  PartMask m = 0;
  for (const auto& l : labels) {
    int i = var.label_index(l);
    if (i < 0)
      throw std::invalid_argument("unknown label '" + l + "' for variable '" + var.name + "'");
    m |= PartMask{1} << i;
  }
  return m;
}

// Match a declared impossible combination against concrete (x,y,z) levels.
bool spec_matches(const StructuralZeroSpec& spec, const Scope& r_scope,
                  const ProductParts& x, const Scope& s_scope, const ProductParts& y,
                  const Scope& v_scope, const ProductParts& z) {
  auto block_matches = [&spec](const Scope& scope, const ProductParts& parts) {
    for (std::size_t i = 0; i < scope.size(); ++i) {
      auto it = spec.levels.find(scope.at(i).name);
      if (it == spec.levels.end()) continue;
      if (mask_of_labels(scope.at(i), it->second) != parts[i]) return false;
    }
    return true;
  };
  return block_matches(r_scope, x) && block_matches(s_scope, y) && block_matches(v_scope, z);
}

}  // namespace

long ContingencyTable::level_total(std::size_t k) const {
  long n = 0;
  for (std::size_t i = 0; i < nx(); ++i)
    for (std::size_t j = 0; j < ny(); ++j) n += counts[i][j][k];
  return n;
}

std::size_t ContingencyTable::n_xy() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < nx(); ++i)
    for (std::size_t j = 0; j < ny(); ++j) {
      bool all_structural = true;
      for (std::size_t k = 0; k < nz(); ++k)
        if (!structural[i][j][k]) { all_structural = false; break; }
      if (!all_structural) ++n;
    }
  return n;
}

std::size_t ContingencyTable::structural_zero_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < nx(); ++i)
    for (std::size_t j = 0; j < ny(); ++j)
      for (std::size_t k = 0; k < nz(); ++k)
        if (structural[i][j][k]) ++n;
  return n;
}

std::vector<ProductParts> observed_z_levels(const RecordSet& records,
                                            const std::vector<std::string>& v) {
  auto v_idx = records.scope.indices_of(v);
  std::set<ProductParts> seen;
  for (const auto& rec : records.records) seen.insert(select(rec, v_idx));
  return {seen.begin(), seen.end()};
}

ContingencyTable build_contingency(const RecordSet& records, const DimensionPartition& part,
                                   const std::vector<ProductParts>& z_levels,
                                   const std::vector<StructuralZeroSpec>& impossible) {
  if (records.records.empty()) throw std::invalid_argument("empty record set");
  validate_partition(records.scope, part);

  std::vector<std::string> rs_names = part.r;
  auto r_idx = records.scope.indices_of(part.r);
  auto s_idx = records.scope.indices_of(part.s);
  auto v_idx = records.scope.indices_of(part.v);

  ContingencyTable t;
  t.r_scope = records.scope.subscope(part.r);
  t.s_scope = records.scope.subscope(part.s);
  t.v_scope = records.scope.subscope(part.v);
  t.z_levels = z_levels;
  t.n_records = static_cast<long>(records.records.size());

  std::set<ProductParts> xs, ys;
  for (const auto& rec : records.records) {
    xs.insert(select(rec, r_idx));
    ys.insert(select(rec, s_idx));
  }
  t.x_levels.assign(xs.begin(), xs.end());
  t.y_levels.assign(ys.begin(), ys.end());

  t.counts.assign(t.nx(), std::vector<std::vector<long>>(t.ny(), std::vector<long>(t.nz(), 0)));
  t.structural.assign(t.nx(),
                      std::vector<std::vector<bool>>(t.ny(), std::vector<bool>(t.nz(), false)));
  for (std::size_t i = 0; i < t.nx(); ++i)
    for (std::size_t j = 0; j < t.ny(); ++j)
      for (std::size_t k = 0; k < t.nz(); ++k)
        for (const auto& spec : impossible)
          if (spec_matches(spec, t.r_scope, t.x_levels[i], t.s_scope, t.y_levels[j], t.v_scope,
                           t.z_levels[k]))
            t.structural[i][j][k] = true;

  auto index_of = [](const std::vector<ProductParts>& levels, const ProductParts& p) {
    return std::lower_bound(levels.begin(), levels.end(), p) - levels.begin();
  };
  for (const auto& rec : records.records) {
    std::size_t i = index_of(t.x_levels, select(rec, r_idx));
    std::size_t j = index_of(t.y_levels, select(rec, s_idx));
    ProductParts v = select(rec, v_idx);
    for (std::size_t k = 0; k < t.nz(); ++k) {
      if (t.structural[i][j][k]) continue;
      if (parts_subset(t.z_levels[k], v)) ++t.counts[i][j][k];
    }
  }
  return t;
}

GateReport sample_size_gate(const ContingencyTable& table) {
  GateReport g;
  g.n_xy = table.n_xy();
  g.lower = 6 * static_cast<long>(g.n_xy);
  g.upper = 25 * static_cast<long>(g.n_xy);
  g.all_ok = true;
  for (std::size_t k = 0; k < table.nz(); ++k) {
    long n = table.level_total(k);
    g.level_sizes.push_back(n);
    GateVerdict v = GateVerdict::ok;
    if (n < g.lower) v = GateVerdict::too_small;
    else if (n > g.upper) v = GateVerdict::too_large;
    if (v != GateVerdict::ok) g.all_ok = false;
    g.verdicts.push_back(v);
  }
  g.recode_recommended = !g.all_ok;
  return g;
}

int degrees_of_freedom(int n_x, int n_y, int k, int n_structural_zeros) {
  if (n_x < 1 || n_y < 1 || k < 1 || n_structural_zeros < 0)
    throw std::invalid_argument("invalid degrees-of-freedom arguments");
  int df = n_x * n_y * k - 1 - (n_x - 1) - (n_y - 1) - (k - 1) - (n_x - 1) * (n_y - 1) -
           n_structural_zeros;
  if (df <= 0) throw std::invalid_argument("nonpositive degrees of freedom");
  return df;
}

namespace {

// Regularized lower incomplete gamma by series expansion (x < s+1).
double gamma_p_series(double s, double x) {
  double term = 1.0 / s, sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (s + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Regularized upper incomplete gamma by continued fraction (x >= s+1),
// modified Lentz.
double gamma_q_cf(double s, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

}  // namespace

double chi_square_pvalue(double chi2, int df) {
  if (chi2 < 0.0 || !std::isfinite(chi2)) throw std::invalid_argument("chi2 must be >= 0");
  if (df < 1) throw std::invalid_argument("df must be >= 1");
  if (chi2 == 0.0) return 1.0;
  double s = df / 2.0, x = chi2 / 2.0;
  if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
  return gamma_q_cf(s, x);
}

LogLinearFit fit_loglinear(const ContingencyTable& table) {
  std::size_t nx = table.nx(), ny = table.ny(), nz = table.nz();
  LogLinearFit fit;

  // Observed margins.
  std::vector<std::vector<double>> xy_margin(nx, std::vector<double>(ny, 0.0));
  std::vector<double> z_margin(nz, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t k = 0; k < nz; ++k) {
        double c = static_cast<double>(table.counts[i][j][k]);
        xy_margin[i][j] += c;
        z_margin[k] += c;
        total += c;
      }
  if (total <= 0.0) throw std::invalid_argument("table has no positive counts");

  // IPF for the no-three-way-interaction model [XY][Z].
  fit.fitted.assign(nx, std::vector<std::vector<double>>(ny, std::vector<double>(nz, 0.0)));
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t k = 0; k < nz; ++k)
        if (!table.structural[i][j][k]) fit.fitted[i][j][k] = 1.0;

  for (fit.iterations = 0; fit.iterations < kIpfMaxIterations; ++fit.iterations) {
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) {
        double cur = 0.0;
        for (std::size_t k = 0; k < nz; ++k) cur += fit.fitted[i][j][k];
        double scale = cur > 0.0 ? xy_margin[i][j] / cur : 0.0;
        for (std::size_t k = 0; k < nz; ++k) fit.fitted[i][j][k] *= scale;
      }
    for (std::size_t k = 0; k < nz; ++k) {
      double cur = 0.0;
      for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) cur += fit.fitted[i][j][k];
      double scale = cur > 0.0 ? z_margin[k] / cur : 0.0;
      for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) fit.fitted[i][j][k] *= scale;
    }
    // Convergence: both margins reproduced to relative tolerance.
    double worst = 0.0;
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) {
        double cur = 0.0;
        for (std::size_t k = 0; k < nz; ++k) cur += fit.fitted[i][j][k];
        double ref = std::max(1.0, xy_margin[i][j]);
        worst = std::max(worst, std::fabs(cur - xy_margin[i][j]) / ref);
      }
    for (std::size_t k = 0; k < nz; ++k) {
      double cur = 0.0;
      for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) cur += fit.fitted[i][j][k];
      double ref = std::max(1.0, z_margin[k]);
      worst = std::max(worst, std::fabs(cur - z_margin[k]) / ref);
    }
    if (worst <= kIpfTol) {
      fit.converged = true;
      ++fit.iterations;
      break;
    }
  }
  if (!fit.converged)
    throw std::runtime_error("IPF did not converge within the iteration cap");

  // Chi-square over admissible cells; fitted-zero cells with positive counts
  // are excluded and each costs one degree of freedom.
  fit.chi2 = 0.0;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t k = 0; k < nz; ++k) {
        if (table.structural[i][j][k]) continue;
        double obs = static_cast<double>(table.counts[i][j][k]);
        double exp = fit.fitted[i][j][k];
        if (exp <= 0.0) {
          if (obs > 0.0) fit.excluded_cells.push_back({i, j, k});
          continue;
        }
        double d = obs - exp;
        fit.chi2 += d * d / exp;
      }
  fit.df = degrees_of_freedom(static_cast<int>(nx), static_cast<int>(ny),
                              static_cast<int>(nz),
                              static_cast<int>(table.structural_zero_count())) -
           static_cast<int>(fit.excluded_cells.size());
  if (fit.df <= 0) throw std::invalid_argument("nonpositive degrees of freedom after exclusions");
  fit.p_value = chi_square_pvalue(fit.chi2, fit.df);
  fit.residuals = standardized_residuals(table, fit);

  // Contrast extraction from log fitted values (exact for strictly positive
  // fits of this decomposable model).
  bool all_positive = true;
  for (std::size_t i = 0; i < nx && all_positive; ++i)
    for (std::size_t j = 0; j < ny && all_positive; ++j)
      for (std::size_t k = 0; k < nz; ++k)
        if (fit.fitted[i][j][k] <= 0.0) { all_positive = false; break; }
  fit.delta_x.assign(nx, 0.0);
  fit.delta_y.assign(ny, 0.0);
  fit.delta_z.assign(nz, 0.0);
  fit.delta_xy.assign(nx, std::vector<double>(ny, 0.0));
  if (all_positive) {
    std::vector<std::vector<std::vector<double>>> L(
        nx, std::vector<std::vector<double>>(ny, std::vector<double>(nz)));
    double grand = 0.0;
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t k = 0; k < nz; ++k) {
          L[i][j][k] = std::log(fit.fitted[i][j][k]);
          grand += L[i][j][k];
        }
    grand /= static_cast<double>(nx * ny * nz);
    fit.intercept = grand;
    for (std::size_t i = 0; i < nx; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t k = 0; k < nz; ++k) s += L[i][j][k];
      fit.delta_x[i] = s / static_cast<double>(ny * nz) - grand;
    }
    for (std::size_t j = 0; j < ny; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t k = 0; k < nz; ++k) s += L[i][j][k];
      fit.delta_y[j] = s / static_cast<double>(nx * nz) - grand;
    }
    for (std::size_t k = 0; k < nz; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) s += L[i][j][k];
      fit.delta_z[k] = s / static_cast<double>(nx * ny) - grand;
    }
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < nz; ++k) s += L[i][j][k];
        fit.delta_xy[i][j] =
            s / static_cast<double>(nz) - grand - fit.delta_x[i] - fit.delta_y[j];
      }
    fit.contrasts_valid = true;
  }
  return fit;
}

std::vector<std::vector<std::vector<double>>> standardized_residuals(
    const ContingencyTable& table, const LogLinearFit& fit) {
  std::size_t nx = table.nx(), ny = table.ny(), nz = table.nz();
  if (fit.fitted.size() != nx || fit.fitted[0].size() != ny || fit.fitted[0][0].size() != nz)
    throw std::invalid_argument("fit does not match table dimensions");
  std::vector<std::vector<std::vector<double>>> res(
      nx, std::vector<std::vector<double>>(ny, std::vector<double>(nz, 0.0)));
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t k = 0; k < nz; ++k) {
        if (table.structural[i][j][k] || fit.fitted[i][j][k] <= 0.0) continue;
        res[i][j][k] = (static_cast<double>(table.counts[i][j][k]) - fit.fitted[i][j][k]) /
                       std::sqrt(fit.fitted[i][j][k]);
      }
  return res;
}

RecodingSuggestion suggest_recoding(const ContingencyTable& table, const LogLinearFit& fit,
                                    std::size_t max_groups) {
  std::size_t nz = table.nz();
  RecodingSuggestion out;

  GateReport gate = sample_size_gate(table);
  double threshold = 0.1;
  if (gate.all_ok && fit.p_value >= threshold) {
    for (std::size_t k = 0; k < nz; ++k) out.groups.push_back({k});
    return out;
  }

  // Seed groups ranked by max |residual| (descending), ties by level index.
  std::vector<double> level_resid(nz, 0.0);
  for (std::size_t i = 0; i < table.nx(); ++i)
    for (std::size_t j = 0; j < table.ny(); ++j)
      for (std::size_t k = 0; k < nz; ++k)
        level_resid[k] = std::max(level_resid[k], std::fabs(fit.residuals[i][j][k]));
  std::vector<std::size_t> order(nz);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return level_resid[a] > level_resid[b]; });

  std::vector<std::vector<std::size_t>> groups;
  for (auto k : order) {
    if (table.level_total(k) == 0) out.zero_total_levels.push_back(k);
    else groups.push_back({k});
  }

  auto group_total = [&](const std::vector<std::size_t>& g) {
    long n = 0;
    for (auto k : g) n += table.level_total(k);
    return n;
  };
  // Normalized pooled (X,Y) probability matrix of a group of levels.
  auto group_matrix = [&](const std::vector<std::size_t>& g) {
    std::vector<double> m(table.nx() * table.ny(), 0.0);
    double total = static_cast<double>(group_total(g));
    if (total <= 0.0) return m;
    for (std::size_t i = 0; i < table.nx(); ++i)
      for (std::size_t j = 0; j < table.ny(); ++j) {
        double c = 0.0;
        for (auto k : g) c += static_cast<double>(table.counts[i][j][k]);
        m[i * table.ny() + j] = c / total;
      }
    return m;
  };
  auto l1 = [](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::fabs(a[i] - b[i]);
    return d;
  };
  auto all_pass_gate = [&]() {
    for (const auto& g : groups) {
      long n = group_total(g);
      if (n < gate.lower || n > gate.upper) return false;
    }
    return true;
  };

  while (groups.size() > 1 && (!all_pass_gate() || groups.size() > max_groups)) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 1;
    for (std::size_t a = 0; a < groups.size(); ++a) {
      auto ma = group_matrix(groups[a]);
      for (std::size_t b = a + 1; b < groups.size(); ++b) {
        double d = l1(ma, group_matrix(groups[b]));
        if (d < best) { best = d; ba = a; bb = b; }
      }
    }
    groups[ba].insert(groups[ba].end(), groups[bb].begin(), groups[bb].end());
    std::sort(groups[ba].begin(), groups[ba].end());
    groups.erase(groups.begin() + static_cast<long>(bb));
    out.merge_distances.push_back(best);
  }
  // Zero-total levels join the last surviving group.
  if (!out.zero_total_levels.empty()) {
    if (groups.empty()) groups.push_back({});
    auto& g = groups.back();
    g.insert(g.end(), out.zero_total_levels.begin(), out.zero_total_levels.end());
    std::sort(g.begin(), g.end());
  }
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  out.groups = std::move(groups);
  return out;
}

StepwiseResult stepwise_conditional_test(const RecordSet& records,
                                         const DimensionPartition& part,
                                         const std::vector<ProductParts>& z_levels,
                                         double threshold) {
  ContingencyTable t = build_contingency(records, part, z_levels);
  StepwiseResult out;
  out.all_accept = true;
  for (std::size_t k = 0; k < t.nz(); ++k) {
    LevelTest lt;
    lt.level = k;
    // Sub-table of rows/columns with nonzero totals at this level.
    std::vector<std::size_t> rows, cols;
    for (std::size_t i = 0; i < t.nx(); ++i) {
      long s = 0;
      for (std::size_t j = 0; j < t.ny(); ++j) s += t.counts[i][j][k];
      if (s > 0) rows.push_back(i);
    }
    for (std::size_t j = 0; j < t.ny(); ++j) {
      long s = 0;
      for (std::size_t i = 0; i < t.nx(); ++i) s += t.counts[i][j][k];
      if (s > 0) cols.push_back(j);
    }
    int struct_here = 0;
    for (auto i : rows)
      for (auto j : cols)
        if (t.structural[i][j][k]) ++struct_here;
    int df = static_cast<int>(rows.size() - 1) * static_cast<int>(cols.size() - 1) - struct_here;
    if (rows.size() < 2 || cols.size() < 2 || df <= 0) {
      out.levels.push_back(lt);  // untestable; excluded from the verdict
      continue;
    }
    double total = static_cast<double>(t.level_total(k));
    lt.chi2 = 0.0;
    for (auto i : rows) {
      double ri = 0.0;
      for (std::size_t j = 0; j < t.ny(); ++j) ri += static_cast<double>(t.counts[i][j][k]);
      for (auto j : cols) {
        double cj = 0.0;
        for (std::size_t i2 = 0; i2 < t.nx(); ++i2)
          cj += static_cast<double>(t.counts[i2][j][k]);
        double exp = ri * cj / total;
        if (exp <= 0.0) continue;
        double d = static_cast<double>(t.counts[i][j][k]) - exp;
        lt.chi2 += d * d / exp;
      }
    }
    lt.df = df;
    lt.p_value = chi_square_pvalue(lt.chi2, lt.df);
    lt.testable = true;
    if (lt.p_value < threshold) out.all_accept = false;
    out.levels.push_back(lt);
  }
  return out;
}

}  // namespace dstf
