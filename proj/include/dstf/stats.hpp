#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dstf/dataset.hpp"
#include "dstf/factorization.hpp"

namespace dstf {

// Frequencies F[i][j][k] of records whose r-part equals x_levels[i], s-part
// equals y_levels[j], and v-part is a superset of z_levels[k]. One record may
// count at several k (the columns overlap by design).
struct ContingencyTable {
  Scope r_scope, s_scope, v_scope;
  std::vector<ProductParts> x_levels, y_levels, z_levels;
  std::vector<std::vector<std::vector<long>>> counts;      // [i][j][k]
  std::vector<std::vector<std::vector<bool>>> structural;  // structural-zero mask
  long n_records = 0;

  std::size_t nx() const { return x_levels.size(); }
  std::size_t ny() const { return y_levels.size(); }
  std::size_t nz() const { return z_levels.size(); }
  long level_total(std::size_t k) const;  // n_k = sum_ij F_ijk
  // Number of admissible (i,j) cells: nx*ny minus pairs structurally zero
  // across every k.
  std::size_t n_xy() const;
  std::size_t structural_zero_count() const;
};

ContingencyTable build_contingency(const RecordSet& records, const DimensionPartition& part,
                                   const std::vector<ProductParts>& z_levels,
                                   const std::vector<StructuralZeroSpec>& impossible = {});

// Distinct observed v-parts, canonical order.
std::vector<ProductParts> observed_z_levels(const RecordSet& records,
                                            const std::vector<std::string>& v);

enum class GateVerdict { ok, too_small, too_large };

struct GateReport {
  std::size_t n_xy = 0;
  long lower = 0, upper = 0;  // 6*N_xy and 25*N_xy, closed interval
  std::vector<long> level_sizes;
  std::vector<GateVerdict> verdicts;
  bool all_ok = false;
  bool recode_recommended = false;
};

GateReport sample_size_gate(const ContingencyTable& table);

// df for the no-three-way-interaction model: full cell count minus one for
// the intercept, one per free contrast, and one per structural zero.
int degrees_of_freedom(int n_x, int n_y, int k, int n_structural_zeros);

struct LogLinearFit {
  std::vector<std::vector<std::vector<double>>> fitted;
  double intercept = 0.0;
  std::vector<double> delta_x, delta_y, delta_z;
  std::vector<std::vector<double>> delta_xy;
  bool contrasts_valid = false;  // extraction needs strictly positive fits
  double chi2 = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::vector<std::vector<std::vector<double>>> residuals;  // 0 where undefined
  std::vector<std::array<std::size_t, 3>> excluded_cells;   // fitted 0, observed > 0
  bool converged = false;
  int iterations = 0;
};

LogLinearFit fit_loglinear(const ContingencyTable& table);

// Upper-tail chi-square probability via the regularized incomplete gamma
// function.
double chi_square_pvalue(double chi2, int df);

std::vector<std::vector<std::vector<double>>> standardized_residuals(
    const ContingencyTable& table, const LogLinearFit& fit);

struct RecodingSuggestion {
  std::vector<std::vector<std::size_t>> groups;  // partition of z-level indices
  std::vector<double> merge_distances;           // L1 distance at each merge
  std::vector<std::size_t> zero_total_levels;    // unnormalizable levels, merged last
  bool heuristic = true;
};

RecodingSuggestion suggest_recoding(const ContingencyTable& table, const LogLinearFit& fit,
                                    std::size_t max_groups);

struct LevelTest {
  std::size_t level = 0;
  bool testable = false;
  double chi2 = 0.0;
  int df = 0;
  double p_value = 1.0;
};

struct StepwiseResult {
  std::vector<LevelTest> levels;
  bool all_accept = false;  // every testable level has p >= threshold
};

StepwiseResult stepwise_conditional_test(const RecordSet& records,
                                         const DimensionPartition& part,
                                         const std::vector<ProductParts>& z_levels,
                                         double threshold = 0.1);

}  // namespace dstf
