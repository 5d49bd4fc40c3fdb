#include "dstf/cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dstf/commonality.hpp"
#include "dstf/dataset.hpp"
#include "dstf/factorization.hpp"
#include "dstf/stats.hpp"

namespace dstf::cli {

namespace {

using json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  out << content;
}

std::string fnv1a_digest(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json class_json(const ValuationClass& c) {
  return {{"proper", c.proper},
          {"normal", c.normal},
          {"positive_normal", c.positive_normal},
          {"zero", c.zero}};
}

json parts_json(const Scope& scope, const ProductParts& parts) {
  json obj;
  for (std::size_t i = 0; i < scope.size(); ++i) {
    json arr = json::array();
    for (std::size_t b = 0; b < scope.at(i).size(); ++b)
      if (parts[i] >> b & 1) arr.push_back(scope.at(i).frame[b]);
    obj[scope.at(i).name] = std::move(arr);
  }
  return obj;
}

// Model output with the valuation class up front.
std::string model_with_class(const MassFunction& m) {
  json body = json::parse(serialize_model(m));
  json out;
  out["class"] = class_json(classify(m));
  for (auto& [k, v] : body.items()) out[k] = std::move(v);
  return out.dump(2) + "\n";
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) std::cout << content;
  else write_file(out_path, content);
}

json report_header(const std::vector<std::string>& args,
                   const std::vector<std::string>& input_paths) {
  json rep;
  rep["command"] = args;
  rep["inputs"] = json::object();
  for (const auto& p : input_paths) rep["inputs"][p] = fnv1a_digest(read_file(p));
  return rep;
}

json fact_report_json(const FactorizationReport& r, std::size_t max_cells = 50) {
  json j{{"holds", r.holds},
         {"max_abs_deviation", r.max_abs_deviation},
         {"max_rel_deviation", r.max_rel_deviation}};
  json cells = json::array();
  for (std::size_t i = 0; i < r.per_cell.size() && i < max_cells; ++i) {
    const auto& c = r.per_cell[i];
    cells.push_back({{"lhs", c.lhs}, {"rhs", c.rhs}, {"abs_deviation", c.abs_deviation}});
  }
  j["cells"] = std::move(cells);
  return j;
}

std::vector<ProductParts> parse_z_levels(const std::string& path, const Scope& v_scope) {
  json arr = json::parse(read_file(path));
  if (!arr.is_array()) throw std::invalid_argument("z-levels file must hold an array");
  std::vector<ProductParts> out;
  for (const auto& obj : arr) {
    ProductParts parts;
    for (const auto& var : v_scope.variables()) {
      if (!obj.contains(var.name))
        throw std::invalid_argument("z-level missing variable '" + var.name + "'");
      PartMask m = 0;
      for (const auto& l : obj[var.name]) {
        int i = var.label_index(l.get<std::string>());
        if (i < 0) throw std::invalid_argument("unknown label in z-level");
        m |= PartMask{1} << i;
      }
      if (m == 0) throw std::invalid_argument("empty z-level part");
      parts.push_back(m);
    }
    out.push_back(std::move(parts));
  }
  return out;
}

struct StructureOptions {
  std::string records_path, z_levels_path, out_path;
  std::vector<std::string> r, s, v;
  double threshold = 0.1;
};

int run_structure(const std::vector<std::string>& args, const StructureOptions& opt) {
  RecordFile rf = parse_records(read_file(opt.records_path));
  DimensionPartition part{opt.r, opt.s, opt.v};
  std::vector<ProductParts> z_levels =
      opt.z_levels_path.empty()
          ? observed_z_levels(rf.records, opt.v)
          : parse_z_levels(opt.z_levels_path, rf.records.scope.subscope(opt.v));

  ContingencyTable table = build_contingency(rf.records, part, z_levels, rf.impossible);
  GateReport gate = sample_size_gate(table);

  json rep = report_header(args, {opt.records_path});
  rep["threshold"] = opt.threshold;
  rep["gate"] = {{"n_xy", gate.n_xy},
                 {"lower", gate.lower},
                 {"upper", gate.upper},
                 {"level_sizes", gate.level_sizes},
                 {"all_ok", gate.all_ok},
                 {"recode_recommended", gate.recode_recommended}};
  json verdicts = json::array();
  for (auto v : gate.verdicts)
    verdicts.push_back(v == GateVerdict::ok ? "ok"
                       : v == GateVerdict::too_small ? "too_small" : "too_large");
  rep["gate"]["verdicts"] = std::move(verdicts);

  json levels = json::array();
  for (const auto& z : table.z_levels) levels.push_back(parts_json(table.v_scope, z));
  rep["contingency"] = {{"n_records", table.n_records}, {"z_levels", std::move(levels)}};
  json xl = json::array(), yl = json::array();
  for (const auto& x : table.x_levels) xl.push_back(parts_json(table.r_scope, x));
  for (const auto& y : table.y_levels) yl.push_back(parts_json(table.s_scope, y));
  rep["contingency"]["x_levels"] = std::move(xl);
  rep["contingency"]["y_levels"] = std::move(yl);
  rep["contingency"]["counts"] = table.counts;

  int code = kOk;
  try {
    LogLinearFit fit = fit_loglinear(table);
    rep["fit"] = {{"chi2", fit.chi2},
                  {"df", fit.df},
                  {"p_value", fit.p_value},
                  {"converged", fit.converged},
                  {"iterations", fit.iterations},
                  {"fitted", fit.fitted},
                  {"residuals", fit.residuals}};
    bool accept = fit.p_value >= opt.threshold;
    rep["verdict"] = accept ? "accept" : "reject";
    if (!accept || !gate.all_ok) {
      RecodingSuggestion rec = suggest_recoding(table, fit, table.nz());
      rep["recoding"] = {{"heuristic", true},
                         {"groups", rec.groups},
                         {"merge_distances", rec.merge_distances}};
    }
    std::cout << "n=" << table.n_records << " chi2=" << fit.chi2 << " df=" << fit.df
              << " p=" << fit.p_value << " verdict=" << rep["verdict"].get<std::string>()
              << (gate.all_ok ? "" : " [gate failure]") << "\n";
    if (!gate.all_ok) code = kGateFailure;
    else if (!accept) code = kReject;
  } catch (const std::invalid_argument& e) {
    rep["error"] = e.what();
    std::cout << "untestable: " << e.what() << "\n";
    code = kDataError;
  }
  if (!opt.out_path.empty()) write_file(opt.out_path, rep.dump(2) + "\n");
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Belief-function algebra and factorization testing"};
  app.require_subcommand(1);

  // --- algebra ---
  auto* algebra = app.add_subcommand("algebra", "Mass-function operations");
  algebra->require_subcommand(1);
  std::string model_a, model_b, out_path;
  std::vector<std::string> keep_vars, on_vars;
  bool allow_pseudo = false;

  auto* combine_cmd = algebra->add_subcommand("combine", "Dempster combination of two models");
  combine_cmd->add_option("A", model_a)->required();
  combine_cmd->add_option("B", model_b)->required();
  combine_cmd->add_option("-o,--output", out_path);

  auto* marg_cmd = algebra->add_subcommand("marginalize", "Marginalize to kept variables");
  marg_cmd->add_option("MODEL", model_a)->required();
  marg_cmd->add_option("--keep", keep_vars)->required();
  marg_cmd->add_option("-o,--output", out_path);

  auto* cond_cmd = algebra->add_subcommand("condition", "Condition on a sub-scope");
  cond_cmd->add_option("MODEL", model_a)->required();
  cond_cmd->add_option("--on", on_vars)->required();
  cond_cmd->add_flag("--allow-pseudo", allow_pseudo);
  cond_cmd->add_option("-o,--output", out_path);

  auto* qtable_cmd = algebra->add_subcommand("qtable", "Commonalities at the focal sets");
  qtable_cmd->add_option("MODEL", model_a)->required();
  qtable_cmd->add_option("-o,--output", out_path);

  auto* classify_cmd = algebra->add_subcommand("classify", "Valuation class of a model");
  classify_cmd->add_option("MODEL", model_a)->required();

  // --- verify-factorization ---
  auto* verify = app.add_subcommand("verify-factorization", "Algebraic factorization checks");
  std::string v_model, v_out, identity = "decomposition";
  std::vector<std::string> part_r, part_s, part_v;
  double tol = 1e-9;
  verify->add_option("MODEL", v_model)->required();
  verify->add_option("--r", part_r)->required();
  verify->add_option("--s", part_s)->required();
  verify->add_option("--v", part_v)->required();
  verify->add_option("--tol", tol);
  verify->add_option("--identity", identity)
      ->check(CLI::IsMember({"decomposition", "noninfluence", "cond-normalized", "cond-verbatim"}));
  verify->add_option("-o,--output", v_out);

  // --- test-structure / test-stepwise ---
  StructureOptions sopt;
  auto* structure = app.add_subcommand("test-structure", "Log-linear structure test");
  structure->add_option("RECORDS", sopt.records_path)->required();
  structure->add_option("--r", sopt.r)->required();
  structure->add_option("--s", sopt.s)->required();
  structure->add_option("--v", sopt.v)->required();
  structure->add_option("--threshold", sopt.threshold);
  structure->add_option("--z-levels", sopt.z_levels_path);
  structure->add_option("-o,--output", sopt.out_path);

  std::string w_records, w_out;
  std::vector<std::string> w_r, w_s, w_v;
  double w_threshold = 0.1;
  auto* stepwise = app.add_subcommand("test-stepwise", "Per-level independence tests");
  stepwise->add_option("RECORDS", w_records)->required();
  stepwise->add_option("--r", w_r)->required();
  stepwise->add_option("--s", w_s)->required();
  stepwise->add_option("--v", w_v)->required();
  stepwise->add_option("--threshold", w_threshold);
  stepwise->add_option("-o,--output", w_out);

  // --- generate ---
  std::string g_model, g_out;
  std::size_t g_n = 0;
  std::uint64_t g_seed = 0;
  auto* generate = app.add_subcommand("generate", "Sample records from a model");
  generate->add_option("MODEL", g_model)->required();
  generate->add_option("-n,--count", g_n)->required();
  generate->add_option("--seed", g_seed);
  generate->add_option("-o,--output", g_out)->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int r = app.exit(e);
    return r == 0 ? kOk : kUsage;
  }

  try {
    if (combine_cmd->parsed()) {
      auto a = parse_model(read_file(model_a));
      auto b = parse_model(read_file(model_b));
      CombineResult res = combine(a.mass, b.mass);
      if (res.inconsistent) {
        std::cerr << "inconsistent: total conflict between operands\n";
        return kInconsistent;
      }
      emit(out_path, model_with_class(res.mass));
      return kOk;
    }
    if (marg_cmd->parsed()) {
      auto a = parse_model(read_file(model_a));
      emit(out_path, model_with_class(marginalize(a.mass, keep_vars)));
      return kOk;
    }
    if (cond_cmd->parsed()) {
      auto a = parse_model(read_file(model_a));
      ConditionResult res = condition(a.mass, on_vars);
      if (res.zero_valuation) {
        std::cerr << "inconsistent: conditioning yields the zero valuation\n";
        return kInconsistent;
      }
      if (!res.cls.proper && !allow_pseudo) {
        std::cerr << "pseudo result (negative masses); rerun with --allow-pseudo\n";
        return kPseudoResult;
      }
      emit(out_path, model_with_class(res.mass));
      return kOk;
    }
    if (qtable_cmd->parsed()) {
      auto a = parse_model(read_file(model_a));
      json out;
      out["class"] = class_json(classify(a.mass));
      json rows = json::array();
      for (const auto& [k, mass] : a.mass.assignments()) {
        if (!is_product(k)) continue;
        ProductFocalSet f(a.mass.scope(), std::get<ProductParts>(k));
        rows.push_back({{"set", parts_json(a.mass.scope(), f.parts)},
                        {"mass", mass},
                        {"q", q_of(a.mass, f)}});
      }
      out["commonalities"] = std::move(rows);
      emit(out_path, out.dump(2) + "\n");
      return kOk;
    }
    if (classify_cmd->parsed()) {
      auto a = parse_model(read_file(model_a));
      std::cout << class_json(classify(a.mass)).dump(2) << "\n";
      return kOk;
    }
    if (verify->parsed()) {
      auto doc = parse_model(read_file(v_model));
      const MassFunction& m = doc.mass;
      DimensionPartition part{part_r, part_s, part_v};
      validate_partition(m.scope(), part);

      DecompositionReport decomp = verify_decomposition(m, part_r, part_s, part_v, tol);
      FTable f = f_measure(m, part);
      std::vector<std::string> rs_names = part_r;
      rs_names.insert(rs_names.end(), part_s.begin(), part_s.end());
      FactorizationReport noninf = check_noninfluence(f, marginalize(m, rs_names), tol);
      FactorizationReport ci_norm =
          check_cond_independence(f, CondIndepVariant::normalized, tol);
      FactorizationReport ci_verb =
          check_cond_independence(f, CondIndepVariant::verbatim, tol);
      auto violations = ratio_obstruction(m, part);

      json rep = report_header(args, {v_model});
      rep["tolerance"] = tol;
      rep["decomposition"] = {{"holds", decomp.holds},
                    {"max_abs_deviation", decomp.max_abs_deviation},
                    {"route_disagreement", decomp.route_disagreement}};
      rep["noninfluence"] = fact_report_json(noninf);
      rep["cond_independence"] = {{"normalized", fact_report_json(ci_norm)},
                                  {"verbatim", fact_report_json(ci_verb)}};
      json viol = json::array();
      for (const auto& v : violations)
        viol.push_back({{"rs1", parts_json(f.rs_scope, v.rs1)},
                        {"rs2", parts_json(f.rs_scope, v.rs2)},
                        {"va", parts_json(f.v_scope, v.va)},
                        {"vb", parts_json(f.v_scope, v.vb)},
                        {"ratio1", v.ratio1},
                        {"ratio2", v.ratio2}});
      rep["ratio_obstruction"] = std::move(viol);

      std::cout << "decomposition=" << (decomp.holds ? "holds" : "fails")
                << " noninfluence=" << (noninf.holds ? "holds" : "fails")
                << " cond-normalized=" << (ci_norm.holds ? "holds" : "fails")
                << " cond-verbatim=" << (ci_verb.holds ? "holds" : "fails")
                << " ratio-violations=" << violations.size() << "\n";
      if (!v_out.empty()) write_file(v_out, rep.dump(2) + "\n");

      bool selected = identity == "decomposition"            ? decomp.holds
                      : identity == "noninfluence" ? noninf.holds
                      : identity == "cond-normalized" ? ci_norm.holds
                                                      : ci_verb.holds;
      return selected ? kOk : kReject;
    }
    if (structure->parsed()) return run_structure(args, sopt);
    if (stepwise->parsed()) {
      RecordFile rf = parse_records(read_file(w_records));
      DimensionPartition part{w_r, w_s, w_v};
      auto z_levels = observed_z_levels(rf.records, w_v);
      StepwiseResult res = stepwise_conditional_test(rf.records, part, z_levels, w_threshold);

      json rep = report_header(args, {w_records});
      rep["threshold"] = w_threshold;
      json lv = json::array();
      for (const auto& l : res.levels) {
        json obj = {{"level", l.level}, {"testable", l.testable}};
        if (l.testable) {
          obj["chi2"] = l.chi2;
          obj["df"] = l.df;
          obj["p_value"] = l.p_value;
        }
        lv.push_back(std::move(obj));
        std::cout << "level " << l.level << ": "
                  << (l.testable ? (l.p_value >= w_threshold ? "accept" : "reject")
                                 : "untestable");
        if (l.testable) std::cout << " p=" << l.p_value;
        std::cout << "\n";
      }
      rep["levels"] = std::move(lv);
      rep["all_accept"] = res.all_accept;
      if (!w_out.empty()) write_file(w_out, rep.dump(2) + "\n");
      return res.all_accept ? kOk : kReject;
    }
    if (generate->parsed()) {
      auto doc = parse_model(read_file(g_model));
      if (!classify(doc.mass).proper) {
        std::cerr << "cannot sample from a pseudo model\n";
        return kDataError;
      }
      RecordSet rs = generate_records(doc.mass, g_n, g_seed);
      write_file(g_out, serialize_records(rs, generator_header(g_n, g_seed)));
      return kOk;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace dstf::cli
