#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dstf/commonality.hpp"
#include "dstf/dataset.hpp"
#include "dstf/factorization.hpp"
#include "dstf/stats.hpp"

namespace py = pybind11;
using namespace dstf;

namespace {

py::dict parts_to_dict(const Scope& scope, const ProductParts& parts) {
  py::dict d;
  for (std::size_t i = 0; i < scope.size(); ++i) {
    py::list labels;
    for (std::size_t b = 0; b < scope.at(i).size(); ++b)
      if (parts[i] >> b & 1) labels.append(scope.at(i).frame[b]);
    d[py::str(scope.at(i).name)] = labels;
  }
  return d;
}

ProductParts parts_from_dict(const Scope& scope, const py::dict& d) {
  ProductParts parts;
  for (const auto& var : scope.variables()) {
    if (!d.contains(var.name))
      throw std::invalid_argument("missing variable '" + var.name + "'");
    PartMask mask = 0;
    for (const auto& l : d[py::str(var.name)]) {
      int i = var.label_index(l.cast<std::string>());
      if (i < 0) throw std::invalid_argument("unknown label for '" + var.name + "'");
      mask |= PartMask{1} << i;
    }
    if (mask == 0) throw std::invalid_argument("empty part for '" + var.name + "'");
    parts.push_back(mask);
  }
  return parts;
}

py::dict class_to_dict(const ValuationClass& c) {
  py::dict d;
  d["proper"] = c.proper;
  d["normal"] = c.normal;
  d["positive_normal"] = c.positive_normal;
  d["zero"] = c.zero;
  return d;
}

py::list focals_to_list(const MassFunction& m) {
  py::list out;
  for (const auto& [k, v] : m.assignments()) {
    py::dict entry;
    if (const auto* parts = std::get_if<ProductParts>(&k))
      entry["set"] = parts_to_dict(m.scope(), *parts);
    else
      entry["set"] = m.focal_to_string(k);
    entry["mass"] = v;
    out.append(entry);
  }
  return out;
}

py::dict fact_report_to_dict(const FactorizationReport& r) {
  py::dict d;
  d["holds"] = r.holds;
  d["max_abs_deviation"] = r.max_abs_deviation;
  d["max_rel_deviation"] = r.max_rel_deviation;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Belief-function algebra, factorization checks, and the database "
            "structure-testing pipeline";

  py::class_<MassFunction>(m, "MassFunction")
      .def("variables",
           [](const MassFunction& self) {
             py::list out;
             for (const auto& v : self.scope().variables()) {
               py::dict d;
               d["name"] = v.name;
               d["frame"] = v.frame;
               out.append(d);
             }
             return out;
           })
      .def("focals", &focals_to_list)
      .def("classify", [](const MassFunction& self) { return class_to_dict(classify(self)); })
      .def("total_mass", &MassFunction::total_mass)
      .def("bel",
           [](const MassFunction& self, const py::dict& set) {
             return bel_of(self, ProductFocalSet(self.scope(), parts_from_dict(self.scope(), set)));
           })
      .def("pl",
           [](const MassFunction& self, const py::dict& set) {
             return pl_of(self, ProductFocalSet(self.scope(), parts_from_dict(self.scope(), set)));
           })
      .def("q",
           [](const MassFunction& self, const py::dict& set) {
             return q_of(self, ProductFocalSet(self.scope(), parts_from_dict(self.scope(), set)));
           })
      .def("marginalize",
           [](const MassFunction& self, const std::vector<std::string>& keep) {
             return marginalize(self, keep);
           })
      .def("combine",
           [](const MassFunction& self, const MassFunction& other) {
             CombineResult res = combine(self, other);
             if (res.inconsistent)
               throw std::domain_error("inconsistent combination (total conflict)");
             return res.mass;
           })
      .def("condition",
           [](const MassFunction& self, const std::vector<std::string>& on) {
             ConditionResult res = condition(self, on);
             if (res.zero_valuation)
               throw std::domain_error("conditioning yields the zero valuation");
             return res.mass;
           })
      .def("to_json", [](const MassFunction& self) { return serialize_model(self); })
      .def("__len__", &MassFunction::focal_count);

  m.def("parse_model", [](const std::string& text) { return parse_model(text).mass; });
  m.def("vacuous", [](const MassFunction& like) { return vacuous(like.scope()); });

  m.def("verify_decomposition",
        [](const MassFunction& mass, const std::vector<std::string>& r,
           const std::vector<std::string>& s, const std::vector<std::string>& v, double tol) {
          DecompositionReport rep = verify_decomposition(mass, r, s, v, tol);
          py::dict d;
          d["holds"] = rep.holds;
          d["max_abs_deviation"] = rep.max_abs_deviation;
          d["route_disagreement"] = rep.route_disagreement;
          return d;
        },
        py::arg("mass"), py::arg("r"), py::arg("s"), py::arg("v"), py::arg("tol") = 1e-6);

  m.def("f_measure",
        [](const MassFunction& mass, const std::vector<std::string>& r,
           const std::vector<std::string>& s, const std::vector<std::string>& v) {
          FTable f = f_measure(mass, {r, s, v});
          py::list out;
          for (const auto& [k, w] : f.entries) {
            py::dict cell;
            cell["rs"] = parts_to_dict(f.rs_scope, k.first);
            cell["v"] = parts_to_dict(f.v_scope, k.second);
            cell["value"] = w;
            out.append(cell);
          }
          return out;
        });

  m.def("check_noninfluence",
        [](const MassFunction& mass, const std::vector<std::string>& r,
           const std::vector<std::string>& s, const std::vector<std::string>& v, double tol) {
          FTable f = f_measure(mass, {r, s, v});
          std::vector<std::string> rs = r;
          rs.insert(rs.end(), s.begin(), s.end());
          return fact_report_to_dict(check_noninfluence(f, marginalize(mass, rs), tol));
        },
        py::arg("mass"), py::arg("r"), py::arg("s"), py::arg("v"), py::arg("tol") = 1e-9);

  m.def("check_cond_independence",
        [](const MassFunction& mass, const std::vector<std::string>& r,
           const std::vector<std::string>& s, const std::vector<std::string>& v,
           const std::string& variant, double tol) {
          FTable f = f_measure(mass, {r, s, v});
          CondIndepVariant var = variant == "verbatim" ? CondIndepVariant::verbatim
                                                             : CondIndepVariant::normalized;
          return fact_report_to_dict(check_cond_independence(f, var, tol));
        },
        py::arg("mass"), py::arg("r"), py::arg("s"), py::arg("v"),
        py::arg("variant") = "normalized", py::arg("tol") = 1e-9);

  m.def("ratio_obstruction",
        [](const MassFunction& mass, const std::vector<std::string>& r,
           const std::vector<std::string>& s, const std::vector<std::string>& v) {
          auto violations = ratio_obstruction(mass, {r, s, v});
          py::list out;
          for (const auto& viol : violations) {
            py::dict d;
            d["ratio1"] = viol.ratio1;
            d["ratio2"] = viol.ratio2;
            out.append(d);
          }
          return out;
        });

  m.def("chi_square_pvalue", &chi_square_pvalue, py::arg("chi2"), py::arg("df"));
  m.def("degrees_of_freedom", &degrees_of_freedom, py::arg("n_x"), py::arg("n_y"),
        py::arg("k"), py::arg("n_structural_zeros") = 0);

  m.def("generate_records",
        [](const MassFunction& mass, std::size_t n, std::uint64_t seed) {
          return serialize_records(generate_records(mass, n, seed), generator_header(n, seed));
        },
        py::arg("mass"), py::arg("n"), py::arg("seed") = 0);

  m.def("empirical_mass",
        [](const std::string& records_text) {
          return empirical_mass(parse_records(records_text).records);
        });

  m.def("test_structure",
        [](const std::string& records_text, const std::vector<std::string>& r,
           const std::vector<std::string>& s, const std::vector<std::string>& v,
           double threshold) {
          RecordFile rf = parse_records(records_text);
          DimensionPartition part{r, s, v};
          auto z_levels = observed_z_levels(rf.records, v);
          ContingencyTable table = build_contingency(rf.records, part, z_levels, rf.impossible);
          GateReport gate = sample_size_gate(table);
          LogLinearFit fit = fit_loglinear(table);
          py::dict d;
          d["chi2"] = fit.chi2;
          d["df"] = fit.df;
          d["p_value"] = fit.p_value;
          d["converged"] = fit.converged;
          d["gate_ok"] = gate.all_ok;
          d["level_sizes"] = gate.level_sizes;
          d["accept"] = fit.p_value >= threshold;
          return d;
        },
        py::arg("records"), py::arg("r"), py::arg("s"), py::arg("v"),
        py::arg("threshold") = 0.1);

  m.def("test_stepwise",
        [](const std::string& records_text, const std::vector<std::string>& r,
           const std::vector<std::string>& s, const std::vector<std::string>& v,
           double threshold) {
          RecordFile rf = parse_records(records_text);
          auto z_levels = observed_z_levels(rf.records, v);
          StepwiseResult res = stepwise_conditional_test(rf.records, {r, s, v}, z_levels,
                                                         threshold);
          py::list levels;
          for (const auto& l : res.levels) {
            py::dict d;
            d["level"] = l.level;
            d["testable"] = l.testable;
            d["chi2"] = l.chi2;
            d["df"] = l.df;
            d["p_value"] = l.p_value;
            levels.append(d);
          }
          py::dict out;
          out["levels"] = levels;
          out["all_accept"] = res.all_accept;
          return out;
        },
        py::arg("records"), py::arg("r"), py::arg("s"), py::arg("v"),
        py::arg("threshold") = 0.1);
}
