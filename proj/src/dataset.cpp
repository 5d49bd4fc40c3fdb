#include "dstf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dstf/tuples.hpp"

namespace dstf {

using json = nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

PartMask parse_part(const Variable& var, const json& labels, const std::string& where) {
  if (!labels.is_array() || labels.empty())
    throw std::invalid_argument(where + ": value set for '" + var.name +
                                "' must be a nonempty array");
  PartMask mask = 0;
  for (const auto& l : labels) {
    if (!l.is_string())
      throw std::invalid_argument(where + ": labels must be strings");
    int i = var.label_index(l.get<std::string>());
    if (i < 0)
      throw std::invalid_argument(where + ": unknown label '" + l.get<std::string>() +
                                  "' for variable '" + var.name + "'");
    mask |= PartMask{1} << i;
  }
  return mask;
}

json part_to_json(const Variable& var, PartMask mask) {
  json arr = json::array();
  for (std::size_t i = 0; i < var.size(); ++i)
    if (mask >> i & 1) arr.push_back(var.frame[i]);
  return arr;
}

std::vector<StructuralZeroSpec> parse_impossible(const json& arr, const std::string& where) {
  std::vector<StructuralZeroSpec> out;
  if (!arr.is_array()) throw std::invalid_argument(where + ": 'impossible' must be an array");
  for (const auto& item : arr) {
    if (!item.is_object())
      throw std::invalid_argument(where + ": impossible entries must be objects");
    StructuralZeroSpec spec;
    for (const auto& [name, labels] : item.items()) {
      if (!labels.is_array())
        throw std::invalid_argument(where + ": impossible levels must be label arrays");
      spec.levels[name] = labels.get<std::vector<std::string>>();
    }
    out.push_back(std::move(spec));
  }
  return out;
}

Scope parse_scope(const json& vars) {
  if (!vars.is_array() || vars.empty())
    throw std::invalid_argument("model: 'variables' must be a nonempty array");
  std::vector<Variable> vs;
  for (const auto& v : vars) {
    if (!v.is_object() || !v.contains("name") || !v.contains("frame"))
      throw std::invalid_argument("model: each variable needs 'name' and 'frame'");
    vs.push_back({v["name"].get<std::string>(), v["frame"].get<std::vector<std::string>>()});
  }
  return Scope(std::move(vs));
}

}  // namespace

ModelDocument parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("variables") || !doc.contains("focals"))
    throw std::invalid_argument("model: expected an object with 'variables' and 'focals'");

  ModelDocument out;
  Scope scope = parse_scope(doc["variables"]);

  std::map<FocalKey, double> masses;
  std::map<FocalKey, std::string> texts;
  for (const auto& focal : doc["focals"]) {
    if (!focal.is_object() || !focal.contains("mass"))
      throw std::invalid_argument("model: each focal needs a 'mass'");
    std::string mass_text = focal["mass"].is_string() ? focal["mass"].get<std::string>()
                                                      : focal["mass"].dump();
    double mass = 0.0;
    auto res = std::from_chars(mass_text.data(), mass_text.data() + mass_text.size(), mass);
    if (res.ec != std::errc{} || res.ptr != mass_text.data() + mass_text.size())
      throw std::invalid_argument("model: malformed mass '" + mass_text + "'");

    FocalKey key;
    if (focal.contains("tuples")) {
      TupleList tl;
      for (const auto& t : focal["tuples"]) {
        std::vector<std::size_t> digits(scope.size());
        for (std::size_t i = 0; i < scope.size(); ++i) {
          const auto& name = scope.at(i).name;
          if (!t.contains(name))
            throw std::invalid_argument("model: tuple missing variable '" + name + "'");
          int li = scope.at(i).label_index(t[name].get<std::string>());
          if (li < 0) throw std::invalid_argument("model: unknown label in tuple");
          digits[i] = static_cast<std::size_t>(li);
        }
        tl.tuples.push_back(encode_tuple(scope, digits));
      }
      std::sort(tl.tuples.begin(), tl.tuples.end());
      tl.tuples.erase(std::unique(tl.tuples.begin(), tl.tuples.end()), tl.tuples.end());
      key = std::move(tl);
    } else {
      ProductParts parts;
      for (const auto& var : scope.variables()) {
        if (!focal.contains(var.name))
          throw std::invalid_argument("model: focal missing variable '" + var.name + "'");
        parts.push_back(parse_part(var, focal[var.name], "model"));
      }
      key = std::move(parts);
    }
    if (masses.count(key)) throw std::invalid_argument("model: duplicate focal set");
    masses.emplace(key, mass);
    texts.emplace(std::move(key), std::move(mass_text));
  }
  out.mass = MassFunction(std::move(scope), std::move(masses));
  out.mass_text = std::move(texts);
  if (doc.contains("impossible")) out.impossible = parse_impossible(doc["impossible"], "model");
  return out;
}

std::string serialize_model(const ModelDocument& doc) {
  const Scope& scope = doc.mass.scope();
  json j;
  j["variables"] = json::array();
  for (const auto& v : scope.variables())
    j["variables"].push_back({{"name", v.name}, {"frame", v.frame}});
  j["focals"] = json::array();
  for (const auto& [key, mass] : doc.mass.assignments()) {
    json focal;
    if (const auto* parts = std::get_if<ProductParts>(&key)) {
      for (std::size_t i = 0; i < scope.size(); ++i)
        focal[scope.at(i).name] = part_to_json(scope.at(i), (*parts)[i]);
    } else {
      json tuples = json::array();
      for (auto t : std::get<TupleList>(key).tuples) {
        auto digits = decode_tuple(scope, t);
        json obj;
        for (std::size_t i = 0; i < scope.size(); ++i)
          obj[scope.at(i).name] = scope.at(i).frame[digits[i]];
        tuples.push_back(std::move(obj));
      }
      focal["tuples"] = std::move(tuples);
    }
    auto it = doc.mass_text.find(key);
    focal["mass"] = it != doc.mass_text.end() ? it->second : format_double(mass);
    j["focals"].push_back(std::move(focal));
  }
  if (!doc.impossible.empty()) {
    j["impossible"] = json::array();
    for (const auto& spec : doc.impossible) {
      json obj;
      for (const auto& [name, labels] : spec.levels) obj[name] = labels;
      j["impossible"].push_back(std::move(obj));
    }
  }
  return j.dump(2) + "\n";
}

std::string serialize_model(const MassFunction& m) {
  ModelDocument doc;
  doc.mass = m;
  return serialize_model(doc);
}

namespace {

RecordFile parse_records_impl(const std::string& text, const Scope* fixed_scope) {
  // First pass: line objects, scope/frame discovery.
  std::vector<json> objects;
  std::vector<std::size_t> line_numbers;
  std::vector<std::string> var_order;
  std::map<std::string, std::vector<std::string>> frames;
  std::vector<StructuralZeroSpec> impossible;

  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw std::invalid_argument("records line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!obj.is_object())
      throw std::invalid_argument("records line " + std::to_string(lineno) +
                                  ": expected an object");
    if (obj.contains("impossible")) {
      auto specs = parse_impossible(obj["impossible"], "records line " + std::to_string(lineno));
      impossible.insert(impossible.end(), specs.begin(), specs.end());
      continue;
    }
    if (!fixed_scope) {
      for (const auto& [name, labels] : obj.items()) {
        if (std::find(var_order.begin(), var_order.end(), name) == var_order.end())
          var_order.push_back(name);
        if (!labels.is_array())
          throw std::invalid_argument("records line " + std::to_string(lineno) +
                                      ": cell for '" + name + "' must be a label array");
        for (const auto& l : labels) {
          auto& frame = frames[name];
          if (std::find(frame.begin(), frame.end(), l.get<std::string>()) == frame.end())
            frame.push_back(l.get<std::string>());
        }
      }
    }
    objects.push_back(std::move(obj));
    line_numbers.push_back(lineno);
  }

  RecordFile out;
  out.impossible = std::move(impossible);
  if (fixed_scope) {
    out.records.scope = *fixed_scope;
  } else {
    std::vector<Variable> vs;
    for (const auto& name : var_order) vs.push_back({name, frames[name]});
    out.records.scope = Scope(std::move(vs));
  }
  const Scope& scope = out.records.scope;
  for (std::size_t idx = 0; idx < objects.size(); ++idx) {
    const auto& obj = objects[idx];
    std::string where = "records line " + std::to_string(line_numbers[idx]);
    ProductParts parts;
    for (const auto& var : scope.variables()) {
      if (!obj.contains(var.name))
        throw std::invalid_argument(where + ": missing variable '" + var.name + "'");
      parts.push_back(parse_part(var, obj[var.name], where));
    }
    if (obj.size() != scope.size())
      throw std::invalid_argument(where + ": unknown variable in record");
    out.records.records.push_back(std::move(parts));
  }
  return out;
}

}  // namespace

RecordFile parse_records(const std::string& text) { return parse_records_impl(text, nullptr); }

RecordFile parse_records(const std::string& text, const Scope& scope) {
  return parse_records_impl(text, &scope);
}

std::string serialize_records(const RecordSet& rs, const std::string& header_comment) {
  std::string out;
  if (!header_comment.empty()) out += "# " + header_comment + "\n";
  for (const auto& rec : rs.records) {
    json obj;
    for (std::size_t i = 0; i < rs.scope.size(); ++i)
      obj[rs.scope.at(i).name] = part_to_json(rs.scope.at(i), rec[i]);
    out += obj.dump() + "\n";
  }
  return out;
}

MassFunction empirical_mass(const RecordSet& records) {
  if (records.records.empty()) throw std::invalid_argument("empty record set");
  std::map<FocalKey, double> counts;
  for (const auto& rec : records.records) counts[rec] += 1.0;
  double n = static_cast<double>(records.records.size());
  for (auto& [k, v] : counts) v /= n;
  return MassFunction(records.scope, std::move(counts));
}

std::string generator_header(std::size_t n, std::uint64_t seed) {
  return "prng=mt19937_64(C++11) method=inverse-cdf seed=" + std::to_string(seed) +
         " n=" + std::to_string(n);
}

RecordSet generate_records(const MassFunction& m, std::size_t n, std::uint64_t seed) {
  ValuationClass cls = classify(m);
  if (!cls.proper || !cls.normal)
    throw std::invalid_argument("generation requires a proper normal mass function");
  if (!m.all_product())
    throw std::invalid_argument("generation requires product-form focal sets");

  std::vector<std::pair<double, const ProductParts*>> cdf;
  double cum = 0.0;
  for (const auto& [k, v] : m.assignments()) {
    cum += v;
    cdf.push_back({cum, &std::get<ProductParts>(k)});
  }

  RecordSet out;
  out.scope = m.scope();
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    u *= cum;  // cum is 1 up to rounding; keeps the last bin closed
    const ProductParts* pick = cdf.back().second;
    for (const auto& [c, parts] : cdf)
      if (u < c) { pick = parts; break; }
    out.records.push_back(*pick);
  }
  return out;
}

}  // namespace dstf
