#include "qmetric/io.hpp"

#include <fstream>
#include <sstream>

#include "qmetric/error.hpp"

namespace qmetric::io {

namespace {

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key, "missing field");
  return *it;
}

std::int64_t as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<std::int64_t>();
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

cplx parse_complex(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  const double re = j.contains("re") ? as_number(j["re"], path + ".re") : 0.0;
  const double im = j.contains("im") ? as_number(j["im"], path + ".im") : 0.0;
  return {re, im};
}

FiniteGroupTable parse_finite(const json& j, const std::string& path) {
  try {
    if (j.contains("builtin")) {
      const auto name = j["builtin"].get<std::string>();
      if (name == "S3") return FiniteGroupTable::symmetric3();
      if (name.size() > 1 && name[0] == 'Z') return FiniteGroupTable::cyclic(std::stoi(name.substr(1)));
      throw ConfigError(path + ".builtin", "unknown builtin finite group '" + name + "'");
    }
    const auto& table = require(j, "table", path);
    if (!table.is_array()) throw ConfigError(path + ".table", "expected an array of rows");
    auto rows = table.get<std::vector<std::vector<int>>>();
    if (j.contains("order") && as_int(j["order"], path + ".order") != static_cast<std::int64_t>(rows.size()))
      throw ConfigError(path + ".order", "does not match the number of table rows");
    return FiniteGroupTable::from_table(std::move(rows));
  } catch (const GroupError& e) {
    throw ConfigError(path, e.what());
  } catch (const json::exception& e) {
    throw ConfigError(path, e.what());
  } catch (const std::invalid_argument&) {
    throw ConfigError(path + ".builtin", "malformed cyclic group name");
  }
}

}  // namespace

GroupSpec parse_group_spec(const json& j, const std::string& path) {
  GroupSpec spec;
  const auto& fam = require(j, "family", path);
  if (!fam.is_string()) throw ConfigError(path + ".family", "expected a string");
  const auto name = fam.get<std::string>();
  if (name == "free_abelian") {
    spec.family = Family::free_abelian;
    spec.rank = j.contains("rank") ? static_cast<int>(as_int(j["rank"], path + ".rank")) : 1;
    if (spec.rank < 1) throw ConfigError(path + ".rank", "must be >= 1");
  } else if (name == "product_z_finite") {
    spec.family = Family::product_z_finite;
    spec.finite = parse_finite(require(j, "finite", path), path + ".finite");
  } else if (name == "infinite_dihedral") {
    spec.family = Family::infinite_dihedral;
  } else {
    throw ConfigError(path + ".family", "unknown family '" + name + "'");
  }

  if (j.contains("generators")) {
    // parse elements against the default-generator group of the same family
    const Group shape(spec);
    const auto& gens = j["generators"];
    if (!gens.is_array()) throw ConfigError(path + ".generators", "expected an array");
    std::vector<GroupElement> list;
    for (std::size_t i = 0; i < gens.size(); ++i)
      list.push_back(parse_element(gens[i], shape, path + ".generators[" + std::to_string(i) + "]"));
    spec.generators = std::move(list);
  }
  return spec;
}

Group parse_group(const json& j, const std::string& path) {
  auto spec = parse_group_spec(j, path);
  try {
    return Group(std::move(spec));
  } catch (const GroupError& e) {
    throw ConfigError(path, e.what());
  }
}

GroupElement parse_element(const json& j, const Group& group, const std::string& path) {
  GroupElement g;
  if (group.family() == Family::free_abelian) {
    if (j.is_number_integer()) {
      g.z = {j.get<std::int64_t>()};
    } else if (j.is_array()) {
      for (std::size_t i = 0; i < j.size(); ++i) g.z.push_back(as_int(j[i], path + "[" + std::to_string(i) + "]"));
    } else {
      throw ConfigError(path, "expected an integer vector");
    }
  } else {
    if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected [m, f]");
    g.z = {as_int(j[0], path + "[0]")};
    g.f = static_cast<int>(as_int(j[1], path + "[1]"));
  }
  try {
    group.check_element(g);
  } catch (const GroupError& e) {
    throw ConfigError(path, e.what());
  }
  return g;
}

json element_to_json(const GroupElement& g, const Group& group) {
  if (group.family() == Family::free_abelian) return json(g.z);
  return json::array({g.z[0], g.f});
}

AlgebraElement parse_algebra(const json& j, const Group& group, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of {element, re, im}");
  AlgebraElement a;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    a.add(parse_element(require(j[i], "element", p), group, p + ".element"), parse_complex(j[i], p));
  }
  return a;
}

json algebra_to_json(const AlgebraElement& a, const Group& group) {
  json out = json::array();
  for (const auto& [g, x] : a.terms())
    out.push_back({{"element", element_to_json(g, group)}, {"re", x.real()}, {"im", x.imag()}});
  return out;
}

StateRep parse_state(const json& j, const Group& group, const std::string& path) {
  const auto& kind_j = require(j, "kind", path);
  if (!kind_j.is_string()) throw ConfigError(path + ".kind", "expected a string");
  const auto kind = kind_j.get<std::string>();
  try {
    if (kind == "trace") return StateRep::trace();
    if (kind == "one") return StateRep::one();
    if (kind == "character") {
      const auto& zj = require(j, "z", path);
      if (!zj.is_array()) throw ConfigError(path + ".z", "expected an array");
      std::vector<cplx> z;
      for (std::size_t i = 0; i < zj.size(); ++i) z.push_back(parse_complex(zj[i], path + ".z[" + std::to_string(i) + "]"));
      return StateRep::character(group, std::move(z));
    }
    if (kind == "vector") return StateRep::vector(group, parse_algebra(require(j, "support", path), group, path + ".support"));
    if (kind == "density") return StateRep::density(group, parse_algebra(require(j, "b", path), group, path + ".b"));
    if (kind == "table") {
      auto a = parse_algebra(require(j, "entries", path), group, path + ".entries");
      bool strict = false;
      if (j.contains("extension")) {
        if (!j["extension"].is_string()) throw ConfigError(path + ".extension", "expected a string");
        const auto ext = j["extension"].get<std::string>();
        if (ext == "none") strict = true;
        else if (ext != "zero") throw ConfigError(path + ".extension", "expected 'zero' or 'none'");
      }
      return StateRep::table(a.terms(), strict);
    }
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path + ".kind", "unknown state kind '" + kind + "'");
}

json load_json_file(const std::string& file, const std::string& path) {
  std::ifstream in(file);
  if (!in) throw ConfigError(path, "cannot open file '" + file + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path, "invalid JSON in '" + file + "': " + e.what());
  }
}

}  // namespace qmetric::io
