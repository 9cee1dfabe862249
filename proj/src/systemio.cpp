#include "kh/systemio.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "kh/errors.hpp"

namespace kh {
namespace {

struct SpaceData {
  std::vector<std::string> atoms;
  std::vector<Rat> masses;
};

SpaceData parse_space(const Json& node, const std::string& which) {
  if (!node.is_object() || !node.contains("atoms") || !node["atoms"].is_array())
    throw ValidationError(which + ": expected an object with an \"atoms\" array");
  SpaceData out;
  double sum = 0.0;
  for (const auto& atom : node["atoms"]) {
    if (!atom.contains("id") || !atom["id"].is_string())
      throw ValidationError(which + ": atom without a string id");
    const std::string id = atom["id"].get<std::string>();
    if (!atom.contains("mass") || !atom["mass"].is_number())
      throw ValidationError(which + ": atom '" + id + "' without a numeric mass");
    const double mass = atom["mass"].get<double>();
    if (!(mass > 0.0))
      throw ValidationError(which + ": mass of atom '" + id + "' is not positive");
    sum += mass;
    Rat exact;
    if (atom.contains("mass_exact")) {
      if (!atom["mass_exact"].is_string())
        throw ValidationError(which + ": mass_exact of atom '" + id + "' must be a string");
      try {
        exact = Rat(atom["mass_exact"].get<std::string>());
      } catch (const std::exception&) {
        throw ValidationError(which + ": mass_exact of atom '" + id + "' does not parse");
      }
      if (exact <= 0)
        throw ValidationError(which + ": mass_exact of atom '" + id + "' is not positive");
    } else {
      exact = Rat(mass);
    }
    out.atoms.push_back(id);
    out.masses.push_back(std::move(exact));
  }
  if (out.atoms.empty()) throw ValidationError(which + ": no atoms");
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError(which + ": mass sum is " + std::to_string(sum) +
                          ", expected 1 within 1e-9");
  Rat total(0);
  for (const Rat& m : out.masses) total += m;
  for (Rat& m : out.masses) m /= total;
  return out;
}

std::vector<std::size_t> parse_perm(const Json& node, const std::vector<std::string>& atoms,
                                    const std::map<std::string, std::size_t>& index,
                                    const std::string& where) {
  if (!node.is_object()) throw ValidationError(where + ": expected an object map");
  std::vector<std::size_t> perm(atoms.size(), atoms.size());
  std::vector<bool> hit(atoms.size(), false);
  for (const auto& [from, to] : node.items()) {
    auto fi = index.find(from);
    if (fi == index.end())
      throw ValidationError(where + ": unknown atom '" + from + "'");
    if (!to.is_string() || index.find(to.get<std::string>()) == index.end())
      throw ValidationError(where + ": image of '" + from + "' is not a known atom");
    const std::size_t ti = index.at(to.get<std::string>());
    perm[fi->second] = ti;
    if (hit[ti])
      throw ValidationError(where + ": not a permutation, atom '" + to.get<std::string>() +
                            "' is hit twice");
    hit[ti] = true;
  }
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (perm[i] == atoms.size())
      throw ValidationError(where + ": not a permutation, atom '" + atoms[i] + "' has no image");
  return perm;
}

void render(const Json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in + Json(key).dump() + ": ";
        render(value, out, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& value : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        render(value, out, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", j.get<double>());
      out += buf;
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

FiniteExtension parse_system(const Json& doc) {
  if (!doc.is_object()) throw ValidationError("document: expected a JSON object");
  for (const char* key : {"space", "bottom_space", "factor", "dynamics", "group"})
    if (!doc.contains(key))
      throw ValidationError(std::string("document: missing field \"") + key + "\"");

  auto top_data = parse_space(doc["space"], "space");
  auto bottom_data = parse_space(doc["bottom_space"], "bottom_space");

  std::map<std::string, std::size_t> top_index;
  std::map<std::string, std::size_t> bottom_index;
  for (std::size_t i = 0; i < top_data.atoms.size(); ++i) top_index[top_data.atoms[i]] = i;
  for (std::size_t i = 0; i < bottom_data.atoms.size(); ++i)
    bottom_index[bottom_data.atoms[i]] = i;
  if (top_index.size() != top_data.atoms.size())
    throw ValidationError("space: duplicate atom id");
  if (bottom_index.size() != bottom_data.atoms.size())
    throw ValidationError("bottom_space: duplicate atom id");

  const auto& fnode = doc["factor"];
  if (!fnode.is_object() || !fnode.contains("map") || !fnode["map"].is_object())
    throw ValidationError("factor: expected an object with a \"map\" object");
  std::vector<std::size_t> factor(top_data.atoms.size(), bottom_data.atoms.size());
  for (const auto& [from, to] : fnode["map"].items()) {
    auto fi = top_index.find(from);
    if (fi == top_index.end()) throw ValidationError("factor: unknown atom '" + from + "'");
    if (!to.is_string() || bottom_index.find(to.get<std::string>()) == bottom_index.end())
      throw ValidationError("factor: image of '" + from + "' is not a bottom atom");
    factor[fi->second] = bottom_index.at(to.get<std::string>());
  }
  for (std::size_t x = 0; x < factor.size(); ++x)
    if (factor[x] == bottom_data.atoms.size())
      throw ValidationError("factor: map is not total, atom '" + top_data.atoms[x] +
                            "' has no image");

  const std::string group = doc["group"].is_string() ? doc["group"].get<std::string>() : "";
  if (group != "Z" && group != "free")
    throw ValidationError("group: expected \"Z\" or \"free\"");
  const GroupKind kind =
      group == "Z" ? GroupKind::SingleGeneratorZ : GroupKind::FreeOnGenerators;

  const auto& dna = doc["dynamics"];
  if (!dna.is_object() || !dna.contains("generators") || !dna["generators"].is_array() ||
      dna["generators"].empty())
    throw ValidationError("dynamics: expected a nonempty \"generators\" array");
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> top_perms;
  std::vector<std::vector<std::size_t>> bottom_perms;
  for (const auto& gen : dna["generators"]) {
    if (!gen.contains("name") || !gen["name"].is_string())
      throw ValidationError("dynamics: generator without a name");
    const std::string name = gen["name"].get<std::string>();
    if (!gen.contains("top_perm") || !gen.contains("bottom_perm"))
      throw ValidationError("dynamics: generator '" + name + "' needs top_perm and bottom_perm");
    auto tp = parse_perm(gen["top_perm"], top_data.atoms, top_index,
                         "generator '" + name + "' top_perm");
    auto bp = parse_perm(gen["bottom_perm"], bottom_data.atoms, bottom_index,
                         "generator '" + name + "' bottom_perm");
    for (std::size_t x = 0; x < factor.size(); ++x)
      if (factor[tp[x]] != bp[factor[x]])
        throw ValidationError("dynamics: equivariance fails for generator '" + name +
                              "' at atom '" + top_data.atoms[x] + "'");
    for (std::size_t x = 0; x < tp.size(); ++x)
      if (top_data.masses[tp[x]] != top_data.masses[x])
        throw ValidationError("dynamics: generator '" + name +
                              "' does not preserve the mass of atom '" + top_data.atoms[x] +
                              "'");
    for (std::size_t y = 0; y < bp.size(); ++y)
      if (bottom_data.masses[bp[y]] != bottom_data.masses[y])
        throw ValidationError("dynamics: generator '" + name +
                              "' does not preserve the mass of bottom atom '" +
                              bottom_data.atoms[y] + "'");
    names.push_back(name);
    top_perms.push_back(std::move(tp));
    bottom_perms.push_back(std::move(bp));
  }
  if (kind == GroupKind::SingleGeneratorZ && names.size() != 1)
    throw ValidationError("group: \"Z\" requires exactly one generator");

  try {
    MpSystem top(FiniteProbSpace(std::move(top_data.atoms), std::move(top_data.masses)),
                 names, std::move(top_perms), kind);
    MpSystem bottom(
        FiniteProbSpace(std::move(bottom_data.atoms), std::move(bottom_data.masses)),
        std::move(names), std::move(bottom_perms), kind);
    return FiniteExtension(std::move(top), std::move(bottom), std::move(factor));
  } catch (const Error& e) {
    throw ValidationError(e.what());
  }
}

FiniteExtension load_system(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return parse_system(doc);
}

Json serialize_system(const FiniteExtension& ext) {
  auto space_node = [](const FiniteProbSpace& space) {
    Json atoms = Json::array();
    for (std::size_t i = 0; i < space.size(); ++i) {
      std::ostringstream exact;
      exact << space.mass(i);
      atoms.push_back(Json{{"id", space.atom(i)},
                           {"mass", space.massd(i)},
                           {"mass_exact", exact.str()}});
    }
    return Json{{"atoms", std::move(atoms)}};
  };
  auto perm_node = [](const FiniteProbSpace& space, const std::vector<std::size_t>& perm) {
    Json out = Json::object();
    for (std::size_t i = 0; i < perm.size(); ++i) out[space.atom(i)] = space.atom(perm[i]);
    return out;
  };

  Json factor_map = Json::object();
  for (std::size_t x = 0; x < ext.top().space().size(); ++x)
    factor_map[ext.top().space().atom(x)] = ext.bottom().space().atom(ext.factor()[x]);

  Json generators = Json::array();
  for (std::size_t g = 0; g < ext.top().generator_count(); ++g) {
    generators.push_back(Json{{"name", ext.top().name(g)},
                              {"top_perm", perm_node(ext.top().space(), ext.top().perm(g))},
                              {"bottom_perm",
                               perm_node(ext.bottom().space(), ext.bottom().perm(g))}});
  }

  return Json{{"space", space_node(ext.top().space())},
              {"bottom_space", space_node(ext.bottom().space())},
              {"factor", Json{{"map", std::move(factor_map)}}},
              {"dynamics", Json{{"generators", std::move(generators)}}},
              {"group", ext.top().kind() == GroupKind::SingleGeneratorZ ? "Z" : "free"}};
}

std::string render_report(const Json& report) {
  std::string out;
  render(report, out, 0);
  out += "\n";
  return out;
}

std::string fnv1a_digest(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::string fnv1a_digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a_digest(ss.str());
}

}  // namespace kh
