#include "csbp/io.hpp"

#include "csbp/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace csbp {

namespace {

using nlohmann::json;

void only_keys(const json& obj, const char* where, std::initializer_list<const char*> keys)
{
    if (!obj.is_object())
        throw SchemaError(std::string(where) + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* k : keys)
            known = known || key == k;
        if (!known)
            throw SchemaError(std::string(where) + ": unknown field '" + key + "'");
    }
}

double number(const json& obj, const char* key, const char* where, bool required, double fallback = 0.0)
{
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (required)
            throw SchemaError(std::string(where) + ": missing field '" + key + "'");
        return fallback;
    }
    if (!it->is_number())
        throw SchemaError(std::string(where) + ": field '" + key + "' must be a number");
    return it->get<double>();
}

const json& array(const json& obj, const char* key, const char* where)
{
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_array())
        throw SchemaError(std::string(where) + ": field '" + key + "' must be an array");
    return *it;
}

LevyMeasure levy_from_json(const json& l)
{
    if (!l.is_object() || !l.contains("kind") || !l["kind"].is_string())
        throw SchemaError("levy: expected an object with a string 'kind'");
    std::string kind = l["kind"];
    if (kind == "zero") {
        only_keys(l, "levy", {"kind"});
        return ZeroMeasure{};
    }
    if (kind == "atoms") {
        only_keys(l, "levy", {"kind", "atoms"});
        AtomMeasure a;
        for (const auto& at : array(l, "atoms", "levy")) {
            only_keys(at, "atom", {"y", "mass"});
            a.atoms.push_back({number(at, "y", "atom", true), number(at, "mass", "atom", true)});
        }
        return a;
    }
    if (kind == "stable") {
        only_keys(l, "levy", {"kind", "alpha", "c"});
        return StableMeasure{number(l, "alpha", "levy", true), number(l, "c", "levy", true)};
    }
    if (kind == "tempered") {
        only_keys(l, "levy", {"kind", "alpha", "theta", "c"});
        return TemperedMeasure{number(l, "alpha", "levy", true), number(l, "theta", "levy", true),
                               number(l, "c", "levy", true)};
    }
    if (kind == "density") {
        only_keys(l, "levy", {"kind", "terms"});
        std::vector<PowerTerm> terms;
        for (const auto& t : array(l, "terms", "levy")) {
            only_keys(t, "term", {"c", "alpha", "theta"});
            terms.push_back({number(t, "c", "term", true), number(t, "alpha", "term", true),
                             number(t, "theta", "term", false)});
        }
        try {
            return density_from_terms(std::move(terms));
        } catch (const std::invalid_argument& e) {
            throw SchemaError(e.what());
        }
    }
    throw SchemaError("levy: unknown kind '" + kind + "'");
}

} // namespace

BranchingMechanism mechanism_from_json(const json& doc)
{
    only_keys(doc, "mechanism", {"sigma2", "gamma", "kappa", "compensation", "levy"});
    BranchingMechanism m;
    m.sigma2 = number(doc, "sigma2", "mechanism", false);
    m.gamma = number(doc, "gamma", "mechanism", false);
    m.kappa = number(doc, "kappa", "mechanism", false);
    if (auto it = doc.find("compensation"); it != doc.end()) {
        if (*it == "unit")
            m.compensation = Compensation::UnitTruncation;
        else if (*it == "full")
            m.compensation = Compensation::FullCompensation;
        else
            throw SchemaError("mechanism: compensation must be \"unit\" or \"full\"");
    }
    if (auto it = doc.find("levy"); it != doc.end())
        m.levy = levy_from_json(*it);
    try {
        validate(m);
    } catch (const std::invalid_argument& e) {
        throw SchemaError(e.what());
    }
    return m;
}

BranchingMechanism parse_mechanism(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("malformed JSON: ") + e.what());
    }
    return mechanism_from_json(doc);
}

BranchingMechanism load_mechanism(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw SchemaError("cannot read spec file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_mechanism(buf.str());
}

nlohmann::ordered_json mechanism_to_json(const BranchingMechanism& m)
{
    nlohmann::ordered_json doc;
    doc["sigma2"] = m.sigma2;
    doc["gamma"] = m.gamma;
    doc["kappa"] = m.kappa;
    doc["compensation"] = m.compensation == Compensation::UnitTruncation ? "unit" : "full";
    nlohmann::ordered_json l;
    if (std::holds_alternative<ZeroMeasure>(m.levy)) {
        l["kind"] = "zero";
    } else if (auto a = std::get_if<AtomMeasure>(&m.levy)) {
        l["kind"] = "atoms";
        l["atoms"] = nlohmann::ordered_json::array();
        for (const auto& at : a->atoms)
            l["atoms"].push_back({{"y", at.y}, {"mass", at.mass}});
    } else if (auto s = std::get_if<StableMeasure>(&m.levy)) {
        l["kind"] = "stable";
        l["alpha"] = s->alpha;
        l["c"] = s->c;
    } else if (auto t = std::get_if<TemperedMeasure>(&m.levy)) {
        l["kind"] = "tempered";
        l["alpha"] = t->alpha;
        l["theta"] = t->theta;
        l["c"] = t->c;
    } else {
        const auto& d = std::get<DensityMeasure>(m.levy);
        if (d.terms.empty() || d.tilt != 0.0)
            throw SchemaError("density measure has no serialisable terms");
        l["kind"] = "density";
        l["terms"] = nlohmann::ordered_json::array();
        for (const auto& t : d.terms)
            l["terms"].push_back({{"c", t.c}, {"alpha", t.alpha}, {"theta", t.theta}});
    }
    doc["levy"] = l;
    return doc;
}

nlohmann::ordered_json json_number(double v)
{
    if (std::isnan(v))
        return nullptr;
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return v;
}

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace csbp
