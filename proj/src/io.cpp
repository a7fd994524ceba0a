#include "dcwave/io.hpp"

#include "dcwave/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dcwave {

namespace {

json cjson(cplx c) { return json::array({c.real(), c.imag()}); }

cplx cfrom(const json& j)
{
    if (j.is_number()) return cplx(j.get<double>());
    if (!j.is_array() || j.size() != 2) throw ConfigError("complex value must be a number or [re, im]");
    return cplx(j[0].get<double>(), j[1].get<double>());
}

json num(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace

json to_json(const WeightSequence& seq)
{
    json j;
    if (seq.kind == WeightSequence::Kind::Gevrey) {
        j["kind"] = "gevrey";
        j["s"] = seq.s;
        j["K_max"] = seq.K_max;
    } else {
        j["kind"] = "table";
        j["values"] = seq.values;
    }
    return j;
}

WeightSequence sequence_from_json(const json& j)
{
    try {
        std::string kind = j.at("kind").get<std::string>();
        if (kind == "gevrey") return make_gevrey(j.at("s").get<double>(), j.value("K_max", 64));
        if (kind == "table") return make_table(j.at("values").get<std::vector<double>>(), j.value("K_max", -1));
        throw ConfigError("unknown sequence kind: " + kind);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad sequence: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad sequence: ") + e.what());
    }
}

json to_json(const RegularityReport& r)
{
    json j;
    j["passed"] = r.passed;
    json f = json::array();
    for (const auto& [tag, idx] : r.failures) f.push_back({{"condition", std::string(1, tag)}, {"index", idx}});
    j["failures"] = f;
    return j;
}

json to_json(const Jet& jet)
{
    const JetSpace& sp = jet.space();
    json j;
    json zeta = json::array();
    for (const auto& z : sp.zeta0) zeta.push_back(cjson(z));
    j["base_point"] = {{"x", sp.x0}, {"zeta", zeta}};
    j["n_x"] = sp.n_x;
    j["n_zeta"] = sp.n_zeta;
    j["D"] = sp.degree_budget;
    json c = json::array();
    for (const auto& [alpha, v] : jet.coeffs()) c.push_back(json::array({alpha, v.real(), v.imag()}));
    j["coeffs"] = c;
    return j;
}

Jet jet_from_json(const json& j)
{
    try {
        JetSpace sp = make_space(j.at("n_x").get<int>(), j.at("n_zeta").get<int>(), j.at("D").get<int>());
        if (j.contains("base_point")) {
            const json& bp = j["base_point"];
            if (bp.contains("x")) sp.x0 = bp["x"].get<std::vector<double>>();
            if (bp.contains("zeta")) {
                sp.zeta0.clear();
                for (const auto& z : bp["zeta"]) sp.zeta0.push_back(cfrom(z));
            }
        }
        Jet jet(sp);
        for (const auto& e : j.at("coeffs")) {
            MultiIndex alpha = e.at(0).get<MultiIndex>();
            double re = e.at(1).get<double>();
            double im = e.size() > 2 ? e.at(2).get<double>() : 0.0;
            jet.set(alpha, cplx(re, im));
        }
        return jet;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad jet: ") + e.what());
    } catch (const ArityMismatch& e) {
        throw ConfigError(std::string("bad jet: ") + e.what());
    }
}

json to_json(const VectorFieldJet& L)
{
    json j;
    j["a"] = json::array();
    for (const auto& x : L.a) j["a"].push_back(to_json(x));
    j["b"] = json::array();
    for (const auto& x : L.b) j["b"].push_back(to_json(x));
    j["time_dependent"] = L.time_dependent;
    j["time_slot"] = L.time_slot;
    return j;
}

VectorFieldJet field_from_json(const json& j)
{
    try {
        VectorFieldJet L;
        for (const auto& x : j.at("a")) L.a.push_back(jet_from_json(x));
        if (j.contains("b"))
            for (const auto& x : j["b"]) L.b.push_back(jet_from_json(x));
        L.time_dependent = j.value("time_dependent", false);
        L.time_slot = j.value("time_slot", -1);
        if (L.a.empty()) throw ConfigError("vector field needs coefficients");
        const JetSpace& sp = L.space();
        while (static_cast<int>(L.b.size()) < sp.n_zeta) L.b.emplace_back(sp);
        L.validate();
        return L;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad vector field: ") + e.what());
    } catch (const ArityMismatch& e) {
        throw ConfigError(std::string("bad vector field: ") + e.what());
    }
}

json to_json(const FormalSeries& s)
{
    json j;
    j["n_max"] = s.n_max;
    j["valid_degree"] = s.valid_degree;
    j["u"] = json::array();
    for (const auto& u : s.u) j["u"].push_back(to_json(u));
    return j;
}

json to_json(const GrowthEstimate& g)
{
    return {{"C_fit", g.C_fit}, {"B_fit", g.B_fit}, {"box", {{"lo", g.box.lo}, {"hi", g.box.hi}}},
            {"max_alpha", g.max_alpha}};
}

json to_json(const FlatnessFit& f)
{
    return {{"A", num(f.A)}, {"Q", num(f.Q)}, {"delta", num(f.delta)}, {"sup_ratio", num(f.sup_ratio)},
            {"passed", f.passed}};
}

json to_json(const DecayReport& r)
{
    json j;
    j["point"] = r.point;
    j["direction_index"] = r.direction_index;
    j["direction"] = r.direction;
    j["A_fit"] = r.A_fit ? json(*r.A_fit) : json(nullptr);
    j["growth_ratio"] = num(r.growth_ratio);
    j["passed"] = r.passed;
    j["lambdas"] = r.lambdas;
    j["abs_F"] = r.values;
    j["errors"] = r.errors;
    j["needed_A"] = r.needed_A;
    return j;
}

json to_json(const PhaseBoundReport& r)
{
    return {{"cone", {{"center", r.center}, {"half_angle", r.half_angle}}}, {"C0", r.C0}, {"delta", r.delta},
            {"max_violation", r.max_violation}, {"passed", r.passed}};
}

json to_json(const ScanResult& r)
{
    json j;
    j["angular_step"] = r.angular_step;
    j["flagged"] = r.flagged;
    j["singular"] = r.singular;
    j["directions"] = json::array();
    for (const auto& d : r.reports) j["directions"].push_back(to_json(d));
    return j;
}

json to_json(const WfReport& r)
{
    json j;
    j["fixture"] = r.fixture;
    j["a0"] = json::array();
    for (const auto& a : r.a0) j["a0"].push_back(cjson(a));
    j["pde_residual"] = r.pde_residual;
    j["char_convention"] = "symbol";
    j["flagged"] = r.scan.flagged;
    j["singular"] = r.scan.singular;
    j["char_distance"] = r.char_distance;
    j["char_distance_flipped"] = r.char_distance_flipped;
    j["max_distance"] = r.max_distance;
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    j["trace"] = {{"im_b0", r.trace.im_b0},
                  {"singular_directions", [&] {
                       json d = json::array();
                       for (int k : r.trace.scan.singular) d.push_back(r.trace.scan.reports[k].direction[0]);
                       return d;
                   }()},
                  {"halfspace_plus_holds", r.trace.plus_holds},
                  {"halfspace_minus_holds", r.trace.minus_holds},
                  {"decay_side", "Im b(0).xi < 0 (verified by the phase-bound acceptance check)"}};
    return j;
}

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("file not found: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + path);
}

std::string fmt17(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string CsvTable::str() const
{
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << "\n";
    }
    return os.str();
}

json versions()
{
    return {{"dcwave", "0.1.0"},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"compiler", __VERSION__}};
}

}  // namespace dcwave
