#include "dcwave/cli.hpp"
#include "dcwave/errors.hpp"
#include "dcwave/fbi.hpp"
#include "dcwave/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dcwave;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "dcwave");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream o, e;
    int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
    return {code, o.str(), e.str()};
}

fs::path scratch(const std::string& name)
{
    fs::path p = fs::temp_directory_path() / "dcwave_cli_test" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 2")
{
    CHECK(cli({}).code == 2);
    CHECK(cli({"bogus"}).code == 2);
    CHECK(cli({"acceptance", "--criterion", "11"}).code == 2);
    Run r = cli({"weights", "--config", "/no/such/config.json"});
    CHECK(r.code == 2);
    CHECK(r.err.find("/no/such/config.json") != std::string::npos);

    fs::path d = scratch("bad");
    write(d / "c.json", R"({"input": "/no/such/grid.bin"})");
    Run g = cli({"fbi", "--config", (d / "c.json").string(), "--out", d.string()});
    CHECK(g.code == 2);
    CHECK(g.err.find("/no/such/grid.bin") != std::string::npos);

    write(d / "broken.json", "{not json");
    CHECK(cli({"weights", "--config", (d / "broken.json").string(), "--out", d.string()}).code == 2);
    write(d / "knob.json", R"({"sequence": {"kind": "gevrey", "s": 0.5}})");
    CHECK(cli({"weights", "--config", (d / "knob.json").string(), "--out", d.string()}).code == 2);
    CHECK(cli({"wf-experiment", "--fixture", "nope", "--out", d.string()}).code == 2);
}

TEST_CASE("weights report")
{
    fs::path d = scratch("weights");
    Run r = cli({"weights", "--out", d.string()});
    CHECK(r.code == 0);
    json j = json::parse(slurp(d / "weights.json"));
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"config", "results", "versions"});
    CHECK(j["results"]["regularity"]["passed"] == true);
    std::string csv = slurp(d / "weights.csv");
    CHECK(csv.rfind("r,h,h1,N\n", 0) == 0);

    // m_k = 1 fails divergence: a failed check exits 1.
    json bad = {{"sequence", {{"kind", "table"}, {"values", json::array()}}}};
    double f = 1.0;
    for (int k = 0; k <= 64; ++k) {
        if (k) f *= k;
        bad["sequence"]["values"].push_back(f);
    }
    write(d / "bad.json", bad.dump());
    CHECK(cli({"weights", "--config", (d / "bad.json").string(), "--out", d.string()}).code == 1);
}

TEST_CASE("jets and extend")
{
    fs::path d = scratch("jets");
    CHECK(cli({"jets", "--out", d.string()}).code == 0);
    json j = json::parse(slurp(d / "jets.json"));
    CHECK(j["results"]["pass"] == true);
    CHECK(j["results"]["series"]["u"].size() == 13);

    write(d / "aa.json", R"({"mode": "almost_analytic", "sequence": {"kind": "gevrey", "s": 2, "K_max": 1024},
                             "n_t": 12, "x": {"min": -0.5, "max": 0.5, "count": 11}})");
    CHECK(cli({"extend", "--config", (d / "aa.json").string(), "--out", d.string()}).code == 0);
    json e = json::parse(slurp(d / "extend.json"));
    std::vector<std::string> keys;
    for (auto it = e["results"].begin(); it != e["results"].end(); ++it) keys.push_back(it.key());
    CHECK(std::vector<std::string>(keys.begin(), keys.begin() + 5) ==
          std::vector<std::string>{"A", "Q", "delta", "sup_ratio", "passed"});
    CHECK(slurp(d / "extend.csv").rfind("t,sup_abs_Lu,h_Q_t,ratio\n", 0) == 0);
}

TEST_CASE("fbi report is sorted and reproducible")
{
    fs::path a = scratch("fbi_a"), b = scratch("fbi_b");
    CHECK(cli({"fbi", "--fixture", "sign", "--out", a.string()}).code == 0);
    CHECK(cli({"fbi", "--fixture", "sign", "--out", b.string(), "--threads", "1"}).code == 0);
    CHECK(slurp(a / "fbi.json") == slurp(b / "fbi.json"));
    CHECK(slurp(a / "fbi.csv") == slurp(b / "fbi.csv"));

    std::istringstream csv(slurp(a / "fbi.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "direction_index,omega_0,lambda,abs_F,envelope,passed,err,needed_A");
    std::pair<int, double> prev{-1, 0.0};
    int rows = 0;
    while (std::getline(csv, line)) {
        std::istringstream ls(line);
        std::string f0, f1, f2;
        std::getline(ls, f0, ',');
        std::getline(ls, f1, ',');
        std::getline(ls, f2, ',');
        std::pair<int, double> key{std::stoi(f0), std::stod(f2)};
        CHECK(prev < key);
        prev = key;
        ++rows;
    }
    CHECK(rows == 26);

    // Noise seed flag changes the payload only through the fixture.
    fs::path n1 = scratch("fbi_n1"), n2 = scratch("fbi_n2");
    write(n1 / "c.json", R"({"fixture": "analytic", "noise": 1e-6})");
    CHECK(cli({"fbi", "--config", (n1 / "c.json").string(), "--seed", "5", "--out", n1.string()}).code == 0);
    CHECK(cli({"fbi", "--config", (n1 / "c.json").string(), "--seed", "6", "--out", n2.string()}).code == 0);
    CHECK(slurp(n1 / "fbi.csv") != slurp(n2 / "fbi.csv"));
}

TEST_CASE("fbi from a binary grid file")
{
    fs::path d = scratch("fbi_file");
    write_grid((d / "g.bin").string(), fbi_fixture("trace_upper"));
    json c = {{"input", (d / "g.bin").string()}, {"expect_singular", {0}}};
    write(d / "c.json", c.dump());
    Run r = cli({"fbi", "--config", (d / "c.json").string(), "--out", d.string()});
    CHECK(r.code == 0);
    c["expect_singular"] = json::array({1});
    write(d / "c.json", c.dump());
    CHECK(cli({"fbi", "--config", (d / "c.json").string(), "--out", d.string()}).code == 1);
}

TEST_CASE("wf-experiment")
{
    fs::path d = scratch("wf");
    CHECK(cli({"wf-experiment", "--fixture", "conormal", "--out", d.string()}).code == 0);
    json j = json::parse(slurp(d / "wf.json"));
    CHECK(j["results"]["pass"] == true);
    CHECK(j["results"]["singular"] == json::array({24, 56}));
    CHECK(slurp(d / "wf.csv").rfind("direction_index,omega_x,omega_t,", 0) == 0);
}

TEST_CASE("acceptance subcommand")
{
    fs::path d = scratch("acc");
    Run r = cli({"acceptance", "--criterion", "2", "--criterion", "3", "--out", d.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("PASS  2") != std::string::npos);
    CHECK(r.out.find("PASS  3") != std::string::npos);
    CHECK(fs::exists(d / "acceptance.json"));
}

TEST_CASE("emit_report refuses empty results")
{
    fs::path d = scratch("empty");
    CHECK_THROWS_AS(emit_report(d.string(), "x", json::object(), json::object(), CsvTable{}), IoError);
    CHECK_THROWS_AS(emit_report("/proc/forbidden/dir", "x", json::object(), json{{"a", 1}}, CsvTable{}), IoError);
}

TEST_CASE("json round trips")
{
    JetSpace sp = make_space(1, 1, 5);
    sp.x0 = {0.25};
    sp.zeta0 = {cplx(0.5, -1.0)};
    Jet j = Jet::variable(sp, 0) * Jet::variable(sp, 1) * cplx(2.0, 3.0) + Jet::constant(sp, 1e-300);
    Jet back = jet_from_json(json::parse(to_json(j).dump()));
    CHECK(back.space() == sp);
    CHECK(back.max_abs_diff(j) == 0.0);

    VectorFieldJet L{{Jet::variable(sp, 0)}, {Jet::constant(sp, cplx(0, 1))}, false, -1};
    VectorFieldJet Lb = field_from_json(json::parse(to_json(L).dump()));
    CHECK(Lb.a[0].max_abs_diff(L.a[0]) == 0.0);
    CHECK(Lb.b[0].max_abs_diff(L.b[0]) == 0.0);

    WeightSequence g = sequence_from_json(to_json(make_gevrey(1.5, 100)));
    CHECK(g.K_max == 100);
    CHECK(g.s == 1.5);
    WeightSequence t = sequence_from_json(to_json(make_table({1, 1, 2, 6, 24, 120, 720, 5040, 40320})));
    CHECK(t.K_max == 8);
    CHECK_THROWS_AS(sequence_from_json(json{{"kind", "other"}}), ConfigError);
    CHECK_THROWS_AS(jet_from_json(json{{"n_x", 1}}), ConfigError);

    FlatnessFit f;
    f.A = 1.5;
    f.Q = 2;
    f.delta = 0.1;
    f.sup_ratio = 1;
    f.passed = true;
    CHECK(to_json(f).dump() == R"({"A":1.5,"Q":2.0,"delta":0.1,"sup_ratio":1.0,"passed":true})");
    CHECK(fmt17(0.1) == "0.10000000000000001");
}

}  // TEST_SUITE
