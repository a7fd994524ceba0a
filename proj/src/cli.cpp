#include "dcwave/cli.hpp"

#include "dcwave/acceptance.hpp"
#include "dcwave/dynkin.hpp"
#include "dcwave/errors.hpp"
#include "dcwave/fbi.hpp"
#include "dcwave/jets.hpp"
#include "dcwave/pde.hpp"
#include "dcwave/weights.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>

namespace dcwave {

namespace {

struct Common {
    std::string config;
    std::string out = ".";
    int threads = 0;
    unsigned long long seed = 0;
    bool seed_set = false;
};

std::vector<double> logspace(const json& j)
{
    double a = j.at("min").get<double>(), b = j.at("max").get<double>();
    int n = j.at("count").get<int>();
    if (!(a > 0.0) || !(b >= a) || n < 1) throw ConfigError("log grid needs 0 < min <= max and count >= 1");
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = a * std::pow(b / a, n == 1 ? 0.0 : double(i) / (n - 1));
    return r;
}

std::string num(double v) { return std::isfinite(v) ? fmt17(v) : "nan"; }

json jet_json_1d(int D, std::vector<std::pair<int, double>> terms)
{
    json c = json::array();
    for (auto [k, v] : terms) c.push_back(json::array({json::array({k}), v, 0.0}));
    return {{"n_x", 1}, {"n_zeta", 0}, {"D", D}, {"coeffs", c}};
}

ScanConfig scan_from(const json& j)
{
    ScanConfig s;
    s.n_directions = j.at("n_directions").get<int>();
    s.lambda_min = j.at("lambda_min").get<double>();
    s.lambda_max = j.at("lambda_max").get<double>();
    s.n_lambda = j.at("n_lambda").get<int>();
    s.decay.lambda_min = s.lambda_min;
    s.decay.resolve_factor = j.at("resolve_factor").get<double>();
    s.decay.growth_tol = j.at("growth_tol").get<double>();
    if (s.n_directions < 2 || s.n_lambda < 12 || !(s.lambda_max > s.lambda_min) || !(s.lambda_min > 0))
        throw ConfigError("scan needs n_directions >= 2, n_lambda >= 12 and 0 < lambda_min < lambda_max");
    return s;
}

json scan_json_default()
{
    return {{"n_directions", 64}, {"lambda_min", 4.0},    {"lambda_max", 64.0},
            {"n_lambda", 13},     {"resolve_factor", 1.0}, {"growth_tol", 1e-9}};
}

int cmd_weights(const json& cfg, const Common& c, std::ostream& out)
{
    WeightSequence seq = sequence_from_json(cfg.at("sequence"));
    json res;
    RegularityReport reg = check_regularity(seq);
    res["regularity"] = to_json(reg);
    res["c_bound"] = seq.c_bound;
    res["certified_r_min"] = certified_r_min(seq);

    CsvTable csv{{"r", "h", "h1", "N"}, {}};
    json table = json::array();
    for (double r : logspace(cfg.at("r"))) {
        json row = {{"r", r}};
        try {
            double h = assoc(seq, Assoc::h, r), h1 = assoc(seq, Assoc::h1, r);
            int N = bigN(seq, r);
            row["h"] = h;
            row["h1"] = h1;
            row["N"] = N;
            csv.rows.push_back({num(r), num(h), num(h1), std::to_string(N)});
        } catch (const GuardExceeded&) {
            row["uncertified"] = true;
            csv.rows.push_back({num(r), "nan", "nan", "-1"});
        }
        table.push_back(row);
    }
    res["table"] = table;

    json env = json::array();
    for (double A : cfg.at("envelope").at("A").get<std::vector<double>>()) {
        for (double l : logspace(cfg.at("envelope").at("lambda"))) {
            json e = {{"A", A}, {"lambda", l}};
            try {
                e["E"] = fbi_envelope(seq, A, l);
            } catch (const GuardExceeded&) {
                e["E"] = nullptr;
            }
            env.push_back(e);
        }
    }
    res["envelope"] = env;

    bool ok = reg.passed;
    json abs = json::array();
    const json& ac = cfg.at("absorption");
    for (int n : ac.at("n").get<std::vector<int>>()) {
        AbsorptionFit f = absorption_fit(seq, n, ac.at("r_lo").get<double>(), ac.at("r_hi").get<double>());
        ok = ok && f.passed;
        abs.push_back({{"n", n}, {"Q", f.Q}, {"C", f.C}, {"r_lo", f.r_lo}, {"r_hi", f.r_hi}, {"passed", f.passed}});
    }
    res["absorption"] = abs;
    res["pass"] = ok;
    emit_report(c.out, "weights", cfg, res, csv);
    out << "weights: regularity " << (reg.passed ? "ok" : "FAILED") << ", absorption "
        << (ok ? "ok" : "failed or skipped") << "\n";
    return ok ? 0 : 1;
}

int cmd_jets(const json& cfg, const Common& c, std::ostream& out)
{
    VectorFieldJet L = field_from_json(cfg.at("field"));
    Jet f = jet_from_json(cfg.at("datum"));
    int n_max = cfg.at("n_max").get<int>();
    double tol = cfg.at("tolerance").get<double>();
    FormalSeries s = formal_solution(L, f, n_max);
    json res;
    res["series"] = to_json(s);
    CsvTable csv{{"k", "valid_degree", "n_terms", "residual"}, {}};
    json resid = json::array();
    bool ok = true;
    for (int n = 0; n <= n_max; ++n) {
        double r = std::nan("");
        if (n < n_max) {
            r = residual_check(s, n);
            ok = ok && r <= tol;
            resid.push_back({{"n", n}, {"residual", r}});
        }
        csv.rows.push_back({std::to_string(n), std::to_string(s.valid_degree[n]),
                            std::to_string(s.u[n].coeffs().size()), num(r)});
    }
    res["residuals"] = resid;
    if (cfg.contains("sequence") && !cfg["sequence"].is_null()) {
        WeightSequence seq = sequence_from_json(cfg["sequence"]);
        const json& b = cfg.at("box");
        GrowthEstimate ge = growth_fit(s, seq, Box{b.at("lo").get<std::vector<double>>(),
                                                   b.at("hi").get<std::vector<double>>()});
        res["growth"] = to_json(ge);
    }
    res["pass"] = ok;
    emit_report(c.out, "jets", cfg, res, csv);
    out << "jets: " << n_max + 1 << " coefficients, residuals " << (ok ? "within" : "ABOVE") << " tolerance\n";
    return ok ? 0 : 1;
}

int cmd_extend(const json& cfg, const Common& c, std::ostream& out)
{
    WeightSequence seq = sequence_from_json(cfg.at("sequence"));
    const json& kc = cfg.at("kernel");
    DynkinKernel K = make_kernel(kc.at("epsilon").get<double>(), kc.at("n_r").get<int>(), kc.at("n_theta").get<int>());
    Jet f = jet_from_json(cfg.at("datum"));
    const json& xg = cfg.at("x");
    double x_lo = xg.at("min").get<double>(), x_hi = xg.at("max").get<double>();
    int n_x = xg.at("count").get<int>();
    double t_min = cfg.at("t_min").get<double>();
    int n_t = cfg.at("n_t").get<int>();
    std::string mode = cfg.at("mode").get<std::string>();

    FlatnessRun run;
    json extra;
    if (mode == "flatness") {
        VectorFieldJet L = field_from_json(cfg.at("field"));
        int n_max = cfg.at("n_max").get<int>();
        FormalSeries ser = formal_solution(L, f, n_max);
        GrowthEstimate ge = growth_fit(ser, seq, Box{{x_lo}, {x_hi}});
        ApproxSolution sol(ser, seq, ge.C_fit, K);
        run.samples = sample_flatness(sol, L, x_lo, x_hi, n_x, t_min, n_t);
        run.fit = flatness_fit(run.samples, seq);
        run.fit.delta = sol.delta();
        extra = {{"C_star", ge.C_fit}, {"B_fit", ge.B_fit}};
    } else if (mode == "almost_analytic") {
        int n_max = cfg.value("n_max", -1);
        AlmostAnalytic ext = almost_analytic_extend(f, seq, K, x_lo, x_hi, n_max);
        run = dbar_fit(ext, x_lo, x_hi, n_x, t_min, n_t);
        extra = {{"C_star", ext.sol.C_star()}};
    } else {
        throw ConfigError("extend mode must be flatness or almost_analytic, got " + mode);
    }
    json res = to_json(run.fit);
    res.update(extra);
    CsvTable csv{{"t", "sup_abs_Lu", "h_Q_t", "ratio"}, {}};
    for (std::size_t i = 0; i < run.samples.size(); ++i) {
        double h = i < run.fit.h_Q_t.size() ? run.fit.h_Q_t[i] : std::nan("");
        double a = run.fit.A > 0 ? run.samples[i].sup_Lu / (run.fit.A * h) : 0.0;
        csv.rows.push_back({num(run.samples[i].t), num(run.samples[i].sup_Lu), num(h), num(a)});
    }
    emit_report(c.out, "extend", cfg, res, csv);
    out << "extend: Q=" << run.fit.Q << " A=" << run.fit.A << " " << (run.fit.passed ? "passed" : "FAILED") << "\n";
    return run.fit.passed ? 0 : 1;
}

int cmd_fbi(const json& cfg, const Common& c, std::ostream& out)
{
    GridFunction u;
    if (cfg.contains("input") && !cfg["input"].is_null()) {
        u = read_grid(cfg["input"].get<std::string>());
    } else {
        u = fbi_fixture(cfg.at("fixture").get<std::string>(), cfg.at("noise").get<double>(),
                        c.seed_set ? c.seed : cfg.at("seed").get<unsigned long long>());
    }
    if (cfg.contains("save_grid") && !cfg["save_grid"].is_null()) write_grid(cfg["save_grid"].get<std::string>(), u);
    std::vector<double> point = cfg.at("point").get<std::vector<double>>();
    if (static_cast<int>(point.size()) != u.dim) throw ConfigError("point must have one entry per grid axis");
    WeightSequence seq = sequence_from_json(cfg.at("sequence"));
    ScanResult scan = wavefront_scan(u, point, scan_from(cfg.at("scan")), seq);

    std::vector<std::string> hdr = {"direction_index", "omega_0"};
    if (u.dim == 2) hdr.push_back("omega_1");
    for (const char* h : {"lambda", "abs_F", "envelope", "passed", "err", "needed_A"}) hdr.push_back(h);
    CsvTable csv{hdr, {}};
    for (const auto& r : scan.reports) {
        for (std::size_t i = 0; i < r.lambdas.size(); ++i) {
            std::vector<std::string> row = {std::to_string(r.direction_index), num(r.direction[0])};
            if (u.dim == 2) row.push_back(num(r.direction[1]));
            row.push_back(num(r.lambdas[i]));
            row.push_back(num(r.values[i]));
            double env = std::nan("");
            if (r.A_fit) {
                try {
                    env = fbi_envelope(seq, *r.A_fit, r.lambdas[i]);
                } catch (const GuardExceeded&) {
                }
            }
            row.push_back(num(env));
            row.push_back(r.passed ? "1" : "0");
            row.push_back(i < r.errors.size() ? num(r.errors[i]) : "nan");
            row.push_back(num(r.needed_A[i]));
            csv.rows.push_back(row);
        }
    }
    json res = to_json(scan);
    bool ok = true;
    if (cfg.contains("expect_singular") && !cfg["expect_singular"].is_null()) {
        ok = cfg["expect_singular"].get<std::vector<int>>() == scan.singular;
        res["expectation_met"] = ok;
    }
    emit_report(c.out, "fbi", cfg, res, csv);
    out << "fbi: " << scan.flagged.size() << " flagged, " << scan.singular.size() << " singular directions\n";
    return ok ? 0 : 1;
}

int cmd_wf(const json& cfg, const Common& c, std::ostream& out)
{
    PdeFixture fx = pde_fixture(cfg.at("solution").get<std::string>());
    if (cfg.contains("model") && !cfg["model"].is_null()) {
        std::string path = cfg["model"].get<std::string>();
        fx.model = make_rhs(jet_from_json(read_json_file(path)));
    }
    WeightSequence seq = sequence_from_json(cfg.at("sequence"));
    WfConfig wc;
    wc.scan = scan_from(cfg.at("scan"));
    const json& g = cfg.at("grid");
    wc.half_width = g.at("half_width").get<double>();
    wc.n = g.at("n").get<int>();
    wc.r_in = g.at("r_in").get<double>();
    wc.r_out = g.at("r_out").get<double>();
    wc.tolerance = cfg.at("tolerance").get<double>();
    WfReport rep = wf_inclusion_experiment(fx, seq, wc);

    CsvTable csv{{"direction_index", "omega_x", "omega_t", "A_fit", "growth_ratio", "flagged", "singular",
                  "char_distance"},
                 {}};
    for (const auto& r : rep.scan.reports) {
        int k = r.direction_index;
        bool flagged = std::find(rep.scan.flagged.begin(), rep.scan.flagged.end(), k) != rep.scan.flagged.end();
        auto it = std::find(rep.scan.singular.begin(), rep.scan.singular.end(), k);
        bool singular = it != rep.scan.singular.end();
        double dist = singular ? rep.char_distance[it - rep.scan.singular.begin()] : std::nan("");
        csv.rows.push_back({std::to_string(k), num(r.direction[0]), num(r.direction[1]),
                            r.A_fit ? num(*r.A_fit) : "nan", num(r.growth_ratio), flagged ? "1" : "0",
                            singular ? "1" : "0", num(dist)});
    }
    emit_report(c.out, "wf", cfg, to_json(rep), csv);
    out << "wf-experiment " << rep.fixture << ": " << rep.scan.singular.size() << " singular directions, "
        << (rep.pass ? "pass" : "FAIL") << "\n";
    return rep.pass ? 0 : 1;
}

int cmd_acceptance(const std::vector<int>& ids, const Common& c, std::ostream& out)
{
    bool ok = true;
    json res = json::array();
    for (int id : ids) {
        CriterionResult r = run_criterion(id);
        out << format_line(r) << "\n" << std::flush;
        ok = ok && r.passed;
        res.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"data", r.data}});
    }
    if (c.out != ".") {
        std::filesystem::create_directories(c.out);
        json doc = {{"config", {{"criteria", ids}}}, {"results", res}, {"versions", versions()}};
        write_text_file((std::filesystem::path(c.out) / "acceptance.json").string(), doc.dump(2) + "\n");
    }
    return ok ? 0 : 1;
}

}  // namespace

json default_config(const std::string& command)
{
    json gevrey2 = {{"kind", "gevrey"}, {"s", 2.0}, {"K_max", 512}};
    if (command == "weights")
        return {{"sequence", {{"kind", "gevrey"}, {"s", 2.0}, {"K_max", 64}}},
                {"r", {{"min", 0.02}, {"max", 10.0}, {"count", 20}}},
                {"envelope", {{"A", {1.0, 2.0}}, {"lambda", {{"min", 1.0}, {"max", 64.0}, {"count", 13}}}}},
                {"absorption", {{"n", {1, 2, 3}}, {"r_lo", 1.0 / 64}, {"r_hi", 1.0}}}};
    if (command == "jets") {
        json x = jet_json_1d(16, {{1, 1.0}});
        return {{"field", {{"a", {x}}, {"time_dependent", false}}},
                {"datum", x},
                {"n_max", 12},
                {"tolerance", 1e-12},
                {"sequence", gevrey2},
                {"box", {{"lo", {-0.5}}, {"hi", {0.5}}}}};
    }
    if (command == "extend") {
        std::vector<std::pair<int, double>> inv;  // 1/(1+x^2) to degree 24
        for (int m = 0; m <= 12; ++m) inv.push_back({2 * m, m % 2 ? -1.0 : 1.0});
        return {{"mode", "flatness"},
                {"field", {{"a", {jet_json_1d(24, {{1, 1.0}})}}, {"time_dependent", false}}},
                {"datum", jet_json_1d(24, inv)},
                {"n_max", 24},
                {"sequence", {{"kind", "gevrey"}, {"s", 2.0}, {"K_max", 4096}}},
                {"kernel", {{"epsilon", 0.5}, {"n_r", 64}, {"n_theta", 64}}},
                {"x", {{"min", -0.5}, {"max", 0.5}, {"count", 21}}},
                {"t_min", 1e-3},
                {"n_t", 24}};
    }
    if (command == "fbi")
        return {{"fixture", "sign"}, {"input", nullptr}, {"noise", 0.0},    {"seed", 0},
                {"point", {0.0}},    {"sequence", gevrey2}, {"scan", scan_json_default()}};
    if (command == "wf-experiment")
        return {{"solution", "conormal"},
                {"model", nullptr},
                {"sequence", gevrey2},
                {"scan", scan_json_default()},
                {"grid", {{"half_width", 1.6}, {"n", 417}, {"r_in", 0.8}, {"r_out", 1.4}}},
                {"tolerance", 1e-6}};
    throw ConfigError("no defaults for command " + command);
}

void emit_report(const std::string& dir, const std::string& stem, const json& config, const json& results,
                 const CsvTable& csv)
{
    if (results.empty() || results.is_null()) throw IoError("refusing to write an empty report");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    json doc = {{"config", config}, {"results", results}, {"versions", versions()}};
    auto base = std::filesystem::path(dir) / stem;
    write_text_file(base.string() + ".json", doc.dump(2) + "\n");
    write_text_file(base.string() + ".csv", csv.str());
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"dcwave: Denjoy-Carleman wave-front toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    Common c;
    app.add_option("--config", c.config, "JSON config; missing keys take defaults");
    app.add_option("--out", c.out, "output directory");
    app.add_option("--threads", c.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    auto* seed_opt = app.add_option("--seed", c.seed, "seed for fixture noise");

    std::string fixture;
    std::vector<CLI::App*> subs;
    for (const char* name : {"weights", "jets", "extend", "fbi", "wf-experiment"})
        subs.push_back(app.add_subcommand(name));
    subs[0]->description("associated functions, envelopes and absorption fits for a weight sequence");
    subs[1]->description("formal solution of a vector field from a datum jet");
    subs[2]->description("Dyn'kin approximate solution and flatness fit");
    subs[3]->description("FBI wave-front scan of a sampled grid");
    subs[3]->add_option("--fixture", fixture, "named grid fixture");
    subs[4]->description("WF subset of Char experiment on a pde fixture");
    subs[4]->add_option("--fixture", fixture, "pde fixture name");
    auto* acc = app.add_subcommand("acceptance", "run the acceptance criteria");
    bool all = false;
    std::vector<int> criteria;
    acc->add_flag("--all", all, "run every criterion");
    acc->add_option("--criterion", criteria, "criterion number, repeatable")->check(CLI::Range(1, kCriterionCount));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    c.seed_set = seed_opt->count() > 0;

    try {
        if (c.threads > 0) omp_set_num_threads(c.threads);
        if (acc->parsed()) {
            if (all || criteria.empty()) {
                criteria.clear();
                for (int i = 1; i <= kCriterionCount; ++i) criteria.push_back(i);
            }
            return cmd_acceptance(criteria, c, out);
        }
        CLI::App* sub = app.get_subcommands().front();
        std::string cmd = sub->get_name();
        json cfg = default_config(cmd);
        if (!c.config.empty()) {
            json user = read_json_file(c.config);
            if (!user.is_object()) throw ConfigError("config " + c.config + " must be a JSON object");
            cfg.merge_patch(user);
        }
        if (cfg.contains("seq")) {
            cfg["sequence"] = cfg["seq"];
            cfg.erase("seq");
        }
        if (!fixture.empty()) {
            cfg[cmd == "fbi" ? "fixture" : "solution"] = fixture;
            if (cmd == "fbi") cfg["input"] = nullptr;
        }
        try {
            if (cmd == "weights") return cmd_weights(cfg, c, out);
            if (cmd == "jets") return cmd_jets(cfg, c, out);
            if (cmd == "extend") return cmd_extend(cfg, c, out);
            if (cmd == "fbi") return cmd_fbi(cfg, c, out);
            return cmd_wf(cfg, c, out);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("bad config value: ") + e.what());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } catch (const ConfigError& e) {
        err << "dcwave: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "dcwave: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace dcwave
