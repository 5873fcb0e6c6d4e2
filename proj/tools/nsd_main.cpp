#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "nsd/analytics.hpp"
#include "nsd/error.hpp"
#include "nsd/harness.hpp"
#include "nsd/nft.hpp"
#include "nsd/ssfm.hpp"
#include "nsd/units.hpp"
#include "nsd/waveform.hpp"

using namespace nsd;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    bool seed_set = false;
    unsigned threads = 1;
    std::string out;
};

void emit(const Globals& g, const std::string& text) {
    if (g.out.empty() || g.out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(g.out);
    if (!f) throw ValidationError("out", "cannot write " + g.out);
    f << text;
}

std::string json_array(const std::vector<StatReport>& reports) {
    std::string s = "[\n";
    for (std::size_t i = 0; i < reports.size(); ++i) s += "  " + reports[i].to_json() + (i + 1 < reports.size() ? ",\n" : "\n");
    return s + "]\n";
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            v.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ValidationError("list", "bad number '" + item + "' in '" + text + "'");
        }
    }
    return v;
}

// "alpha,beta[,T0[,arg]]"
SolitonSpec parse_soliton(const std::string& text) {
    auto v = parse_list(text);
    if (v.size() < 2 || v.size() > 4) throw ValidationError("soliton", "expected alpha,beta[,T0[,arg]]");
    return SolitonSpec::from_center(cplx(v[0], v[1]), v.size() > 2 ? v[2] : 0.0, v.size() > 3 ? v[3] : 0.0);
}

double default_eps2(const std::string& fiber) {
    return normalize(fiber.empty() ? FiberParams{} : FiberParams::load(fiber)).eps2;
}

struct McOptions {
    std::string config;
    std::string mode;
    std::uint64_t trials = 0;
    double eps2 = -1, length = -1, dz = -1;
    std::string alpha0, beta0, T00, checks, trials_csv, fiber;
    std::size_t grid_n = 0;
    double grid_width = 0;
};

void add_mc_options(CLI::App* cmd, McOptions& o) {
    cmd->add_option("--config", o.config, "experiment config file (key = value)");
    cmd->add_option("--mode", o.mode, "sde or ssfm");
    cmd->add_option("--trials", o.trials, "number of Monte Carlo trials");
    cmd->add_option("--eps2", o.eps2, "normalized noise PSD (default: from fibre parameters)");
    cmd->add_option("--length", o.length, "normalized distance");
    cmd->add_option("--dz", o.dz, "step size");
    cmd->add_option("--alpha0", o.alpha0, "point:v | uniform:a,b");
    cmd->add_option("--beta0", o.beta0, "point:v | uniform:a,b");
    cmd->add_option("--T00", o.T00, "point:v | uniform:a,b");
    cmd->add_option("--checks", o.checks, "comma separated check names");
    cmd->add_option("--trials-csv", o.trials_csv, "write the per-trial observable table");
    cmd->add_option("--grid-n", o.grid_n, "ssfm grid points");
    cmd->add_option("--grid-width", o.grid_width, "ssfm window width");
    cmd->add_option("--fiber", o.fiber, "fibre parameter file for the default eps2");
}

int run_mc(const Globals& g, const McOptions& o, const std::vector<std::string>& sde_checks,
           const std::vector<std::string>& ssfm_checks) {
    KvConfig kv = o.config.empty() ? KvConfig{} : KvConfig::load(o.config);
    auto num = [](double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    };
    if (!o.mode.empty()) kv.set("mode", o.mode);
    if (o.trials) kv.set("trials", std::to_string(o.trials));
    if (o.eps2 >= 0) kv.set("eps2", num(o.eps2));
    if (!kv.has("eps2")) kv.set("eps2", num(default_eps2(o.fiber)));
    if (o.length >= 0) kv.set("length", num(o.length));
    if (o.dz > 0) kv.set("dz", num(o.dz));
    if (!o.alpha0.empty()) kv.set("alpha0", o.alpha0);
    if (!o.beta0.empty()) kv.set("beta0", o.beta0);
    if (!o.T00.empty()) kv.set("T00", o.T00);
    if (!o.checks.empty()) kv.set("checks", o.checks);
    if (!o.trials_csv.empty()) kv.set("trials_csv", o.trials_csv);
    if (o.grid_n) kv.set("grid_n", std::to_string(o.grid_n));
    if (o.grid_width > 0) kv.set("grid_width", num(o.grid_width));
    if (g.seed_set || !kv.has("seed")) kv.set("seed", std::to_string(g.seed));
    kv.set("threads", std::to_string(g.threads));
    if (!kv.has("checks")) {
        const auto& list = kv.get_string("mode", "sde") == "ssfm" ? ssfm_checks : sde_checks;
        std::string joined;
        for (const auto& c : list) joined += (joined.empty() ? "" : ",") + c;
        kv.set("checks", joined);
    }
    auto cfg = ExperimentConfig::from_config(kv);
    auto res = run_experiment(cfg);
    for (const auto& f : res.failures) std::cerr << "trial " << f.trial << " failed: " << f.message << "\n";
    emit(g, res.to_jsonl());
    return res.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Noise statistics of soliton spectral data: NFT, SSFM, SDE models and closed forms"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand
    Globals g;
    app.add_option("--seed", g.seed, "master seed")->each([&](const std::string&) { g.seed_set = true; });
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "output file (default stdout)");

    // units
    auto* units = app.add_subcommand("units", "normalization constants for a fibre parameter file");
    std::string units_fiber;
    units->add_option("--fiber", units_fiber, "fibre parameter file (default: standard SSMF set)");

    // synth
    auto* synth = app.add_subcommand("synth", "synthesize an N-soliton field");
    std::vector<std::string> solitons;
    std::size_t synth_n = 0;
    double synth_width = 0, synth_z = 0;
    std::string synth_csv;
    synth->add_option("--soliton", solitons, "alpha,beta[,T0[,arg]] (repeatable)")->required();
    synth->add_option("--n", synth_n, "grid points (power of two)");
    synth->add_option("--width", synth_width, "window width");
    synth->add_option("--z", synth_z, "evaluate at distance z");
    synth->add_option("--csv", synth_csv, "also write t,re_q,im_q CSV");

    // nft
    auto* nft = app.add_subcommand("nft", "discrete spectrum of a field");
    std::string nft_in, nft_region = "re:[-2,2] im:(0.02,2]";
    int nft_expected = -1, nft_richardson = 2;
    double nft_edge = 1e-6;
    std::vector<std::string> nft_guesses;
    nft->add_option("--in", nft_in, "binary field file")->required();
    nft->add_option("--region", nft_region, "search rectangle");
    nft->add_option("--expected", nft_expected, "expected eigenvalue count");
    nft->add_option("--richardson", nft_richardson, "extrapolation level 0..2");
    nft->add_option("--edge-threshold", nft_edge, "allowed edge magnitude relative to the peak");
    nft->add_option("--guess", nft_guesses, "alpha,beta Newton start (repeatable)");

    // propagate
    auto* prop = app.add_subcommand("propagate", "split-step propagation of a field");
    std::string prop_config, prop_in;
    double prop_dz = -1, prop_total = -1, prop_eps2 = -1;
    bool prop_noise = false;
    prop->add_option("--config", prop_config, "keys: dz, total_z, eps2, seed, noise_on");
    prop->add_option("--in", prop_in, "binary field file")->required();
    prop->add_option("--dz", prop_dz, "step size");
    prop->add_option("--total-z", prop_total, "distance");
    prop->add_option("--eps2", prop_eps2, "noise PSD");
    prop->add_flag("--noise", prop_noise, "enable noise");

    // monte carlo
    McOptions eig, amp;
    auto* mc_eigen = app.add_subcommand("mc-eigen", "eigenvalue noise moments by Monte Carlo");
    add_mc_options(mc_eigen, eig);
    auto* mc_amp = app.add_subcommand("mc-amplitude", "spectral amplitude noise by Monte Carlo");
    add_mc_options(mc_amp, amp);

    // analytics
    auto* an = app.add_subcommand("analytics", "closed-form statistics for an input ensemble");
    std::string an_ens, an_fiber, an_alpha0, an_beta0, an_T00;
    double an_eps2 = -1, an_length = 7000;
    an->add_option("--ensemble", an_ens, "ensemble file (alpha0, beta0, T00)");
    an->add_option("--alpha0", an_alpha0, "point:v | uniform:a,b");
    an->add_option("--beta0", an_beta0, "point:v | uniform:a,b");
    an->add_option("--T00", an_T00, "point:v | uniform:a,b");
    an->add_option("--eps2", an_eps2, "normalized noise PSD (default: from fibre parameters)");
    an->add_option("--length", an_length, "normalized distance");
    an->add_option("--fiber", an_fiber, "fibre parameter file");

    // example1
    auto* ex = app.add_subcommand("example1", "variance ratio of the dominant noise terms for a soliton link");
    double ex_power = 0.8, ex_sep = 7, ex_length = 7000;
    std::string ex_fiber;
    ex->add_option("--power-mw", ex_power, "average input power in mW");
    ex->add_option("--separation", ex_sep, "pulse separation in FWHM widths");
    ex->add_option("--length", ex_length, "distance in km");
    ex->add_option("--fiber", ex_fiber, "fibre parameter file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*units) {
            FiberParams p = units_fiber.empty() ? FiberParams{} : FiberParams::load(units_fiber);
            auto u = normalize(p);
            std::ostringstream os;
            os.precision(10);
            os << "{\"P_n\": " << u.P_n << ", \"T_n\": " << u.T_n << ", \"L_n\": " << u.L_n
               << ", \"kappa2\": " << u.kappa2 << ", \"eps2\": " << u.eps2 << "}\n";
            emit(g, os.str());
            return 0;
        }
        if (*synth) {
            std::vector<SolitonSpec> specs;
            for (const auto& s : solitons) specs.push_back(parse_soliton(s));
            TimeGrid grid = default_grid(specs, synth_z);
            if (synth_n) {
                if (!(synth_width > 0)) throw ValidationError("width", "required with --n");
                grid = TimeGrid::centered(synth_n, synth_width / static_cast<double>(synth_n));
            }
            Signal sig = make_nsoliton(specs, synth_z, grid);
            if (g.out.empty()) throw ValidationError("out", "synth needs --out");
            write_binary(sig, g.out);
            if (!synth_csv.empty()) write_csv(sig, synth_csv);
            return 0;
        }
        if (*nft) {
            Signal sig = read_binary(nft_in);
            NftOptions o;
            o.richardson = nft_richardson;
            o.edge_threshold = nft_edge;
            std::vector<cplx> guesses;
            for (const auto& s : nft_guesses) {
                auto v = parse_list(s);
                if (v.size() != 2) throw ValidationError("guess", "expected alpha,beta");
                guesses.emplace_back(v[0], v[1]);
            }
            std::optional<int> expected;
            if (nft_expected >= 0) expected = nft_expected;
            auto spec = find_discrete_spectrum(sig, SearchRegion::parse(nft_region), expected, guesses, o);
            emit(g, spectrum_to_json(spec) + "\n");
            return 0;
        }
        if (*prop) {
            KvConfig kv = prop_config.empty() ? KvConfig{} : KvConfig::load(prop_config);
            PropagationConfig pc = PropagationConfig::from_config(kv);
            if (prop_dz > 0) pc.dz = prop_dz;
            if (prop_total >= 0) pc.total_z = prop_total;
            if (prop_eps2 >= 0) pc.eps2 = prop_eps2;
            if (prop_noise) pc.noise_on = true;
            if (g.seed_set) pc.seed = g.seed;
            pc.validate();
            if (g.out.empty()) throw ValidationError("out", "propagate needs --out");
            write_binary(propagate(read_binary(prop_in), pc), g.out);
            return 0;
        }
        if (*mc_eigen)
            return run_mc(g, eig,
                          {"mean_ups_R", "mean_ups_I", "m2_ups_R", "m2_ups_I", "corr_RI", "cross_R2_nuI",
                           "cross_fourth", "gamma_R_I", "gamma_R_RI", "gamma_I_RI"},
                          {"mean_ups_R", "mean_ups_I", "var_ups_R", "var_ups_I"});
        if (*mc_amp)
            return run_mc(g, amp, {"mean_N", "var_N", "var_N1", "var_N2", "var_N3", "var_N4", "cov_N1_N3"},
                          {"var_N"});
        if (*an) {
            KvConfig kv = an_ens.empty() ? KvConfig{} : KvConfig::load(an_ens);
            if (!an_alpha0.empty()) kv.set("alpha0", an_alpha0);
            if (!an_beta0.empty()) kv.set("beta0", an_beta0);
            if (!an_T00.empty()) kv.set("T00", an_T00);
            auto ens = InputEnsemble::from_config(kv);
            double e2 = an_eps2 >= 0 ? an_eps2 : default_eps2(an_fiber);
            auto em = eigen_moments(ens.beta0.mean(), e2, an_length);
            auto t4 = theorem4_stats(ens, e2, an_length);
            auto s6 = section6_stats(ens, e2, an_length);
            std::vector<StatReport> r = {
                StatReport::value("mean_ups_R", em.mean_R), StatReport::value("mean_ups_I", em.mean_I),
                StatReport::value("m2_ups_R", em.m2_R),     StatReport::value("m2_ups_I", em.m2_I),
                StatReport::value("var_ups_R", em.var_R),   StatReport::value("var_ups_I", em.var_I),
                StatReport::value("mean_N", t4.mean),       StatReport::value("var_N", t4.var),
                StatReport::value("var_N1", s6.var_N1),     StatReport::value("var_N2", s6.var_N2),
                StatReport::value("var_N3", s6.var_N3),     StatReport::value("var_N4", s6.var_N4),
                StatReport::value("var_N0", s6.var_N0),     StatReport::value("cov_N1_N3", s6.cov_N1_N3),
            };
            emit(g, json_array(r));
            return 0;
        }
        if (*ex) {
            FiberParams p = ex_fiber.empty() ? FiberParams{} : FiberParams::load(ex_fiber);
            auto r = example1_ratio(ex_power * 1e-3, ex_sep, ex_length, p);
            std::ostringstream os;
            os.precision(10);
            os << "{\"power_mw\": " << ex_power << ", \"b\": " << r.b << ", \"eps2\": " << r.eps2
               << ", \"length\": " << r.L << ", \"var_N1\": " << r.stats.var_N1 << ", \"var_N3\": " << r.stats.var_N3
               << ", \"var_N0\": " << r.stats.var_N0 << ", \"r\": " << r.r << "}\n";
            emit(g, os.str());
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
