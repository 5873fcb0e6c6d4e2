#include "nsd/harness.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "nsd/error.hpp"
#include "nsd/perturb.hpp"
#include "nsd/rng.hpp"

namespace nsd {

void CompensatedSum::add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
        comp += (sum - t) + x;
    else
        comp += (x - t) + sum;
    sum = t;
}

void CompensatedSum::add(const CompensatedSum& o) {
    double t = sum + o.sum;
    double err = std::abs(sum) >= std::abs(o.sum) ? (sum - t) + o.sum : (o.sum - t) + sum;
    sum = t;
    comp = (comp + o.comp) + err;
}

void MomentEstimate::add(double x) {
    ++n_;
    const double x2 = x * x;
    s_[0].add(x);
    s_[1].add(x2);
    s_[2].add(x2 * x);
    s_[3].add(x2 * x2);
}

MomentEstimate MomentEstimate::merge(const MomentEstimate& a, const MomentEstimate& b) {
    if (a.name_ != b.name_) throw ValidationError("merge", "observables differ: " + a.name_ + " vs " + b.name_);
    MomentEstimate m(a.name_);
    m.n_ = a.n_ + b.n_;
    for (int k = 0; k < 4; ++k) {
        m.s_[k] = a.s_[k];
        m.s_[k].add(b.s_[k]);
    }
    return m;
}

double MomentEstimate::mean() const { return n_ ? s_[0].value() / static_cast<double>(n_) : 0.0; }

double MomentEstimate::variance() const {
    if (n_ < 2) return 0.0;
    const double n = static_cast<double>(n_);
    const double m = mean();
    double v = (s_[1].value() - n * m * m) / (n - 1);
    return std::max(v, 0.0);
}

double MomentEstimate::stderr_mean() const {
    if (n_ < 2) return 0.0;
    return std::sqrt(variance() / static_cast<double>(n_));
}

double MomentEstimate::stderr_var() const {
    if (n_ < 3) return 0.0;
    const double n = static_cast<double>(n_);
    const double m = mean();
    const double S1 = s_[0].value(), S2 = s_[1].value(), S3 = s_[2].value(), S4 = s_[3].value();
    (void)S1;
    // central fourth power sum
    const double M4 = S4 - 4 * m * S3 + 6 * m * m * S2 - 3 * n * m * m * m * m;
    const double s2 = variance();
    // closed form of the leave-one-out jackknife of the unbiased variance
    double v = n / ((n - 1) * (n - 2) * (n - 2)) * (M4 - (n - 1) * (n - 1) * s2 * s2 / n);
    return std::sqrt(std::max(v, 0.0));
}

CovEstimate covariance(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("covariance", "length mismatch");
    const std::size_t n = x.size();
    CovEstimate c;
    if (n < 3) return c;
    const double dn = static_cast<double>(n);
    CompensatedSum sx, sy;
    for (std::size_t i = 0; i < n; ++i) {
        sx.add(x[i]);
        sy.add(y[i]);
    }
    const double mx = sx.value() / dn, my = sy.value() / dn;
    CompensatedSum sp, sp2, sxx, syy;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my, p = dx * dy;
        sp.add(p);
        sp2.add(p * p);
        sxx.add(dx * dx);
        syy.add(dy * dy);
    }
    const double mp = sp.value() / dn;
    c.cov = sp.value() / (dn - 1);
    const double var_p = std::max((sp2.value() - dn * mp * mp) / (dn - 1), 0.0);
    c.se = std::sqrt(var_p / dn);
    const double sd = std::sqrt(sxx.value() / (dn - 1) * syy.value() / (dn - 1));
    if (sd > 0) {
        c.corr = c.cov / sd;
        c.corr_se = c.se / sd;
    }
    return c;
}

void ExperimentConfig::validate() const {
    if (trials < 1) throw ValidationError("trials", "must be >= 1");
    if (threads < 1) throw ValidationError("threads", "must be >= 1");
    ensemble.validate();
    prop.validate();
    if (!(prop.total_z > 0)) throw ValidationError("length", "must be > 0");
    if (mode == Mode::ssfm && grid_n > 0) {
        if (!(grid_width > 0)) throw ValidationError("grid_width", "must be > 0 when grid_n is set");
        TimeGrid::centered(grid_n, grid_width / static_cast<double>(grid_n)).validate();
    }
    auto known = available_checks(mode);
    for (const auto& c : checks)
        if (std::find(known.begin(), known.end(), c) == known.end())
            throw ValidationError("checks", "unknown check '" + c + "' for this mode");
}

ExperimentConfig ExperimentConfig::from_config(const KvConfig& kv) {
    kv.require_known({"mode", "trials", "seed", "threads", "eps2", "length", "dz", "alpha0", "beta0", "T00",
                      "independent", "checks", "grid_n", "grid_width", "trials_csv"});
    ExperimentConfig c;
    auto mode = kv.get_string("mode", "sde");
    if (mode == "sde")
        c.mode = Mode::sde;
    else if (mode == "ssfm")
        c.mode = Mode::ssfm;
    else
        throw ValidationError("mode", "expected sde or ssfm, got '" + mode + "'");
    c.trials = kv.get_u64("trials", c.trials);
    c.seed = kv.get_u64("seed", c.seed);
    c.threads = static_cast<unsigned>(kv.get_u64("threads", c.threads));
    c.prop.eps2 = kv.get_double("eps2", c.prop.eps2);
    c.prop.total_z = kv.get_double("length", c.prop.total_z);
    c.prop.dz = kv.get_double("dz", c.prop.dz);
    c.prop.noise_on = true;
    KvConfig ens;
    for (const char* k : {"alpha0", "beta0", "T00", "independent"})
        if (auto v = kv.get(k)) ens.set(k, *v);
    c.ensemble = InputEnsemble::from_config(ens);
    if (auto v = kv.get("checks")) {
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto b = item.find_first_not_of(" \t");
            auto e = item.find_last_not_of(" \t");
            if (b != std::string::npos) c.checks.push_back(item.substr(b, e - b + 1));
        }
    }
    c.grid_n = static_cast<std::size_t>(kv.get_u64("grid_n", 0));
    c.grid_width = kv.get_double("grid_width", 0.0);
    c.trials_csv = kv.get_string("trials_csv", "");
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) { return from_config(KvConfig::load(path)); }

namespace {

using Mode = ExperimentConfig::Mode;

// SDE observable columns
enum SdeCol { kUpsR, kUpsI, kUpsRs, kNuIs, kNuI, kIR, kII, kIRI, kN, kN1, kN2, kN3, kN4, kN0, kSdeCols };
const std::vector<std::string> kSdeNames = {"ups_R", "ups_I", "ups_R_s", "nu_I_s", "nu_I", "I_R", "I_I",
                                            "I_RI",  "N",     "N1",      "N2",     "N3",   "N4",  "N0"};
// SSFM observable columns
enum SsfmCol { kSUpsR, kSUpsI, kSN, kSPhase, kSsfmCols };
const std::vector<std::string> kSsfmNames = {"ups_R", "ups_I", "N", "d_phase"};

struct CheckContext {
    const ExperimentConfig& cfg;
    const std::vector<std::vector<double>>& table;
    double s;  // intermediate position for the two-time moments

    std::vector<double> col(int c) const {
        std::vector<double> v;
        v.reserve(table.size());
        for (const auto& row : table) v.push_back(row[static_cast<std::size_t>(c)]);
        return v;
    }
    MomentEstimate moments(const std::string& name, const std::function<double(const std::vector<double>&)>& f) const {
        MomentEstimate m(name);
        for (const auto& row : table) m.add(f(row));
        return m;
    }
    double eps2() const { return cfg.prop.eps2; }
    double L() const { return cfg.prop.total_z; }
    const InputEnsemble& ens() const { return cfg.ensemble; }
};

using CheckFn = std::function<StatReport(const CheckContext&)>;

StatReport mean_check(const CheckContext& c, const std::string& name, int col, double analytic) {
    auto m = c.moments(name, [col](const std::vector<double>& r) { return r[static_cast<std::size_t>(col)]; });
    return StatReport::zscore(name, analytic, m.mean(), m.stderr_mean());
}

StatReport product_mean_check(const CheckContext& c, const std::string& name,
                              const std::function<double(const std::vector<double>&)>& f, double analytic) {
    auto m = c.moments(name, f);
    return StatReport::zscore(name, analytic, m.mean(), m.stderr_mean());
}

StatReport var_check(const CheckContext& c, const std::string& name, int col, double analytic, double tol) {
    auto m = c.moments(name, [col](const std::vector<double>& r) { return r[static_cast<std::size_t>(col)]; });
    return StatReport::relative(name, analytic, m.variance(), m.stderr_var(), tol);
}

const std::vector<std::pair<std::string, CheckFn>>& sde_checks() {
    static const std::vector<std::pair<std::string, CheckFn>> checks = {
        {"mean_ups_R", [](const CheckContext& c) { return mean_check(c, "mean_ups_R", kUpsR, 0.0); }},
        {"mean_ups_I",
         [](const CheckContext& c) {
             return mean_check(c, "mean_ups_I", kUpsI, eigen_moments(c.ens().beta0.mean(), c.eps2(), c.L()).mean_I);
         }},
        {"m2_ups_R",
         [](const CheckContext& c) {
             return product_mean_check(
                 c, "m2_ups_R", [](const std::vector<double>& r) { return r[kUpsR] * r[kUpsR]; },
                 eigen_moments(c.ens().beta0.mean(), c.eps2(), c.L()).m2_R);
         }},
        {"m2_ups_I",
         [](const CheckContext& c) {
             return product_mean_check(
                 c, "m2_ups_I", [](const std::vector<double>& r) { return r[kUpsI] * r[kUpsI]; },
                 eigen_moments(c.ens().beta0.mean(), c.eps2(), c.L()).m2_I);
         }},
        {"corr_RI",
         [](const CheckContext& c) {
             auto cv = covariance(c.col(kUpsR), c.col(kUpsI));
             return StatReport::zscore("corr_RI", 0.0, cv.corr, cv.corr_se);
         }},
        {"cross_R2_nuI",
         [](const CheckContext& c) {
             return product_mean_check(
                 c, "cross_R2_nuI", [](const std::vector<double>& r) { return r[kUpsRs] * r[kUpsRs] * r[kNuIs]; }, 0.0);
         }},
        {"cross_fourth",
         [](const CheckContext& c) {
             return product_mean_check(
                 c, "cross_fourth",
                 [](const std::vector<double>& r) { return r[kUpsRs] * r[kNuIs] * r[kUpsR] * r[kNuI]; },
                 cross_fourth_moment(c.eps2(), c.s, c.ens().beta0));
         }},
        {"gamma_R_I",
         [](const CheckContext& c) {
             return product_mean_check(
                 c, "gamma_R_I", [](const std::vector<double>& r) { return r[kIR] * r[kII]; }, 0.0);
         }},
        {"gamma_R_RI",
         [](const CheckContext& c) {
             return product_mean_check(
                 c, "gamma_R_RI", [](const std::vector<double>& r) { return r[kIR] * r[kIRI]; },
                 gamma_R_RI_moment(c.eps2(), c.L(), c.ens().beta0));
         }},
        {"gamma_I_RI",
         [](const CheckContext& c) {
             return product_mean_check(
                 c, "gamma_I_RI", [](const std::vector<double>& r) { return r[kII] * r[kIRI]; }, 0.0);
         }},
        {"mean_N",
         [](const CheckContext& c) {
             return mean_check(c, "mean_N", kN, theorem4_stats(c.ens(), c.eps2(), c.L()).mean);
         }},
        {"var_N",
         [](const CheckContext& c) {
             return var_check(c, "var_N", kN, theorem4_stats(c.ens(), c.eps2(), c.L()).var, 0.05);
         }},
        {"var_N1",
         [](const CheckContext& c) {
             return var_check(c, "var_N1", kN1, section6_stats(c.ens(), c.eps2(), c.L()).var_N1, 0.10);
         }},
        {"var_N2",
         [](const CheckContext& c) {
             return var_check(c, "var_N2", kN2, section6_stats(c.ens(), c.eps2(), c.L()).var_N2, 0.10);
         }},
        {"var_N3",
         [](const CheckContext& c) {
             return var_check(c, "var_N3", kN3, section6_stats(c.ens(), c.eps2(), c.L()).var_N3, 0.10);
         }},
        {"var_N4",
         [](const CheckContext& c) {
             return var_check(c, "var_N4", kN4, section6_stats(c.ens(), c.eps2(), c.L()).var_N4, 0.10);
         }},
        {"cov_N1_N3",
         [](const CheckContext& c) {
             auto cv = covariance(c.col(kN1), c.col(kN3));
             return StatReport::zscore("cov_N1_N3", section6_stats(c.ens(), c.eps2(), c.L()).cov_N1_N3, cv.cov,
                                       cv.se);
         }},
    };
    return checks;
}

const std::vector<std::pair<std::string, CheckFn>>& ssfm_checks() {
    static const std::vector<std::pair<std::string, CheckFn>> checks = {
        {"mean_ups_R", [](const CheckContext& c) { return mean_check(c, "mean_ups_R", kSUpsR, 0.0); }},
        {"mean_ups_I",
         [](const CheckContext& c) {
             return mean_check(c, "mean_ups_I", kSUpsI, eigen_moments(c.ens().beta0.mean(), c.eps2(), c.L()).mean_I);
         }},
        {"var_ups_R",
         [](const CheckContext& c) {
             return var_check(c, "var_ups_R", kSUpsR, eigen_moments(c.ens().beta0.mean(), c.eps2(), c.L()).var_R,
                              0.10);
         }},
        {"var_ups_I",
         [](const CheckContext& c) {
             return var_check(c, "var_ups_I", kSUpsI, eigen_moments(c.ens().beta0.mean(), c.eps2(), c.L()).var_I,
                              0.10);
         }},
        {"var_N",
         [](const CheckContext& c) {
             return var_check(c, "var_N", kSN, theorem4_stats(c.ens(), c.eps2(), c.L()).var, 0.15);
         }},
    };
    return checks;
}

const std::vector<std::pair<std::string, CheckFn>>& checks_for(Mode mode) {
    return mode == Mode::sde ? sde_checks() : ssfm_checks();
}

bool is_point(const InputEnsemble& e) {
    using K = Distribution::Kind;
    return e.alpha0.kind == K::point && e.beta0.kind == K::point && e.T00.kind == K::point;
}

struct Trial {
    bool ok = false;
    std::string error;
    std::vector<double> obs;
};

std::vector<double> sde_trial(const ExperimentConfig& cfg, Engine& rng) {
    SolitonSpec spec = cfg.ensemble.sample(rng);
    PropagationConfig prop = cfg.prop;
    prop.noise_on = true;
    auto path = simulate_soliton_sde(SolitonState::from_spec(spec), prop, rng);
    const std::size_t mid = (path.size() - 1) / 2;
    auto ch = magnitude_channel(path, spec);
    auto pc = perturbation_model(path, spec);
    std::vector<double> o(kSdeCols);
    o[kUpsR] = path.ups_R.back();
    o[kUpsI] = path.ups_I.back();
    o[kUpsRs] = path.ups_R[mid];
    o[kNuIs] = path.nu_I[mid];
    o[kNuI] = path.nu_I.back();
    o[kIR] = ch.I_R;
    o[kII] = ch.I_I;
    o[kIRI] = ch.I_RI;
    o[kN] = ch.N();
    o[kN1] = pc.N1;
    o[kN2] = pc.N2;
    o[kN3] = pc.N3;
    o[kN4] = pc.N4;
    o[kN0] = pc.N0;
    return o;
}

TimeGrid ssfm_grid(const ExperimentConfig& cfg, const SolitonSpec& spec) {
    if (cfg.grid_n > 0) return TimeGrid::centered(cfg.grid_n, cfg.grid_width / static_cast<double>(cfg.grid_n));
    return default_grid({spec});
}

// NFT of the noiseless propagation of spec on the trial grid.
DiscreteSpectrum ssfm_reference(const ExperimentConfig& cfg, const SolitonSpec& spec) {
    Signal in = make_soliton(spec, 0.0, ssfm_grid(cfg, spec));
    PropagationConfig prop = cfg.prop;
    prop.noise_on = false;
    Signal out = propagate(in, prop);
    auto m = measure_eigen_noise(DiscreteSpectrum::from_specs({spec}), out);
    DiscreteSpectrum ref;
    for (const auto& e : m) ref.entries.push_back({e.zeta_out, e.qd_out});
    return ref;
}

std::vector<double> ssfm_trial(const ExperimentConfig& cfg, Engine& rng, const std::optional<DiscreteSpectrum>& ref0) {
    SolitonSpec spec = cfg.ensemble.sample(rng);
    DiscreteSpectrum ref = ref0 ? *ref0 : ssfm_reference(cfg, spec);
    Signal in = make_soliton(spec, 0.0, ssfm_grid(cfg, spec));
    PropagationConfig prop = cfg.prop;
    prop.noise_on = true;
    Signal out = propagate(in, prop, rng);
    auto m = measure_against_reference(ref, out);
    std::vector<double> o(kSsfmCols);
    o[kSUpsR] = m[0].ups_R;
    o[kSUpsI] = m[0].ups_I;
    o[kSN] = m[0].d_ln_mag;
    o[kSPhase] = m[0].d_phase;
    return o;
}

void write_table(const std::string& file, const std::vector<std::string>& names,
                 const std::vector<std::uint64_t>& ids, const std::vector<std::vector<double>>& table) {
    std::ofstream f(file);
    if (!f) throw ValidationError("trials_csv", "cannot write " + file);
    f.precision(17);
    f << "trial";
    for (const auto& n : names) f << "," << n;
    f << "\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        f << ids[i];
        for (double v : table[i]) f << "," << v;
        f << "\n";
    }
}

}  // namespace

std::vector<std::string> available_checks(Mode mode) {
    std::vector<std::string> out;
    for (const auto& [name, fn] : checks_for(mode)) out.push_back(name);
    return out;
}

std::vector<std::string> observable_names(Mode mode) { return mode == Mode::sde ? kSdeNames : kSsfmNames; }

bool ExperimentResult::all_pass() const {
    if (run_failed) return false;
    for (const auto& r : reports)
        if (!r.pass) return false;
    return true;
}

std::string ExperimentResult::to_jsonl() const {
    std::string out;
    for (const auto& r : reports) out += r.to_json() + "\n";
    nlohmann::ordered_json s;
    s["summary"] = true;
    s["completed"] = completed;
    s["failed"] = failures.size();
    s["run_failed"] = run_failed;
    s["all_pass"] = all_pass();
    out += s.dump() + "\n";
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::optional<DiscreteSpectrum> ref;
    if (cfg.mode == Mode::ssfm && is_point(cfg.ensemble)) {
        Engine probe = trial_engine(cfg.seed, 0);
        ref = ssfm_reference(cfg, cfg.ensemble.sample(probe));
    }

    std::vector<Trial> trials(cfg.trials);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::uint64_t i = next.fetch_add(1);
            if (i >= cfg.trials) return;
            Engine rng = trial_engine(cfg.seed, i);
            Trial& t = trials[i];
            try {
                t.obs = cfg.mode == Mode::sde ? sde_trial(cfg, rng) : ssfm_trial(cfg, rng, ref);
                t.ok = true;
            } catch (const Error& e) {
                t.error = e.what();
            }
        }
    };
    const unsigned nt = std::min<std::uint64_t>(cfg.threads, cfg.trials);
    if (nt <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < nt; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ExperimentResult res;
    std::vector<std::uint64_t> ids;
    for (std::uint64_t i = 0; i < cfg.trials; ++i) {
        if (trials[i].ok) {
            res.table.push_back(std::move(trials[i].obs));
            ids.push_back(i);
        } else {
            res.failures.push_back({i, trials[i].error});
        }
    }
    res.completed = res.table.size();
    res.run_failed = static_cast<double>(res.failures.size()) > 0.01 * static_cast<double>(cfg.trials);
    if (!cfg.trials_csv.empty()) write_table(cfg.trials_csv, observable_names(cfg.mode), ids, res.table);
    if (res.completed < 3) {
        res.run_failed = true;
        return res;
    }

    const double L = cfg.prop.total_z;
    const long K = std::max(1L, cfg.prop.steps());
    CheckContext ctx{cfg, res.table, L * static_cast<double>(K / 2) / static_cast<double>(K)};
    for (const auto& [name, fn] : checks_for(cfg.mode)) {
        if (!cfg.checks.empty() && std::find(cfg.checks.begin(), cfg.checks.end(), name) == cfg.checks.end())
            continue;
        res.reports.push_back(fn(ctx));
    }
    return res;
}

}  // namespace nsd
