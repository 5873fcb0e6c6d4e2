#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nsd/analytics.hpp"
#include "nsd/kvconfig.hpp"
#include "nsd/ssfm.hpp"

namespace nsd {

// Neumaier-compensated running sum.
struct CompensatedSum {
    double sum = 0;
    double comp = 0;

    void add(double x);
    void add(const CompensatedSum& other);
    double value() const { return sum + comp; }
};

// Streaming moments of one observable from raw power sums up to the fourth.
class MomentEstimate {
public:
    explicit MomentEstimate(std::string name = "") : name_(std::move(name)) {}

    void add(double x);
    // Pooled estimate; throws if the observables differ.
    static MomentEstimate merge(const MomentEstimate& a, const MomentEstimate& b);

    const std::string& name() const { return name_; }
    std::uint64_t n() const { return n_; }
    double mean() const;
    double variance() const;  // unbiased, clamped at 0
    double stderr_mean() const;
    double stderr_var() const;  // jackknife
    double raw_sum(int k) const { return s_[static_cast<std::size_t>(k - 1)].value(); }

private:
    std::string name_;
    std::uint64_t n_ = 0;
    CompensatedSum s_[4];
};

// Sample covariance with the standard error of the mean of centred products.
struct CovEstimate {
    double cov = 0;
    double se = 0;
    double corr = 0;
    double corr_se = 0;
};
CovEstimate covariance(const std::vector<double>& x, const std::vector<double>& y);

struct ExperimentConfig {
    enum class Mode { sde, ssfm };
    Mode mode = Mode::sde;
    std::uint64_t trials = 1000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    InputEnsemble ensemble;
    PropagationConfig prop;  // eps2, dz, total_z; seed and noise flag are managed per trial
    std::vector<std::string> checks;  // empty: every check of the mode
    // ssfm grid: n points over width (centred); n = 0 picks a default grid per input
    std::size_t grid_n = 0;
    double grid_width = 0;
    std::string trials_csv;  // optional per-trial observable table

    void validate() const;
    // keys: mode, trials, seed, threads, eps2, length, dz, alpha0, beta0, T00,
    //       checks (comma separated), grid_n, grid_width, trials_csv
    static ExperimentConfig from_config(const KvConfig& cfg);
    static ExperimentConfig load(const std::string& path);
};

// Names of the checks available in a mode, in report order.
std::vector<std::string> available_checks(ExperimentConfig::Mode mode);
// Per-trial observable columns of a mode.
std::vector<std::string> observable_names(ExperimentConfig::Mode mode);

struct TrialFailure {
    std::uint64_t trial;
    std::string message;
};

struct ExperimentResult {
    std::vector<StatReport> reports;
    std::vector<TrialFailure> failures;
    std::uint64_t completed = 0;
    bool run_failed = false;  // more than 1% of trials errored
    std::vector<std::vector<double>> table;  // completed trials x observables, trial order

    bool all_pass() const;
    // One JSON object per report, then a summary line.
    std::string to_jsonl() const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace nsd
