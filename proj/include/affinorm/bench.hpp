#pragma once

#include "affinorm/affine.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace affinorm {

// One row of a sweep. Optional columns (q, seed, errors) live in `extra`.
struct BenchRecord {
    std::size_t d = 0;
    std::size_t m = 0;
    double avg_support = 0.0;
    double ms = 0.0;
    double time_per_eval_s = 0.0;
    double hv_per_eval = 0.0;
    double third_per_eval = 0.0;
    double krylov_per_eval = 0.0;
    std::map<std::string, double> extra;
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    int n_points = 0;
};

// Least squares of ln y on ln x.
SlopeFit loglog_fit(const std::vector<std::pair<double, double>>& pairs);

enum class Family { quartic, sphere };

struct VerifyOptions {
    std::vector<std::size_t> dims;
    std::size_t points_per_dim = 5;
    double lambda = 1e-6;
    Family family = Family::quartic;
    int max_iter = 100;
    double tol = 1e-10;
};

// One row per (d, point): exact matrix-free direction vs dense reference.
std::vector<BenchRecord> run_verify(const VerifyOptions& opt);

struct ProbeSweepOptions {
    std::vector<std::size_t> dims;
    std::vector<int> q_list{2, 5, 10, 20, 50, 100};
    int seeds = 5;
    std::size_t points = 3;
    double lambda = 1e-6;
    int max_iter = 100;
    double tol = 1e-10;
    double min_time_s = 0.05;
    bool parallel = false;
};

// Per (d, q): direction errors of the Hutchinson variant against exact mode,
// mean Hutchinson log-det time, and extra["time_ratio_vs_exact"].
std::vector<BenchRecord> run_probe_sweep(const ProbeSweepOptions& opt);

struct ScalingOptions {
    int q = 2;
    int k_max = 5;
    double lambda = 1e-6;
    int reps = 3;
    std::size_t points = 3;
    std::uint64_t seed = 0;
    double stab_eps = 0.01;
    double min_time_s = 0.25;
    bool parallel = false;
};

struct SweepResult {
    std::vector<BenchRecord> rows;
    SlopeFit fit;
};

// random_sparse(d, m_factor * d) per dimension; slope of time vs d.
SweepResult run_dim_sweep(const std::vector<std::size_t>& dims, std::size_t m_factor, const ScalingOptions& opt);

// random_sparse(dim, m) per m; slope of time vs ms.
SweepResult run_sparsity_sweep(std::size_t dim, const std::vector<std::size_t>& m_list, const ScalingOptions& opt);

// Fixed CSV header, in column order.
const std::vector<std::string>& csv_columns();

void write_csv(std::ostream& out, const std::vector<BenchRecord>& rows, const std::optional<SlopeFit>& fit);
// JSON array of row objects (same keys as the CSV, null when unused), with
// the fit object appended as the last element when present.
void write_json(std::ostream& out, const std::vector<BenchRecord>& rows, const std::optional<SlopeFit>& fit);

} // namespace affinorm
