#include "affinorm/bench.hpp"

#include "affinorm/families.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>

namespace affinorm {

namespace {

using Clock = std::chrono::steady_clock;

struct Timing {
    double per_eval_s = 0.0;
    std::int64_t evals = 0;
};

// One discarded warm-up pass, then at least `reps` timed passes, continuing
// until `min_time_s` has elapsed. A pass calls `fn` once per item.
Timing time_passes(std::size_t items, int reps, double min_time_s, const std::function<void(std::size_t)>& fn)
{
    for (std::size_t i = 0; i < items; ++i) {
        fn(i);
    }
    Timing t;
    int passes = 0;
    const auto start = Clock::now();
    double elapsed = 0.0;
    do {
        for (std::size_t i = 0; i < items; ++i) {
            fn(i);
        }
        ++passes;
        elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    } while (passes < reps || elapsed < min_time_s);
    t.evals = static_cast<std::int64_t>(passes) * static_cast<std::int64_t>(items);
    t.per_eval_s = elapsed / static_cast<double>(t.evals);
    return t;
}

void fill_shape(BenchRecord& rec, const SparsePolynomial& poly)
{
    rec.d = poly.dim();
    rec.m = poly.num_terms();
    rec.avg_support = poly.avg_support();
    rec.ms = static_cast<double>(poly.nnz());
}

AffineNormalConfig scaling_config(const ScalingOptions& opt)
{
    if (opt.q < 1 || opt.k_max < 1 || opt.reps < 1 || opt.points < 1) {
        throw std::invalid_argument("scaling sweep: q, k_max, reps and points must be positive");
    }
    AffineNormalConfig cfg;
    cfg.mode = Mode::hutchinson;
    cfg.krylov.lambda = opt.lambda;
    cfg.krylov.max_iter = opt.k_max;
    cfg.probes.q = opt.q;
    cfg.probes.seed = opt.seed;
    cfg.probes.parallel = opt.parallel;
    return cfg;
}

// Counts come from one untimed pass per row, which doubles as the warm-up.
// Timing then runs in rounds, one pass of every row per round, until each row
// has `reps` passes and the rounds have used `min_time_s` per row. A row's
// time per evaluation is the median of its pass averages, so a slow phase of
// the host is spread over all rows instead of skewing one of them.
std::vector<BenchRecord> scaling_rows(const std::vector<SparsePolynomial>& polys, const ScalingOptions& opt)
{
    const AffineNormalConfig cfg = scaling_config(opt);
    std::vector<std::vector<Vector>> pts;
    std::vector<BenchRecord> rows;
    for (const SparsePolynomial& poly : polys) {
        pts.push_back(sample_points(poly.dim(), opt.points));
        OpCounts counts;
        for (const Vector& x : pts.back()) {
            const AffineNormalResult r = affine_normal(poly, x, cfg);
            counts.hv += r.counts.hv;
            counts.third += r.counts.third;
            counts.krylov += r.counts.krylov;
        }
        BenchRecord rec;
        fill_shape(rec, poly);
        const auto n = static_cast<double>(opt.points);
        rec.hv_per_eval = static_cast<double>(counts.hv) / n;
        rec.third_per_eval = static_cast<double>(counts.third) / n;
        rec.krylov_per_eval = static_cast<double>(counts.krylov) / n;
        rec.extra["q"] = opt.q;
        rec.extra["seed"] = static_cast<double>(opt.seed);
        rows.push_back(std::move(rec));
    }

    std::vector<std::vector<double>> pass_times(polys.size());
    const auto start = Clock::now();
    const double budget = opt.min_time_s * static_cast<double>(polys.size());
    int rounds = 0;
    do {
        for (std::size_t r = 0; r < polys.size(); ++r) {
            const auto t0 = Clock::now();
            for (const Vector& x : pts[r]) {
                (void)affine_normal(polys[r], x, cfg);
            }
            const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
            pass_times[r].push_back(dt / static_cast<double>(pts[r].size()));
        }
        ++rounds;
    } while (rounds < opt.reps || std::chrono::duration<double>(Clock::now() - start).count() < budget);

    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto& v = pass_times[r];
        std::sort(v.begin(), v.end());
        const std::size_t h = v.size() / 2;
        rows[r].time_per_eval_s = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    }
    return rows;
}

std::string format_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// value for a CSV/JSON column, nullopt when unused
std::optional<double> column_value(const BenchRecord& r, const std::string& col)
{
    if (col == "d") return static_cast<double>(r.d);
    if (col == "m") return static_cast<double>(r.m);
    if (col == "avg_support") return r.avg_support;
    if (col == "ms") return r.ms;
    if (col == "time_per_eval_s") return r.time_per_eval_s;
    if (col == "hv_per_eval") return r.hv_per_eval;
    if (col == "third_per_eval") return r.third_per_eval;
    if (col == "krylov_per_eval") return r.krylov_per_eval;
    const auto it = r.extra.find(col);
    if (it == r.extra.end() || !std::isfinite(it->second)) {
        return std::nullopt;
    }
    return it->second;
}

} // namespace

SlopeFit loglog_fit(const std::vector<std::pair<double, double>>& pairs)
{
    if (pairs.size() < 2) {
        throw std::invalid_argument("loglog_fit: need at least 2 points");
    }
    const auto n = static_cast<double>(pairs.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : pairs) {
        if (!(x > 0.0) || !(y > 0.0)) {
            throw std::invalid_argument("loglog_fit: inputs must be positive");
        }
        sx += std::log(x);
        sy += std::log(y);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : pairs) {
        const double dx = std::log(x) - mx;
        const double dy = std::log(y) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("loglog_fit: x values must not all coincide");
    }
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    // a constant response is fit exactly
    fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    fit.n_points = static_cast<int>(pairs.size());
    return fit;
}

std::vector<BenchRecord> run_verify(const VerifyOptions& opt)
{
    AffineNormalConfig cfg;
    cfg.mode = Mode::exact;
    cfg.krylov.lambda = opt.lambda;
    cfg.krylov.max_iter = opt.max_iter;
    cfg.krylov.tol = opt.tol;

    std::vector<BenchRecord> rows;
    for (std::size_t d : opt.dims) {
        if (d > kDenseCap) {
            throw std::invalid_argument("run_verify: dimension exceeds dense cap");
        }
        const SparsePolynomial poly = opt.family == Family::quartic ? quartic_family({d}) : sphere(d);
        for (const Vector& x : sample_points(d, opt.points_per_dim)) {
            const auto t0 = Clock::now();
            const AffineNormalResult mf = affine_normal(poly, x, cfg);
            const auto t1 = Clock::now();
            const AffineNormalResult ref = reference_affine_normal(poly, x, opt.lambda);
            const DirectionError err = direction_error(mf.direction, ref.direction);

            BenchRecord rec;
            fill_shape(rec, poly);
            rec.time_per_eval_s = std::chrono::duration<double>(t1 - t0).count();
            rec.hv_per_eval = static_cast<double>(mf.counts.hv);
            rec.third_per_eval = static_cast<double>(mf.counts.third);
            rec.krylov_per_eval = static_cast<double>(mf.counts.krylov);
            rec.extra["err_mean"] = err.normalized_error;
            rec.extra["err_max"] = err.normalized_error;
            rec.extra["angle_max_deg"] = err.angle_deg;
            rows.push_back(std::move(rec));
        }
    }
    return rows;
}

std::vector<BenchRecord> run_probe_sweep(const ProbeSweepOptions& opt)
{
    if (opt.seeds < 1 || opt.points < 1) {
        throw std::invalid_argument("run_probe_sweep: seeds and points must be positive");
    }
    KrylovConfig kc;
    kc.lambda = opt.lambda;
    kc.max_iter = opt.max_iter;
    kc.tol = opt.tol;

    std::vector<BenchRecord> rows;
    for (std::size_t d : opt.dims) {
        if (d > kDenseCap) {
            throw std::invalid_argument("run_probe_sweep: dimension exceeds dense cap");
        }
        const SparsePolynomial poly = quartic_family({d});
        const auto pts = sample_points(d, opt.points);
        std::vector<TangentFrame> frames;
        std::vector<AffineNormalResult> exact;
        AffineNormalConfig ecfg;
        ecfg.mode = Mode::exact;
        ecfg.krylov = kc;
        for (const Vector& x : pts) {
            frames.push_back(build_frame(gradient(poly, x), grad_floor(x)));
            exact.push_back(affine_normal_in_frame(poly, x, frames.back(), ecfg));
        }
        const Timing exact_time = time_passes(pts.size(), 1, opt.min_time_s, [&](std::size_t i) {
            (void)logdet_grad_exact(poly, pts[i], frames[i], kc, opt.parallel);
        });

        for (int q : opt.q_list) {
            AffineNormalConfig hcfg;
            hcfg.mode = Mode::hutchinson;
            hcfg.krylov = kc;
            hcfg.probes.q = q;
            hcfg.probes.parallel = opt.parallel;

            double err_sum = 0.0, err_max = 0.0, ang_sum = 0.0, ang_max = 0.0;
            OpCounts counts;
            std::size_t n = 0;
            for (int s = 0; s < opt.seeds; ++s) {
                hcfg.probes.seed = static_cast<std::uint64_t>(s);
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    const AffineNormalResult r = affine_normal_in_frame(poly, pts[i], frames[i], hcfg);
                    const DirectionError e = direction_error(r.direction, exact[i].direction);
                    err_sum += e.normalized_error;
                    err_max = std::max(err_max, e.normalized_error);
                    ang_sum += e.angle_deg;
                    ang_max = std::max(ang_max, e.angle_deg);
                    counts.hv += r.counts.hv;
                    counts.third += r.counts.third;
                    counts.krylov += r.counts.krylov;
                    ++n;
                }
            }
            ProbeConfig pc = hcfg.probes;
            const std::size_t items = pts.size() * static_cast<std::size_t>(opt.seeds);
            const Timing ht = time_passes(items, 1, opt.min_time_s, [&](std::size_t k) {
                ProbeConfig local = pc;
                local.seed = k / pts.size();
                const std::size_t i = k % pts.size();
                (void)logdet_grad_hutchinson(poly, pts[i], frames[i], kc, local);
            });

            BenchRecord rec;
            fill_shape(rec, poly);
            const auto dn = static_cast<double>(n);
            rec.time_per_eval_s = ht.per_eval_s;
            rec.hv_per_eval = static_cast<double>(counts.hv) / dn;
            rec.third_per_eval = static_cast<double>(counts.third) / dn;
            rec.krylov_per_eval = static_cast<double>(counts.krylov) / dn;
            rec.extra["q"] = q;
            rec.extra["err_mean"] = err_sum / dn;
            rec.extra["err_max"] = err_max;
            rec.extra["angle_mean_deg"] = ang_sum / dn;
            rec.extra["angle_max_deg"] = ang_max;
            rec.extra["time_ratio_vs_exact"] = ht.per_eval_s / exact_time.per_eval_s;
            rows.push_back(std::move(rec));
        }
    }
    return rows;
}

SweepResult run_dim_sweep(const std::vector<std::size_t>& dims, std::size_t m_factor, const ScalingOptions& opt)
{
    if (dims.size() < 2 || !std::is_sorted(dims.begin(), dims.end())) {
        throw std::invalid_argument("run_dim_sweep: need >= 2 dimensions in ascending order");
    }
    std::vector<SparsePolynomial> polys;
    for (std::size_t d : dims) {
        polys.push_back(random_sparse({d, m_factor * d, opt.seed, opt.stab_eps}));
    }
    SweepResult res;
    res.rows = scaling_rows(polys, opt);
    std::vector<std::pair<double, double>> pairs;
    for (const BenchRecord& r : res.rows) {
        pairs.emplace_back(static_cast<double>(r.d), r.time_per_eval_s);
    }
    res.fit = loglog_fit(pairs);
    return res;
}

SweepResult run_sparsity_sweep(std::size_t dim, const std::vector<std::size_t>& m_list, const ScalingOptions& opt)
{
    if (m_list.size() < 2 || !std::is_sorted(m_list.begin(), m_list.end())) {
        throw std::invalid_argument("run_sparsity_sweep: need >= 2 monomial counts in ascending order");
    }
    std::vector<SparsePolynomial> polys;
    for (std::size_t m : m_list) {
        polys.push_back(random_sparse({dim, m, opt.seed, opt.stab_eps}));
    }
    SweepResult res;
    res.rows = scaling_rows(polys, opt);
    std::vector<std::pair<double, double>> pairs;
    for (const BenchRecord& r : res.rows) {
        pairs.emplace_back(r.ms, r.time_per_eval_s);
    }
    res.fit = loglog_fit(pairs);
    return res;
}

const std::vector<std::string>& csv_columns()
{
    static const std::vector<std::string> cols{"d",           "m",           "avg_support",     "ms",
                                               "time_per_eval_s", "hv_per_eval", "third_per_eval",
                                               "krylov_per_eval", "q",           "seed",
                                               "err_mean",    "err_max",     "angle_max_deg"};
    return cols;
}

void write_csv(std::ostream& out, const std::vector<BenchRecord>& rows, const std::optional<SlopeFit>& fit)
{
    const auto& cols = csv_columns();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        out << (c ? "," : "") << cols[c];
    }
    out << '\n';
    for (const BenchRecord& r : rows) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) {
                out << ',';
            }
            if (const auto v = column_value(r, cols[c])) {
                out << format_number(*v);
            }
        }
        out << '\n';
    }
    if (fit) {
        out << "# slope=" << format_number(fit->slope) << " r2=" << format_number(fit->r2) << '\n';
    }
}

void write_json(std::ostream& out, const std::vector<BenchRecord>& rows, const std::optional<SlopeFit>& fit)
{
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const BenchRecord& r : rows) {
        nlohmann::ordered_json row = nlohmann::ordered_json::object();
        for (const std::string& col : csv_columns()) {
            const auto v = column_value(r, col);
            row[col] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
        }
        doc.push_back(std::move(row));
    }
    if (fit) {
        doc.push_back({{"slope", fit->slope}, {"intercept", fit->intercept}, {"r2", fit->r2}});
    }
    out << doc.dump(2) << '\n';
}

} // namespace affinorm
