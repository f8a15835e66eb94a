#include "affinorm/cli.hpp"

#include "affinorm/affine.hpp"
#include "affinorm/bench.hpp"
#include "affinorm/errors.hpp"
#include "affinorm/families.hpp"
#include "affinorm/poly_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace affinorm::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_numbers(const std::string& text)
{
    std::string s = text;
    for (char& c : s) {
        if (c == ',' || c == ';' || c == '\n' || c == '\t') {
            c = ' ';
        }
    }
    std::istringstream in(s);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw UsageError("not a number: '" + tok + "'");
        }
        if (used != tok.size()) {
            throw UsageError("not a number: '" + tok + "'");
        }
        out.push_back(v);
    }
    return out;
}

std::vector<double> parse_point(const std::string& spec)
{
    if (std::filesystem::is_regular_file(spec)) {
        std::ifstream in(spec);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_numbers(ss.str());
    }
    return parse_numbers(spec);
}

std::vector<int> to_ints(const std::vector<std::size_t>& v)
{
    return {v.begin(), v.end()};
}

// Writes a report to --out or to `out`.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback)
    {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) {
                throw UsageError("cannot open output file: " + path);
            }
        }
    }
    std::ostream& stream() { return file_ ? *file_ : fallback_; }
    // summary goes to stdout when the report went to a file, else stderr
    bool to_file() const { return file_ != nullptr; }

private:
    std::string path_;
    std::ostream& fallback_;
    std::unique_ptr<std::ofstream> file_;
};

void emit(Sink& sink, const std::string& format, const std::vector<BenchRecord>& rows,
          const std::optional<SlopeFit>& fit)
{
    if (format == "json") {
        write_json(sink.stream(), rows, fit);
    } else {
        write_csv(sink.stream(), rows, fit);
    }
}

void apply_thread_cap()
{
#ifdef _OPENMP
    if (const char* env = std::getenv("AFFINORM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) {
            omp_set_num_threads(n);
        }
    }
#endif
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v == 0.0 ? 0.0 : v);
    return buf;
}

} // namespace

std::vector<std::size_t> parse_list(const std::string& text)
{
    auto to_size = [&text](const std::string& tok) {
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(tok, &used);
        } catch (const std::exception&) {
            throw UsageError("bad list '" + text + "'");
        }
        if (used != tok.size() || v < 0) {
            throw UsageError("bad list '" + text + "'");
        }
        return static_cast<std::size_t>(v);
    };
    std::vector<std::size_t> out;
    if (const auto pos = text.find(".."); pos != std::string::npos) {
        const std::size_t lo = to_size(text.substr(0, pos));
        const std::size_t hi = to_size(text.substr(pos + 2));
        if (hi < lo) {
            throw UsageError("empty range '" + text + "'");
        }
        for (std::size_t v = lo; v <= hi; ++v) {
            out.push_back(v);
        }
        return out;
    }
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        out.push_back(to_size(tok));
    }
    if (out.empty()) {
        throw UsageError("empty list");
    }
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Matrix-free affine normal directions of sparse polynomial level sets", "affinorm"};
    app.require_subcommand(1);
    app.allow_extras(false);

    // direction
    std::string poly_path, point_spec, mode = "exact";
    double lambda = 1e-6, tol = 1e-10;
    int probes = 2;
    std::optional<int> max_iter;
    std::uint64_t seed = 0;
    bool as_json = false, parallel = false;
    auto* dir = app.add_subcommand("direction", "Affine normal direction at one point");
    dir->add_option("--poly", poly_path, "Polynomial JSON file")->required();
    dir->add_option("--point", point_spec, "Comma-separated coordinates or a file")->required();
    dir->add_option("--mode", mode)->check(CLI::IsMember({"exact", "hutchinson"}));
    dir->add_option("--lambda", lambda);
    dir->add_option("--probes", probes)->check(CLI::PositiveNumber);
    dir->add_option("--max-iter", max_iter)->check(CLI::PositiveNumber);
    dir->add_option("--tol", tol);
    dir->add_option("--seed", seed);
    dir->add_flag("--json", as_json);
    dir->add_flag("--parallel", parallel);

    // shared report flags
    std::string out_path, format = "csv", dims_text;
    auto add_report = [&](CLI::App* sub) {
        sub->add_option("--out", out_path, "Output path (default stdout)");
        sub->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
    };

    std::size_t points = 5;
    std::string family = "quartic";
    auto* verify = app.add_subcommand("verify", "Exact matrix-free vs dense reference");
    verify->add_option("--dims", dims_text, "Dimensions, a..b or a,b,c")->required();
    verify->add_option("--points", points)->check(CLI::PositiveNumber);
    verify->add_option("--lambda", lambda);
    verify->add_option("--family", family)->check(CLI::IsMember({"quartic", "sphere"}));
    add_report(verify);

    ScalingOptions sopt;
    std::size_t m_factor = 10, sparsity_dim = 200;
    std::string m_list_text = "200,400,800,1600,3200";
    auto add_scaling = [&](CLI::App* sub) {
        sub->add_option("--probes", sopt.q)->check(CLI::PositiveNumber);
        sub->add_option("--max-iter", sopt.k_max)->check(CLI::PositiveNumber);
        sub->add_option("--lambda", sopt.lambda);
        sub->add_option("--reps", sopt.reps)->check(CLI::PositiveNumber);
        sub->add_option("--points", sopt.points)->check(CLI::PositiveNumber);
        sub->add_option("--seed", sopt.seed);
        sub->add_option("--stab-eps", sopt.stab_eps);
        sub->add_option("--min-time", sopt.min_time_s);
        sub->add_flag("--parallel", sopt.parallel);
        add_report(sub);
    };
    auto* bdim = app.add_subcommand("bench-dim", "Runtime scaling in the dimension");
    bdim->add_option("--dims", dims_text)->required();
    bdim->add_option("--m-factor", m_factor)->check(CLI::PositiveNumber);
    add_scaling(bdim);

    auto* bsp = app.add_subcommand("bench-sparsity", "Runtime scaling in the sparsity m*s");
    bsp->add_option("--dim", sparsity_dim)->check(CLI::PositiveNumber);
    bsp->add_option("--m-list", m_list_text);
    add_scaling(bsp);

    ProbeSweepOptions popt;
    std::string q_list_text = "2,5,10,20,50,100";
    auto* bprobe = app.add_subcommand("bench-probes", "Accuracy and cost against the probe count");
    bprobe->add_option("--dims", dims_text)->required();
    bprobe->add_option("--q-list", q_list_text);
    bprobe->add_option("--seeds", popt.seeds)->check(CLI::PositiveNumber);
    bprobe->add_option("--points", popt.points)->check(CLI::PositiveNumber);
    bprobe->add_option("--lambda", popt.lambda);
    bprobe->add_option("--max-iter", popt.max_iter)->check(CLI::PositiveNumber);
    bprobe->add_option("--tol", popt.tol);
    bprobe->add_option("--min-time", popt.min_time_s);
    bprobe->add_flag("--parallel", popt.parallel);
    add_report(bprobe);

    std::size_t gen_dim = 3, gen_m = 0;
    RandomSparseSpec rspec;
    std::string gen_family = "quartic";
    auto* gen = app.add_subcommand("gen", "Write a generated polynomial as JSON");
    gen->add_option("--family", gen_family)->check(CLI::IsMember({"quartic", "random", "sphere"}));
    gen->add_option("--dim", gen_dim)->required()->check(CLI::PositiveNumber);
    gen->add_option("--m", gen_m, "Random monomial count (default 10*dim)");
    gen->add_option("--seed", rspec.seed);
    gen->add_option("--stab-eps", rspec.stab_eps);
    gen->add_option("--out", out_path);

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    apply_thread_cap();
    try {
        if (dir->parsed()) {
            const SparsePolynomial poly = read_polynomial_json(poly_path);
            const Vector x = parse_point(point_spec);
            if (x.size() != poly.dim()) {
                throw UsageError("point has " + std::to_string(x.size()) + " coordinates, polynomial dim is " +
                                 std::to_string(poly.dim()));
            }
            AffineNormalConfig cfg;
            cfg.mode = mode == "exact" ? Mode::exact : Mode::hutchinson;
            cfg.krylov.lambda = lambda;
            cfg.krylov.tol = tol;
            cfg.krylov.max_iter = max_iter.value_or(cfg.mode == Mode::exact ? 100 : 5);
            cfg.probes.q = probes;
            cfg.probes.seed = seed;
            cfg.probes.parallel = parallel;
            validate(cfg.krylov);
            const AffineNormalResult r = affine_normal(poly, x, cfg);
            if (as_json) {
                nlohmann::ordered_json j;
                j["mode"] = mode;
                j["direction"] = r.direction;
                j["direction_unit"] = r.direction_unit;
                j["u"] = r.u;
                j["grad_norm"] = r.grad_norm;
                j["counts"] = {{"hv", r.counts.hv}, {"third", r.counts.third}, {"krylov", r.counts.krylov}};
                j["lambda_used"] = r.lambda_used;
                out << j.dump(2) << '\n';
            } else {
                out << "direction_unit:";
                for (double v : r.direction_unit) {
                    out << ' ' << fmt(v);
                }
                out << "\ngrad_norm: " << fmt(r.grad_norm) << "\ncounts: hv=" << r.counts.hv
                    << " third=" << r.counts.third << " krylov=" << r.counts.krylov
                    << "\nlambda_used: " << fmt(r.lambda_used) << '\n';
            }
            return kOk;
        }
        if (verify->parsed()) {
            VerifyOptions vo;
            vo.dims = parse_list(dims_text);
            vo.points_per_dim = points;
            vo.lambda = lambda;
            vo.family = family == "sphere" ? Family::sphere : Family::quartic;
            const auto rows = run_verify(vo);
            Sink sink(out_path, out);
            emit(sink, format, rows, std::nullopt);
            double max_err = 0.0, max_ang = 0.0;
            for (const auto& r : rows) {
                max_err = std::max(max_err, r.extra.at("err_max"));
                max_ang = std::max(max_ang, r.extra.at("angle_max_deg"));
            }
            (sink.to_file() ? out : err) << "max_err=" << fmt(max_err) << " max_angle_deg=" << fmt(max_ang)
                                         << " rows=" << rows.size() << '\n';
            return kOk;
        }
        if (bdim->parsed() || bsp->parsed()) {
            const SweepResult res = bdim->parsed()
                                        ? run_dim_sweep(parse_list(dims_text), m_factor, sopt)
                                        : run_sparsity_sweep(sparsity_dim, parse_list(m_list_text), sopt);
            Sink sink(out_path, out);
            emit(sink, format, res.rows, res.fit);
            (sink.to_file() ? out : err) << "slope=" << fmt(res.fit.slope) << " r2=" << fmt(res.fit.r2) << '\n';
            return kOk;
        }
        if (bprobe->parsed()) {
            popt.dims = parse_list(dims_text);
            popt.q_list = to_ints(parse_list(q_list_text));
            const auto rows = run_probe_sweep(popt);
            Sink sink(out_path, out);
            emit(sink, format, rows, std::nullopt);
            std::ostream& s = sink.to_file() ? out : err;
            for (const auto& r : rows) {
                s << "d=" << r.d << " q=" << r.extra.at("q") << " err_mean=" << fmt(r.extra.at("err_mean"))
                  << " time_ratio_vs_exact=" << fmt(r.extra.at("time_ratio_vs_exact")) << '\n';
            }
            return kOk;
        }
        if (gen->parsed()) {
            SparsePolynomial poly;
            if (gen_family == "quartic") {
                poly = quartic_family({gen_dim});
            } else if (gen_family == "sphere") {
                poly = sphere(gen_dim);
            } else {
                rspec.dim = gen_dim;
                rspec.m = gen_m > 0 ? gen_m : 10 * gen_dim;
                poly = random_sparse(rspec);
            }
            if (out_path.empty()) {
                out << to_polynomial_json(poly) << '\n';
            } else {
                write_polynomial_json(poly, out_path);
            }
            return kOk;
        }
    } catch (const ZeroGradient& e) {
        err << "ZeroGradient: " << e.what() << '\n';
        return kNumericalError;
    } catch (const IndefiniteOperator& e) {
        err << "IndefiniteOperator: " << e.what() << '\n';
        return kNumericalError;
    } catch (const NonFiniteValue& e) {
        err << "NonFiniteValue: " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
    return kUsageError;
}

} // namespace affinorm::cli
