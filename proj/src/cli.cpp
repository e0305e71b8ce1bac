#include "ssm/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>

#include "ssm/cascade.hpp"
#include "ssm/errors.hpp"
#include "ssm/io.hpp"
#include "ssm/oracles.hpp"
#include "ssm/plr.hpp"
#include "ssm/random.hpp"

namespace ssm {

namespace {

namespace fs = std::filesystem;
using io::shortest;

struct Options {
    // hippo / discretize / plr
    std::size_t m = 0;
    std::string a_path, b_path, c_path, d_path;
    std::string out_path, out_a, out_b, out_dir;
    double delta = 0.0;
    std::string scheme = "bilinear";
    std::size_t leaf = 16;
    std::size_t powers = 0;
    double eps = 1e-10;

    // model commands
    std::string model;
    std::optional<double> tol;
    std::optional<std::size_t> stages;
    std::size_t max_stages = 40;
    std::string criterion = "spectral";
    std::string method = "cascade";
    std::string input;
    double plr_eps = 1e-10;
    std::size_t grid = 256;
    unsigned threads = 0;
    std::optional<bool> deterministic;

    // bench / verify / signal
    std::vector<std::size_t> lengths;
    std::vector<std::string> methods{"cascade", "recurrence"};
    std::size_t reps = 5;
    std::string csv;
    std::uint64_t seed = 0;
    std::size_t dim = 1;
    std::size_t length = 0;
};

ApplyOptions apply_options(const Options& o, bool default_deterministic) {
    const bool det = o.deterministic.value_or(default_deterministic);
    return {det, det ? 0u : o.threads};
}

std::string complex_text(complex z) {
    std::ostringstream s;
    s << shortest(z.real()) << (std::signbit(z.imag()) ? "" : "+") << shortest(z.imag()) << "i";
    return s.str();
}

CascadePlan make_plan(const DiscreteLti& sys, const Options& o) {
    if (o.stages) return plan_with_stages(sys, *o.stages);
    return plan(sys, o.tol.value_or(1e-12), o.max_stages, parse_criterion(o.criterion));
}

std::string plan_summary(const CascadePlan& p, const DiscreteLti& sys) {
    std::ostringstream s;
    s << "stages=" << p.stages << " degree=" << p.degree() << " criterion=" << to_string(p.criterion)
      << " gamma=" << shortest(p.gamma) << " rho=" << shortest(p.spectral_radius) << " bound=" << shortest(bound(p, sys))
      << " tail_norm=" << shortest(p.heuristic_tail);
    if (p.heuristic) s << " heuristic";
    return s.str();
}

int cmd_hippo(const Options& o, std::ostream& out) {
    if (o.m == 0) throw ContractError("hippo: --m must be >= 1");
    io::write_matrix(o.out_path, hippo_matrix(o.m));
    out << "wrote " << o.m << "x" << o.m << " to " << o.out_path << "\n";
    return 0;
}

int cmd_discretize(const Options& o, std::ostream& out) {
    const Matrix a = io::read_matrix(o.a_path);
    const std::size_t m = a.rows();
    const Matrix b = o.b_path.empty() ? Matrix::constant(m, 1, 1.0) : io::read_matrix(o.b_path);
    const Matrix c = o.c_path.empty() ? Matrix::constant(1, m, 1.0 / static_cast<double>(m)) : io::read_matrix(o.c_path);
    const Matrix d = o.d_path.empty() ? Matrix(c.rows(), b.cols()) : io::read_matrix(o.d_path);
    const ContinuousLti cont(a, b, c, d);
    const Scheme scheme = parse_scheme(o.scheme);
    if (scheme == Scheme::none) throw ContractError("discretize: --scheme must be bilinear or exponential");
    const DiscreteLti sys =
        scheme == Scheme::bilinear ? discretize_bilinear(cont, o.delta) : discretize_exponential(cont, o.delta);
    if (!o.out_a.empty()) io::write_matrix(o.out_a, sys.abar());
    if (!o.out_b.empty()) io::write_matrix(o.out_b, sys.bbar());
    if (!o.out_dir.empty()) io::save_model(o.out_dir, sys);
    out << "diag_first=" << shortest(sys.abar()(0, 0)) << " diag_last=" << shortest(sys.abar()(m - 1, m - 1))
        << " rho=" << shortest(sys.spectral_radius()) << " gamma=" << shortest(spectral_norm(sys.abar())) << "\n";
    return 0;
}

int cmd_plan(const Options& o, std::ostream& out) {
    const DiscreteLti sys = io::load_model(o.model);
    if (!o.tol) throw ContractError("plan: --tol is required");
    out << plan_summary(plan(sys, *o.tol, o.max_stages, parse_criterion(o.criterion)), sys) << "\n";
    return 0;
}

int cmd_apply(const Options& o, std::ostream& out) {
    const DiscreteLti sys = io::load_model(o.model);
    const SignalBlock u = io::read_signal(o.input);
    if (u.dim() != sys.p())
        throw ContractError(o.input + ": input has " + std::to_string(u.dim()) + " channels, model expects " +
                            std::to_string(sys.p()));
    const auto start = std::chrono::steady_clock::now();
    SignalBlock y;
    std::ostringstream report;
    report << "method=" << o.method;
    if (o.method == "recurrence") {
        y = recurrence_apply(sys, u);
    } else if (o.method == "conv") {
        y = conv_apply(kernel_materialize(sys, u.length()), u);
    } else if (o.method == "cascade" || o.method == "cascade-plr") {
        const CascadePlan p = make_plan(sys, o);
        ApplyResult r;
        if (o.method == "cascade") {
            r = apply(p, sys, u, apply_options(o, false));
        } else {
            const auto plr = plr_compress_all(p.powers, o.plr_eps);
            r = apply_plr(p, plr, sys, u, apply_options(o, false));
        }
        y = std::move(r.output);
        report << " " << plan_summary(p, sys) << " effective_stages=" << r.stats.effective_stages
               << " matvec_count=" << r.stats.matvec_count << " flops=" << r.stats.flops;
    } else {
        throw ContractError("apply: unknown method '" + o.method + "'");
    }
    const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start);
    io::write_signal(o.out_path, y);
    out << report.str() << " wall_ns=" << ns.count() << "\n";
    return 0;
}

int cmd_freq(const Options& o, std::ostream& out) {
    const DiscreteLti sys = io::load_model(o.model);
    if (!o.stages) throw ContractError("freq: --stages is required");
    const CascadePlan p = plan_with_stages(sys, *o.stages);
    const FrequencyCheck f = frequency_check(p, sys, o.grid);
    out << "stages=" << p.stages << " grid=" << o.grid << " max_error=" << shortest(f.max_error)
        << " bound=" << shortest(f.bound) << " worst_z=" << complex_text(f.worst_z);
    if (p.gamma >= 1.0) out << " heuristic";
    out << "\n";
    return 0;
}

void print_plr(std::ostream& out, const PlrMatrix& p) {
    const auto ranks = p.offdiag_ranks();
    out << "max_rank=" << p.max_offdiag_rank() << " depth=" << p.depth() << " flops=" << p.matvec_flops()
        << " dense_flops=" << 2 * p.size() * p.size() << " stored=" << p.stored_values() << " ranks=";
    for (std::size_t i = 0; i < ranks.size(); ++i) out << (i ? "," : "") << ranks[i];
    out << "\n";
}

int cmd_plr(const Options& o, std::ostream& out) {
    const Matrix a = io::read_matrix(o.a_path);
    if (o.powers == 0) {
        print_plr(out, plr_build(a, o.eps, o.leaf));
        return 0;
    }
    const auto powers = repeated_squares(a, o.powers);
    for (std::size_t s = 0; s < powers.size(); ++s) {
        out << "power=" << s << " ";
        print_plr(out, plr_build(powers[s], o.eps, o.leaf));
    }
    return 0;
}

int cmd_signal(const Options& o, std::ostream& out) {
    if (o.dim == 0 || o.length == 0) throw ContractError("signal: --dim and --length must be >= 1");
    io::write_signal(o.out_path, random_signal(o.dim, o.length, o.seed));
    out << "wrote " << o.dim << "x" << o.length << " to " << o.out_path << "\n";
    return 0;
}

int cmd_bench(const Options& o, std::ostream& out) {
    const DiscreteLti sys = io::load_model(o.model);
    for (const auto& m : o.methods)
        if (m != "cascade" && m != "cascade-plr" && m != "recurrence" && m != "conv")
            throw ContractError("bench: unknown method '" + m + "'");
    if (o.reps == 0) throw ContractError("bench: --reps must be >= 1");
    const CascadePlan p = make_plan(sys, o);
    const bool wants_plr = std::find(o.methods.begin(), o.methods.end(), "cascade-plr") != o.methods.end();
    const std::vector<PlrMatrix> plr = wants_plr ? plr_compress_all(p.powers, o.plr_eps) : std::vector<PlrMatrix>{};
    const ApplyOptions options = apply_options(o, false);

    std::vector<io::ResultRow> rows;
    for (std::size_t length : o.lengths) {
        if (length == 0) throw ContractError("bench: lengths must be >= 1");
        const SignalBlock u = random_signal(sys.p(), length, o.seed);
        const SignalBlock reference = recurrence_apply(sys, u);
        for (const auto& method : o.methods) {
            SignalBlock y;
            std::uint64_t matvecs = 0;
            auto run = [&] {
                if (method == "recurrence") {
                    y = recurrence_apply(sys, u);
                    matvecs = length;
                } else if (method == "conv") {
                    y = conv_apply(kernel_materialize(sys, length), u);
                    matvecs = length;
                } else {
                    ApplyResult r = method == "cascade" ? apply(p, sys, u, options) : apply_plr(p, plr, sys, u, options);
                    y = std::move(r.output);
                    matvecs = r.stats.matvec_count;
                }
            };
            run();  // warm-up
            std::vector<std::uint64_t> times;
            for (std::size_t rep = 0; rep < o.reps; ++rep) {
                const auto start = std::chrono::steady_clock::now();
                run();
                const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start);
                times.push_back(static_cast<std::uint64_t>(ns.count()));
            }
            std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
            io::ResultRow row;
            row.method = method;
            row.m = sys.m();
            row.p = sys.p();
            row.q = sys.q();
            row.length = length;
            const bool cascade = method == "cascade" || method == "cascade-plr";
            row.stages = cascade ? p.stages : 0;
            row.tol = cascade && !std::isnan(p.tol) ? p.tol : 0.0;
            row.matvec_count = matvecs;
            row.wall_ns = times[times.size() / 2];
            if (method != "recurrence") row.rel_l2_err = relative_l2_error(y, reference);
            rows.push_back(row);
        }
    }
    io::export_csv(rows, o.csv);
    for (const auto& r : rows)
        out << r.method << " L=" << r.length << " matvec_count=" << r.matvec_count << " wall_ns=" << r.wall_ns
            << (r.rel_l2_err ? " rel_l2_err=" + shortest(*r.rel_l2_err) : std::string()) << "\n";
    out << "wrote " << rows.size() << " rows to " << o.csv << "\n";
    return 0;
}

class Verifier {
public:
    Verifier(std::ostream& out, double tol) : out_(out), tol_(tol) {}

    void check(const std::string& name, double worst, double limit, const std::string& detail) {
        const bool ok = worst <= limit;
        failures_ += ok ? 0 : 1;
        out_ << (ok ? "PASS " : "FAIL ") << name << " worst=" << shortest(worst) << " limit=" << shortest(limit) << " "
             << detail << "\n";
    }

    double tol() const { return tol_; }
    int exit_code() const { return failures_ == 0 ? 0 : 1; }

private:
    std::ostream& out_;
    double tol_;
    int failures_ = 0;
};

int cmd_verify(const Options& o, std::ostream& out) {
    const double tol = o.tol.value_or(1e-10);
    if (!(tol > 0.0)) throw ContractError("verify: --tol must be > 0");
    const ApplyOptions options = apply_options(o, true);
    Verifier v(out, tol);
    Rng rng(o.seed);
    const DiscreteLti hippo = hippo_system(100, 0.5e-3);

    std::vector<DiscreteLti> systems;
    std::vector<SignalBlock> inputs;
    for (int i = 0; i < 20; ++i) {
        const std::size_t m = rng.index(1, 8);
        systems.push_back(random_stable_system(m, rng.index(1, 3), rng.index(1, 3), 0.9, rng));
        inputs.push_back(random_signal(systems.back().p(), rng.index(1, 256), rng.next()));
    }
    const SignalBlock hippo_u = random_signal(1, 4096, rng.next());
    const SignalBlock hippo_ref = recurrence_apply(hippo, hippo_u);

    double worst = 0.0;
    for (std::size_t i = 0; i < systems.size(); ++i) {
        const auto r = apply(plan(systems[i], tol / 10), systems[i], inputs[i], options);
        worst = std::max(worst, relative_l2_error(r.output, recurrence_apply(systems[i], inputs[i])));
    }
    v.check("cascade-vs-recurrence", worst, tol, "random_systems=20");

    const CascadePlan hippo_plan = plan(hippo, tol / 10, 40, StopCriterion::spectral_decay);
    const auto hippo_out = apply(hippo_plan, hippo, hippo_u, options);
    v.check("cascade-vs-recurrence-hippo", relative_l2_error(hippo_out.output, hippo_ref), tol,
            "m=100 L=4096 stages=" + std::to_string(hippo_plan.stages));

    worst = 0.0;
    for (std::size_t i = 0; i < systems.size(); ++i) {
        const SignalBlock ref = recurrence_apply(systems[i], inputs[i]);
        worst = std::max(worst, relative_l2_error(conv_apply(kernel_materialize(systems[i], inputs[i].length()), inputs[i]), ref));
    }
    v.check("recurrence-vs-conv", worst, tol, "random_systems=20");
    const SignalBlock hippo_head = SignalBlock::from_matrix(hippo_u.to_matrix().block(0, 0, 1, 1024));
    v.check("recurrence-vs-conv-hippo",
            relative_l2_error(conv_apply(kernel_materialize(hippo, 1024), hippo_head), recurrence_apply(hippo, hippo_head)),
            tol, "m=100 L=1024");

    double worst_ratio = 0.0;
    for (const auto& sys : systems) {
        const FrequencyCheck f = frequency_check(plan_with_stages(sys, rng.index(1, 6)), sys, 128);
        worst_ratio = std::max(worst_ratio, f.bound > 0 ? f.max_error / f.bound : (f.max_error > 0 ? 2.0 : 0.0));
    }
    v.check("frequency-bound", worst_ratio, 1.0 + 1e-12, "random_systems=20 grid=128 (error/bound)");
    const FrequencyCheck hf = frequency_check(plan_with_stages(hippo, 15), hippo, 64);
    v.check("frequency-bound-hippo", hf.max_error / hf.bound, 1.0 + 1e-12, "stages=15 grid=64 (error/bound)");

    const double plr_eps = tol / 100;
    worst = 0.0;
    for (int i = 0; i < 5; ++i) {
        const DiscreteLti sys = random_stable_system(rng.index(16, 48), 1, 1, 0.9, rng);
        const SignalBlock u = random_signal(1, rng.index(16, 512), rng.next());
        const CascadePlan p = plan(sys, tol / 10);
        const auto plr = plr_compress_all(p.powers, plr_eps);
        worst = std::max(worst, relative_l2_error(apply_plr(p, plr, sys, u, options).output, apply(p, sys, u, options).output));
    }
    v.check("plr-vs-dense", worst, tol, "random_systems=5 eps=" + shortest(plr_eps));
    const auto hippo_plr = plr_compress_all(hippo_plan.powers, plr_eps);
    const auto dense_head = apply(hippo_plan, hippo, hippo_head, options);
    const auto plr_head = apply_plr(hippo_plan, hippo_plr, hippo, hippo_head, options);
    v.check("plr-vs-dense-hippo", relative_l2_error(plr_head.output, dense_head.output), tol, "m=100 L=1024");

    return v.exit_code();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Evaluate discrete state-space convolutions with a cascade of repeated squares", "ssmcascade"};
    app.require_subcommand(1);
    Options o;

    auto* hippo = app.add_subcommand("hippo", "Write the HiPPO state matrix");
    hippo->add_option("--m", o.m, "State dimension")->required();
    hippo->add_option("--out", o.out_path, "Output .clti path")->required();

    auto* disc = app.add_subcommand("discretize", "Discretize A (and B) with step delta");
    disc->add_option("--a", o.a_path, "State matrix")->required();
    disc->add_option("--b", o.b_path, "Input matrix (default ones(m,1))");
    disc->add_option("--c", o.c_path, "Output matrix (default ones(1,m)/m)");
    disc->add_option("--d", o.d_path, "Feedthrough (default 0)");
    disc->add_option("--delta", o.delta, "Step size")->required();
    disc->add_option("--scheme", o.scheme, "bilinear|exponential")->check(CLI::IsMember({"bilinear", "exponential"}));
    disc->add_option("--out-a", o.out_a, "Output path for Abar");
    disc->add_option("--out-b", o.out_b, "Output path for Bbar");
    disc->add_option("--out-dir", o.out_dir, "Write a model directory");

    auto* plan_cmd = app.add_subcommand("plan", "Choose the number of cascade stages");
    plan_cmd->add_option("--model", o.model, "Model directory")->required();
    plan_cmd->add_option("--tol", o.tol, "Target accuracy")->required();
    plan_cmd->add_option("--max-stages", o.max_stages, "Stage cap");
    plan_cmd->add_option("--criterion", o.criterion, "auto|lemma|power-norm|spectral");

    auto* apply_cmd = app.add_subcommand("apply", "Apply the model to a signal");
    apply_cmd->add_option("--model", o.model, "Model directory")->required();
    apply_cmd->add_option("--method", o.method, "cascade|recurrence|conv|cascade-plr")
        ->check(CLI::IsMember({"cascade", "recurrence", "conv", "cascade-plr"}));
    apply_cmd->add_option("--input", o.input, "Input signal (.clti)")->required();
    apply_cmd->add_option("--out", o.out_path, "Output signal (.clti)")->required();
    auto* tol_opt = apply_cmd->add_option("--tol", o.tol, "Target accuracy (default 1e-12)");
    apply_cmd->add_option("--stages", o.stages, "Fixed stage count")->excludes(tol_opt);
    apply_cmd->add_option("--criterion", o.criterion, "auto|lemma|power-norm|spectral");
    apply_cmd->add_option("--max-stages", o.max_stages, "Stage cap");
    apply_cmd->add_option("--plr-eps", o.plr_eps, "PLR truncation tolerance");
    apply_cmd->add_option("--threads", o.threads, "Worker threads when not deterministic");
    apply_cmd->add_flag("--deterministic,!--no-deterministic", o.deterministic, "Single-threaded in-place update");

    auto* freq = app.add_subcommand("freq", "Compare H and its truncation on the unit circle");
    freq->add_option("--model", o.model, "Model directory")->required();
    freq->add_option("--stages", o.stages, "Stage count")->required();
    freq->add_option("--grid", o.grid, "Grid points")->required();

    auto* plr_cmd = app.add_subcommand("plr", "Report PLR ranks and matvec cost");
    plr_cmd->add_option("--a", o.a_path, "Matrix")->required();
    plr_cmd->add_option("--eps", o.eps, "Relative truncation tolerance")->required();
    plr_cmd->add_option("--leaf", o.leaf, "Leaf block size");
    plr_cmd->add_option("--powers", o.powers, "Report A^(2^s) for s < N instead");

    auto* bench = app.add_subcommand("bench", "Time methods and write a CSV");
    bench->add_option("--model", o.model, "Model directory")->required();
    bench->add_option("--L", o.lengths, "Sequence lengths")->delimiter(',')->required();
    bench->add_option("--methods", o.methods, "Methods")->delimiter(',');
    bench->add_option("--reps", o.reps, "Timed repetitions (median reported)");
    bench->add_option("--csv", o.csv, "Output CSV")->required();
    auto* bench_tol = bench->add_option("--tol", o.tol, "Target accuracy (default 1e-12)");
    bench->add_option("--stages", o.stages, "Fixed stage count")->excludes(bench_tol);
    bench->add_option("--criterion", o.criterion, "auto|lemma|power-norm|spectral");
    bench->add_option("--plr-eps", o.plr_eps, "PLR truncation tolerance");
    bench->add_option("--seed", o.seed, "Input seed");
    bench->add_option("--threads", o.threads, "Worker threads when not deterministic");
    bench->add_flag("--deterministic,!--no-deterministic", o.deterministic, "Single-threaded in-place update");

    auto* verify = app.add_subcommand("verify", "Cross-check all methods");
    verify->add_option("--seed", o.seed, "Seed");
    verify->add_option("--tol", o.tol, "Tolerance (default 1e-10)");
    verify->add_flag("--deterministic,!--no-deterministic", o.deterministic, "Single-threaded in-place update");
    verify->add_option("--threads", o.threads, "Worker threads when not deterministic");

    auto* signal = app.add_subcommand("signal", "Write a seeded random input signal");
    signal->add_option("--dim", o.dim, "Channels");
    signal->add_option("--length", o.length, "Samples")->required();
    signal->add_option("--seed", o.seed, "Seed");
    signal->add_option("--out", o.out_path, "Output .clti path")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        if (*hippo) return cmd_hippo(o, out);
        if (*disc) return cmd_discretize(o, out);
        if (*plan_cmd) return cmd_plan(o, out);
        if (*apply_cmd) return cmd_apply(o, out);
        if (*freq) return cmd_freq(o, out);
        if (*plr_cmd) return cmd_plr(o, out);
        if (*bench) return cmd_bench(o, out);
        if (*verify) return cmd_verify(o, out);
        if (*signal) return cmd_signal(o, out);
    } catch (const PlanningError& e) {
        err << "ssmcascade: planning failed: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        err << "ssmcascade: numerical error: " << e.what() << "\n";
        return 1;
    } catch (const FormatError& e) {
        err << "ssmcascade: bad file (" << e.field() << "): " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "ssmcascade: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace ssm
