#include "ssm/cascade.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "ssm/errors.hpp"

namespace ssm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// base^(2^stages) without forming 2^stages as an integer.
double pow_two_power(double base, std::size_t stages) {
    if (base == 0.0) return 0.0;
    return std::exp(std::ldexp(1.0, static_cast<int>(stages)) * std::log(base));
}

struct Scales {
    double gamma;
    double rho;
    double io;  // ||C||_2 ||Bbar||_2
};

Scales measure(const DiscreteLti& sys) {
    return {spectral_norm(sys.abar()), sys.spectral_radius(), spectral_norm(sys.c()) * spectral_norm(sys.bbar())};
}

double lemma_value(const Scales& sc, std::size_t stages) {
    if (sc.gamma >= 1.0) return kInf;
    return pow_two_power(sc.gamma, stages) / (1.0 - sc.gamma) * sc.io;
}

double power_norm_value(const Scales& sc, double tail_norm) {
    if (sc.rho >= 1.0) return kInf;
    return tail_norm / (1.0 - sc.rho) * sc.io;
}

double spectral_decay_value(const Scales& sc, std::size_t stages) {
    if (sc.rho >= 1.0) return kInf;
    return pow_two_power(sc.rho, stages) / (1.0 - sc.rho) * sc.io;
}

StopCriterion resolve(StopCriterion c, const Scales& sc) {
    if (c != StopCriterion::automatic) return c;
    return sc.gamma < 1.0 ? StopCriterion::lemma_bound : StopCriterion::power_norm;
}

double criterion_value(StopCriterion c, const Scales& sc, std::size_t stages, const Matrix& tail) {
    switch (c) {
        case StopCriterion::lemma_bound: return lemma_value(sc, stages);
        case StopCriterion::power_norm: return power_norm_value(sc, spectral_norm(tail));
        case StopCriterion::spectral_decay: return spectral_decay_value(sc, stages);
        case StopCriterion::automatic: break;
    }
    throw ContractError("criterion must be resolved before evaluation");
}

CascadePlan finish_plan(std::vector<Matrix> powers, const Matrix& tail, const Scales& sc, StopCriterion resolved,
                        double value, double tol) {
    CascadePlan p;
    p.stages = powers.size();
    p.powers = std::move(powers);
    p.gamma = sc.gamma;
    p.spectral_radius = sc.rho;
    p.bound = sc.gamma < 1.0 ? lemma_value(sc, p.stages) : std::numeric_limits<double>::quiet_NaN();
    p.heuristic_tail = spectral_norm(tail);
    p.tol = tol;
    p.criterion = resolved;
    p.criterion_value = value;
    p.heuristic = resolved != StopCriterion::lemma_bound || sc.gamma >= 1.0;
    return p;
}

void check_plan_matches(const CascadePlan& plan, const DiscreteLti& sys, const char* who) {
    if (plan.stages == 0 || plan.powers.size() < plan.stages) throw ContractError(std::string(who) + ": plan has no powers");
    if (plan.powers.front().rows() != sys.m())
        throw ContractError(std::string(who) + ": plan was built for m = " + std::to_string(plan.powers.front().rows()) +
                            ", system has m = " + std::to_string(sys.m()));
}

// Transposed copies of the powers so that one application is a sequence of
// axpy updates over contiguous columns. Entry i still accumulates over j in
// increasing order from zero, i.e. bitwise the same as mat_vec.
class DensePowers {
public:
    DensePowers(std::span<const Matrix> powers, std::size_t stages) {
        transposed_.reserve(stages);
        for (std::size_t s = 0; s < stages; ++s) transposed_.push_back(transpose(powers[s]));
    }

    void operator()(std::size_t s, std::span<const double> x, std::span<double> y) const {
        const Matrix& pt = transposed_[s];
        std::fill(y.begin(), y.end(), 0.0);
        const std::size_t m = y.size();
        double* __restrict out = y.data();
        for (std::size_t j = 0; j < m; ++j) {
            const double xj = x[j];
            const double* __restrict col = pt.row(j).data();
            for (std::size_t i = 0; i < m; ++i) out[i] += col[i] * xj;
        }
    }

private:
    std::vector<Matrix> transposed_;
};

class PlrPowers {
public:
    explicit PlrPowers(std::span<const PlrMatrix> powers) : powers_(powers) {}

    void operator()(std::size_t s, std::span<const double> x, std::span<double> y) const { powers_[s].matvec(x, y); }

private:
    std::span<const PlrMatrix> powers_;
};

unsigned worker_count(const ApplyOptions& options) {
    if (options.deterministic) return 1;
    unsigned n = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
    return std::max(1u, n);
}

template <typename Body>
void parallel_range(std::size_t begin, std::size_t end, unsigned workers, Body&& body) {
    const std::size_t n = end - begin;
    if (workers <= 1 || n < 2 * workers) {
        body(begin, end);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t lo = begin; lo < end; lo += chunk) pool.emplace_back([&body, lo, hi = std::min(end, lo + chunk)] { body(lo, hi); });
}

template <typename PowerOp>
ApplyResult run_cascade(const CascadePlan& plan, const DiscreteLti& sys, const SignalBlock& input,
                        const ApplyOptions& options, const PowerOp& power, std::size_t flops_per_matvec) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t m = sys.m();
    const std::size_t length = input.length();
    const unsigned workers = worker_count(options);

    SignalBlock work(m, length);
    for (std::size_t l = 0; l < length; ++l) mat_vec(sys.bbar(), input.column(l), work.column(l));

    ApplyStats stats;
    stats.stage_count = plan.stages;
    SignalBlock next = workers > 1 ? SignalBlock(m, length) : SignalBlock();
    std::vector<double> scratch(m);

    for (std::size_t s = 0; s < plan.stages; ++s) {
        if (s >= std::numeric_limits<std::size_t>::digits - 1) break;
        const std::size_t shift = std::size_t{1} << s;
        if (shift >= length) break;
        ++stats.effective_stages;
        stats.matvec_count += length - shift;

        if (workers <= 1) {
            // Right to left, so column l - shift still holds the previous stage.
            for (std::size_t l = length; l-- > shift;) {
                power(s, work.column(l - shift), scratch);
                auto v = work.column(l);
                for (std::size_t i = 0; i < m; ++i) v[i] = scratch[i] + v[i];
            }
        } else {
            std::copy_n(work.data().begin(), shift * m, next.data().begin());
            parallel_range(shift, length, workers, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t l = lo; l < hi; ++l) {
                    auto out = next.column(l);
                    power(s, work.column(l - shift), out);
                    auto cur = work.column(l);
                    for (std::size_t i = 0; i < m; ++i) out[i] = out[i] + cur[i];
                }
            });
            std::swap(work, next);
        }
    }
    stats.flops = stats.matvec_count * flops_per_matvec;

    SignalBlock output(sys.q(), length);
    std::vector<double> feed(sys.q());
    for (std::size_t l = 0; l < length; ++l) {
        auto y = output.column(l);
        mat_vec(sys.c(), work.column(l), y);
        mat_vec(sys.d(), input.column(l), feed);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += feed[i];
    }
    stats.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start);
    return {std::move(output), stats};
}

void check_input(const DiscreteLti& sys, const SignalBlock& input) {
    if (input.dim() != sys.p())
        throw ContractError("apply: input has " + std::to_string(input.dim()) + " channels, system expects " +
                            std::to_string(sys.p()));
    if (input.length() == 0) throw ContractError("apply: empty input block");
}

}  // namespace

std::string_view to_string(StopCriterion c) noexcept {
    switch (c) {
        case StopCriterion::automatic: return "auto";
        case StopCriterion::lemma_bound: return "lemma";
        case StopCriterion::power_norm: return "power-norm";
        case StopCriterion::spectral_decay: return "spectral";
    }
    return "auto";
}

StopCriterion parse_criterion(std::string_view text) {
    if (text == "auto") return StopCriterion::automatic;
    if (text == "lemma") return StopCriterion::lemma_bound;
    if (text == "power-norm") return StopCriterion::power_norm;
    if (text == "spectral") return StopCriterion::spectral_decay;
    throw ContractError("unknown stopping criterion '" + std::string(text) + "'");
}

std::size_t CascadePlan::degree() const noexcept {
    if (stages >= static_cast<std::size_t>(std::numeric_limits<std::size_t>::digits))
        return std::numeric_limits<std::size_t>::max();
    return (std::size_t{1} << stages) - 1;
}

CascadePlan plan(const DiscreteLti& sys, double tol, std::size_t max_stages, StopCriterion criterion) {
    if (!(tol > 0.0)) throw ContractError("plan: tol must be positive");
    if (max_stages == 0) throw ContractError("plan: max_stages must be >= 1");
    if (!sys.stable())
        throw PlanningError("plan: system is not stable (spectral radius estimate " + std::to_string(sys.spectral_radius()) +
                                " >= 1)",
                            0, kInf);
    const Scales sc = measure(sys);
    const StopCriterion resolved = resolve(criterion, sc);
    if (resolved == StopCriterion::lemma_bound && sc.gamma >= 1.0)
        throw PlanningError("plan: lemma bound requires ||Abar||_2 < 1, got " + std::to_string(sc.gamma), 0, kInf);

    std::vector<Matrix> powers{sys.abar()};
    double best = kInf;
    std::size_t best_stages = 0;
    for (std::size_t stages = 1; stages <= max_stages; ++stages) {
        Matrix tail = mat_mul(powers.back(), powers.back());  // Abar^(2^stages)
        const double value = criterion_value(resolved, sc, stages, tail);
        if (value < best || best_stages == 0) {
            best = value;
            best_stages = stages;
        }
        if (value <= tol) return finish_plan(std::move(powers), tail, sc, resolved, value, tol);
        if (stages < max_stages) powers.push_back(std::move(tail));
    }
    throw PlanningError("plan: tolerance " + std::to_string(tol) + " not reached within " + std::to_string(max_stages) +
                            " stages (best " + std::to_string(best) + " at " + std::to_string(best_stages) + ")",
                        best_stages, best);
}

CascadePlan plan_with_stages(const DiscreteLti& sys, std::size_t stages) {
    if (stages == 0) throw ContractError("plan_with_stages: stages must be >= 1");
    const Scales sc = measure(sys);
    const StopCriterion resolved = resolve(StopCriterion::automatic, sc);
    auto powers = repeated_squares(sys.abar(), stages);
    const Matrix tail = mat_mul(powers.back(), powers.back());
    const double value = criterion_value(resolved, sc, stages, tail);
    return finish_plan(std::move(powers), tail, sc, resolved, value, std::numeric_limits<double>::quiet_NaN());
}

double bound(const CascadePlan& plan, const DiscreteLti& sys) {
    check_plan_matches(plan, sys, "bound");
    if (plan.gamma < 1.0) return plan.bound;
    const Scales sc{plan.gamma, plan.spectral_radius, spectral_norm(sys.c()) * spectral_norm(sys.bbar())};
    return power_norm_value(sc, plan.heuristic_tail);
}

ApplyResult apply(const CascadePlan& plan, const DiscreteLti& sys, const SignalBlock& input, const ApplyOptions& options) {
    check_plan_matches(plan, sys, "apply");
    check_input(sys, input);
    const DensePowers power(plan.powers, plan.stages);
    return run_cascade(plan, sys, input, options, power, 2 * sys.m() * sys.m());
}

ApplyResult apply_plr(const CascadePlan& plan, std::span<const PlrMatrix> plr_powers, const DiscreteLti& sys,
                      const SignalBlock& input, const ApplyOptions& options) {
    check_plan_matches(plan, sys, "apply_plr");
    check_input(sys, input);
    if (plr_powers.size() < plan.stages) throw ContractError("apply_plr: fewer PLR powers than plan stages");
    for (std::size_t s = 0; s < plan.stages; ++s)
        if (plr_powers[s].size() != sys.m()) throw ContractError("apply_plr: PLR power has wrong size");

    // Per-stage flop counts differ; count them per executed stage.
    ApplyResult r = run_cascade(plan, sys, input, options, PlrPowers(plr_powers), 0);
    std::size_t flops = 0;
    for (std::size_t s = 0; s < r.stats.effective_stages; ++s)
        flops += (input.length() - (std::size_t{1} << s)) * plr_powers[s].matvec_flops();
    r.stats.flops = flops;
    return r;
}

FrequencyCheck frequency_check(const CascadePlan& plan, const DiscreteLti& sys, std::size_t grid_points) {
    check_plan_matches(plan, sys, "frequency_check");
    if (grid_points < 2) throw ContractError("frequency_check: grid_points must be >= 2");
    FrequencyCheck out;
    out.bound = bound(plan, sys);
    for (std::size_t k = 0; k < grid_points; ++k) {
        const complex z = unit_circle_point(k, grid_points);
        const ComplexMatrix exact = transfer_eval(sys, z);
        const ComplexMatrix truncated = truncated_transfer_eval(sys, z, plan.powers, plan.stages);
        ComplexMatrix diff(exact.rows(), exact.cols());
        for (std::size_t i = 0; i < diff.data().size(); ++i) diff.data()[i] = exact.data()[i] - truncated.data()[i];
        const double err = spectral_norm(diff);
        if (err > out.max_error) {
            out.max_error = err;
            out.worst_z = z;
        }
    }
    return out;
}

std::size_t effective_stage_count(std::size_t stages, std::size_t length) noexcept {
    if (length <= 1) return 0;
    return std::min<std::size_t>(stages, static_cast<std::size_t>(std::bit_width(length - 1)));
}

}  // namespace ssm
