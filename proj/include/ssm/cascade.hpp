#pragma once
//
// Cascade application of a discrete LTI system.
//
// The resolvent is replaced by the product of S factors
//
//     (I - W)^{-1} ~= prod_{s=0}^{S-1} (I + W^(2^s)),   W = z^{-1} Abar,
//
// a matrix polynomial of degree 2^S - 1. In the time domain each factor is
// one pass over the m x L working block,
//
//     v_l <- Abar^(2^s) v_{l - 2^s} + v_l     for l >= 2^s,
//
// starting from v_l = Bbar u_l and finishing with y_l = C v_l + D u_l. The
// result is the convolution with the impulse response truncated to its
// first 2^S taps, computed with S distinct matrix powers.
//

#include <chrono>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ssm/lti.hpp"
#include "ssm/plr.hpp"
#include "ssm/signal.hpp"

namespace ssm {

// How plan() chooses the number of stages S. With gamma = ||Abar||_2,
// rho = spectral-radius estimate and scale = ||C||_2 ||Bbar||_2:
//
//   lemma_bound     gamma^(2^S) / (1 - gamma) * scale; rigorous, needs gamma < 1
//   power_norm      ||Abar^(2^S)||_2 / (1 - rho) * scale
//   spectral_decay  rho^(2^S) / (1 - rho) * scale
//   automatic       lemma_bound if gamma < 1, power_norm otherwise
//
// Only lemma_bound guarantees ||H(z) - H_S(z)||_2 <= tol on |z| = 1; the
// other two are reported as heuristic.
enum class StopCriterion { automatic, lemma_bound, power_norm, spectral_decay };

std::string_view to_string(StopCriterion c) noexcept;
StopCriterion parse_criterion(std::string_view text);

struct CascadePlan {
    std::vector<Matrix> powers;  // Abar^(2^s), s = 0..stages-1
    std::size_t stages = 0;
    double gamma = 0.0;            // ||Abar||_2
    double spectral_radius = 0.0;  // estimate used by the heuristic criteria
    double bound = 0.0;            // lemma bound at `stages`; NaN when gamma >= 1
    double heuristic_tail = 0.0;   // ||Abar^(2^stages)||_2
    double tol = 0.0;              // requested accuracy; NaN for fixed-stage plans
    StopCriterion criterion = StopCriterion::automatic;  // resolved criterion
    double criterion_value = 0.0;  // value of `criterion` at `stages`
    bool heuristic = false;        // selected by a non-rigorous criterion, or gamma >= 1

    // 2^stages - 1, saturating.
    std::size_t degree() const noexcept;
};

// Smallest S in [1, max_stages] whose criterion value is <= tol. Throws
// PlanningError (carrying the best value seen) if none is, or if the
// system is not stable.
CascadePlan plan(const DiscreteLti& sys, double tol, std::size_t max_stages = 40,
                 StopCriterion criterion = StopCriterion::automatic);

// Plan with a caller-chosen number of stages; bound and tail are still
// reported.
CascadePlan plan_with_stages(const DiscreteLti& sys, std::size_t stages);

// Lemma bound when gamma < 1, otherwise the power_norm heuristic value.
double bound(const CascadePlan& plan, const DiscreteLti& sys);

struct ApplyStats {
    std::size_t stage_count = 0;       // stages in the plan
    std::size_t effective_stages = 0;  // stages with 2^s < L
    std::size_t matvec_count = 0;      // applications of a power of Abar to one column
    std::size_t flops = 0;             // flops spent in those applications
    std::chrono::nanoseconds wall_time{0};
};

struct ApplyOptions {
    // Single-threaded in-place update. Multi-threaded runs use a double
    // buffer and produce bitwise identical output.
    bool deterministic = true;
    unsigned threads = 0;  // 0: hardware concurrency (only when !deterministic)
};

struct ApplyResult {
    SignalBlock output;
    ApplyStats stats;
};

ApplyResult apply(const CascadePlan& plan, const DiscreteLti& sys, const SignalBlock& input,
                  const ApplyOptions& options = {});

// Same scheme with each power applied through its PLR compression;
// plr_powers.size() must be >= plan.stages.
ApplyResult apply_plr(const CascadePlan& plan, std::span<const PlrMatrix> plr_powers, const DiscreteLti& sys,
                      const SignalBlock& input, const ApplyOptions& options = {});

struct FrequencyCheck {
    double max_error = 0.0;  // max_k ||H(z_k) - H_S(z_k)||_2
    double bound = 0.0;      // bound(plan, sys)
    complex worst_z{1.0, 0.0};
};

// Sweeps z_k = exp(2 pi i k / grid_points).
FrequencyCheck frequency_check(const CascadePlan& plan, const DiscreteLti& sys, std::size_t grid_points);

// min(stages, floor(log2(L - 1)) + 1) for L >= 2, 0 for L <= 1.
std::size_t effective_stage_count(std::size_t stages, std::size_t length) noexcept;

}  // namespace ssm
