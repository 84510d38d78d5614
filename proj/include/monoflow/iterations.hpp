#pragma once

#include <optional>

#include "monoflow/operators.hpp"
#include "monoflow/schedules.hpp"

namespace monoflow {

struct IterOptions {
    double stop_tol = 0.0;      // 0 disables early stopping on the residual
    bool keep_all_states = false;
    std::optional<Vec> reference;  // xi override for D0 and the recursion checks
};

/// Per-iteration record. Scalar diagnostics are kept at every k; full states
/// are thinned to geometrically spaced indices plus the first/last 100 unless
/// keep_all_states is set.
struct IterateLog {
    std::vector<std::int64_t> k;
    std::vector<double> alpha;  // step sequence used (NaN where not applicable)
    std::vector<double> vel;    // |x_{k+1} - x_k|
    std::vector<double> res;    // |x_k - T(x_k)|
    std::vector<std::pair<std::int64_t, Vec>> retained_states;
    Vec final_state;
    std::int64_t iterations = 0;

    // reference data, present when a fixed point is declared
    std::optional<Vec> xi;
    std::optional<double> d0;
    // worst slack of the anchored-run inequalities, tracked in-loop
    double dist_bound_violation = 0.0;      // |x_k - xi| <= D0
    double anchor_bound_violation = 0.0;    // |T(x_k) - v| <= 2 D0
    double vel_recursion_violation = 0.0;   // one-step velocity recursion
    double res_recursion_violation = 0.0;   // one-step residual recursion

    const Vec* state_at(std::int64_t index) const;
};

IterateLog banach_picard(const OperatorSpec& t, const Vec& x0, std::int64_t max_iter,
                         const IterOptions& opt = {});

IterateLog krasnoselskii_mann(const OperatorSpec& t, const Vec& x0, const DiscreteSchedule& sched,
                              std::int64_t max_iter, const IterOptions& opt = {});

IterateLog halpern(const OperatorSpec& t, const Vec& x0, const Vec& v,
                   const DiscreteSchedule& sched, std::int64_t max_iter,
                   const IterOptions& opt = {});

/// Halpern on the relaxed operator (1-lambda)Id + lambda T; the residual
/// column is rescaled back to the original T.
IterateLog halpern_averaged(const OperatorSpec& t, double lambda, const Vec& x0, const Vec& v,
                            const DiscreteSchedule& sched, std::int64_t max_iter,
                            const IterOptions& opt = {});

struct BcmResult {
    IterateLog z_log;
    IterateLog x_log;                  // x_k = beta_k z_k
    double max_reformulation_diff = 0;  // vs the one-sequence recursion
    double max_halpern_diff = 0;        // vs halpern_averaged with v = 0
};

BcmResult bcm_scheme(const OperatorSpec& t, double lambda, const Vec& z0,
                     const std::function<double(std::int64_t)>& beta_k, std::int64_t max_iter,
                     const IterOptions& opt = {});

/// Two-sequence accelerated proximal point recursion for the resolvent of a
/// linear monotone map; residual column is |J(x_k) - x_k|.
IterateLog kim_ppa(const Mat& a, double eta, const Vec& x0, std::int64_t max_iter,
                   const IterOptions& opt = {});

}  // namespace monoflow
