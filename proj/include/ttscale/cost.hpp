#pragma once

// Analytical inference-cost model for test-time scaling.
//
// Compute is counted in FLOPs and memory traffic in elements accessed; the
// two are combined into equivalent FLOPs (eFLOPs) by weighting element
// accesses with the hardware arithmetic intensity I:
//
//   additive:  eFLOPs = compute + I * accesses
//   max:       eFLOPs = max(compute, I * accesses)
//
// Dense decoding of E[L] tokens (second moment E[L^2]) with N trials sharing
// one prompt cache of length L_in costs
//
//   linear_compute = 2 P N E[L]
//   attn_compute   = 2 r N L_in D E[L] + r N D E[L^2]
//   kv_access      = 2 L_in D E[L] + N D E[L^2]      (prompt term not * N)
//
// A sparse variant with uniform per-token KV budget B replaces the attention
// terms with 2 r N D B E[L] compute and 2 N D B E[L] access. Block top-k
// additionally pays a block-search term that scales with 1/(2 * block_size):
//
//   search_compute = (2 N L_in D E[L] + r N D E[L^2]) / (2 bs)
//   search_access  = (2 L_in D E[L] + N D E[L^2]) / (2 bs)
//
// All operations are pure functions of immutable inputs.

#include <optional>
#include <string>
#include <vector>

#include "ttscale/arch.hpp"

namespace ttscale::cost {

enum class AttnVariant { dense, oracle_top_k, block_top_k, local };

const char* variant_name(AttnVariant v);
AttnVariant variant_from_name(const std::string& name);

// Generation-length statistics: E[L], E[L^2] and the sample count they were
// estimated from. A scalar length L lifts to (L, L^2, 1).
struct GenLenStats {
    double mean = 0.0;
    double second_moment = 0.0;
    double count = 1.0;

    static GenLenStats from_scalar(double len) { return {len, len * len, 1.0}; }
    void validate() const;
};

struct TTSSetting {
    double trials = 1.0;                    // N (>= 0 accepted for extrapolation)
    double prompt_len = 0.0;                // L_in
    GenLenStats gen;                        // E[L], E[L^2]
    std::optional<double> kv_budget;        // B, absent for dense
    AttnVariant variant = AttnVariant::dense;
    double block_size = 1.0;                // block top-k only
    double sparse_overhead = 0.0;           // multiplicative surcharge on sparse totals

    void validate() const;
};

struct CostBreakdown {
    double linear_compute = 0.0;  // FLOPs
    double attn_compute = 0.0;    // FLOPs
    double kv_access = 0.0;       // elements
    double search_compute = 0.0;  // FLOPs
    double search_access = 0.0;   // elements
    double intensity = 0.0;       // I used for the eFLOPs totals

    double total_compute() const { return linear_compute + attn_compute + search_compute; }
    double total_access() const { return kv_access + search_access; }
    double eflops_additive() const { return total_compute() + intensity * total_access(); }
    double eflops_max() const {
        const double c = total_compute(), m = intensity * total_access();
        return c > m ? c : m;
    }
};

enum class CostMode { eflops_additive, flops_only, eflops_max };

const char* cost_mode_name(CostMode m);
CostMode cost_mode_from_name(const std::string& name);

double cost_scalar(const CostBreakdown& b, CostMode mode);

CostBreakdown dense_cost(const arch::ModelConfig& model, const arch::HardwareProfile& hw,
                         const TTSSetting& s);
CostBreakdown sparse_cost(const arch::ModelConfig& model, const arch::HardwareProfile& hw,
                          const TTSSetting& s);
// Dispatches on s.variant.
CostBreakdown tts_cost(const arch::ModelConfig& model, const arch::HardwareProfile& hw,
                       const TTSSetting& s);

// Ratio of attention-related cost to parameter-related cost for one trial:
//   (2 r L_in D + (r D + I D) L_out) / (2 P)
double attention_param_ratio(const arch::ModelConfig& model, const arch::HardwareProfile& hw,
                             double prompt_len, double gen_len);

// Block size equating the block-top-k attention total with the search total
// (search cost falls as 1/bs). `real_solution` is the unconstrained positive
// root; `chosen` minimizes |sparse_total - search_total(bs)| over integers
// >= 1 (optionally restricted to powers of two).
struct BlockSizeChoice {
    double real_solution = 1.0;
    double chosen = 1.0;
    double sparse_total = 0.0;           // additive eFLOPs of the non-search part
    double search_total_at_chosen = 0.0; // additive eFLOPs of the search part
};
BlockSizeChoice balanced_block_size(const arch::ModelConfig& model, const arch::HardwareProfile& hw,
                                    const TTSSetting& s, bool power_of_two = false);

// Generation length for model_b whose dense cost matches model_a generating
// len_a tokens, under the chosen cost mode (same prompt_len and trials on
// both sides). Closed-form positive root of a quadratic.
double equivalent_length(const arch::ModelConfig& model_a, double len_a,
                         const arch::ModelConfig& model_b, CostMode mode,
                         const arch::HardwareProfile& hw, double prompt_len, double trials);

// Iso-cost landscape over (P, L_out) with D(P) = d0 * (P/p0)^beta.
struct FamilyTrend {
    double d0 = 0.0;
    double p0 = 0.0;
    double beta = 0.0;

    double kv_at(double p) const;
    static FamilyTrend from_fit(const arch::ModelFamily& family);
};

struct IsoCostPoint {
    double params = 0.0;
    double gen_len = 0.0;
    double eflops = 0.0;
    double flops = 0.0;
};

struct IsoCostContourPoint {
    double level = 0.0;
    CostMode mode = CostMode::eflops_additive;
    double gen_len = 0.0;
    double params = 0.0;  // P at which cost(P, gen_len) == level; NaN if outside range
};

struct IsoCostGrid {
    std::vector<IsoCostPoint> points;          // row-major over (params, gen_len)
    std::vector<IsoCostContourPoint> contours; // one entry per (level, mode, gen_len)
};

IsoCostGrid iso_cost_grid(const FamilyTrend& trend, const arch::HardwareProfile& hw,
                          const std::vector<double>& params, const std::vector<double>& gen_lens,
                          const std::vector<double>& levels, double gqa_ratio, double prompt_len,
                          double trials);

// Work expressed as seconds of one device running at peak: cost / peak_flops.
double device_seconds(double eflops, const arch::HardwareProfile& hw);

// Analytical decode throughput under a bottleneck (or additive) step-latency
// model. Per decode step:
//   compute time = (2 P + per-token attention FLOPs) * batch / peak_flops
//   memory time  = (P + batch * KV elements loaded per token) / mem_bw_elems
// KV elements loaded per token at context `ctx`: dense ctx*D; top-k/local
// B*D; block top-k B*D + ctx*D/(2*block_size) for the block representatives.
struct ThroughputEstimate {
    double tokens_per_sec = 0.0;
    double dense_tokens_per_sec = 0.0;
    double speedup = 1.0;
    double compute_step_seconds = 0.0;
    double memory_step_seconds = 0.0;
};

ThroughputEstimate throughput_estimate(const arch::ModelConfig& model,
                                       const arch::HardwareProfile& hw, double batch, double ctx,
                                       AttnVariant variant, std::optional<double> kv_budget,
                                       double block_size, bool additive_latency = false);

// Published first-layer-skip overhead fractions for sparse attention, where
// known. Returns nullopt for models without a published figure.
std::optional<double> layer_skip_overhead(const std::string& model_name);

}  // namespace ttscale::cost
