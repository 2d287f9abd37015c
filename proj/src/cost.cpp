#include "ttscale/cost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ttscale/error.hpp"

namespace ttscale::cost {

const char* variant_name(AttnVariant v) {
    switch (v) {
        case AttnVariant::dense: return "dense";
        case AttnVariant::oracle_top_k: return "oracle-top-k";
        case AttnVariant::block_top_k: return "block-top-k";
        case AttnVariant::local: return "local";
    }
    return "?";
}

AttnVariant variant_from_name(const std::string& name) {
    if (name == "dense") return AttnVariant::dense;
    if (name == "oracle-top-k") return AttnVariant::oracle_top_k;
    if (name == "block-top-k") return AttnVariant::block_top_k;
    if (name == "local") return AttnVariant::local;
    fail("cost", "unknown attention variant '" + name + "'");
}

const char* cost_mode_name(CostMode m) {
    switch (m) {
        case CostMode::eflops_additive: return "eflops";
        case CostMode::flops_only: return "flops-only";
        case CostMode::eflops_max: return "max";
    }
    return "?";
}

CostMode cost_mode_from_name(const std::string& name) {
    if (name == "eflops") return CostMode::eflops_additive;
    if (name == "flops-only") return CostMode::flops_only;
    if (name == "max") return CostMode::eflops_max;
    fail("cost", "unknown cost mode '" + name + "'");
}

double cost_scalar(const CostBreakdown& b, CostMode mode) {
    switch (mode) {
        case CostMode::eflops_additive: return b.eflops_additive();
        case CostMode::flops_only: return b.total_compute();
        case CostMode::eflops_max: return b.eflops_max();
    }
    return b.eflops_additive();
}

void GenLenStats::validate() const {
    if (!(mean >= 0.0)) fail("cost", "gen length mean must be >= 0");
    if (second_moment < mean * mean * (1.0 - 1e-12))
        fail("cost", "gen length second moment below mean^2");
    if (!(count >= 1.0)) fail("cost", "gen length sample count must be >= 1");
}

void TTSSetting::validate() const {
    if (!(trials >= 0.0)) fail("cost", "trials must be >= 0");
    if (!(prompt_len >= 0.0)) fail("cost", "prompt_len must be >= 0");
    gen.validate();
    if (variant == AttnVariant::dense) {
        if (kv_budget) fail("cost", "dense setting must not carry a kv_budget");
    } else {
        if (!kv_budget) fail("cost", "sparse setting requires a kv_budget");
        if (!(*kv_budget >= 1.0)) fail("cost", "kv_budget must be >= 1");
        if (*kv_budget > prompt_len)
            fail("cost", "kv_budget exceeds prompt_len (model assumes L_in >= B)");
    }
    if (variant == AttnVariant::block_top_k && !(block_size >= 1.0))
        fail("cost", "block_size must be >= 1");
    if (sparse_overhead < 0.0) fail("cost", "sparse_overhead must be >= 0");
}

CostBreakdown dense_cost(const arch::ModelConfig& model, const arch::HardwareProfile& hw,
                         const TTSSetting& s) {
    model.validate();
    hw.validate();
    s.validate();
    if (s.variant != AttnVariant::dense) fail("cost", "dense_cost requires a dense setting");

    const double p = model.active_params, d = model.kv_elems_per_token, r = model.gqa_ratio;
    const double n = s.trials, lin = s.prompt_len;
    const double m1 = s.gen.mean, m2 = s.gen.second_moment;

    CostBreakdown b;
    b.intensity = hw.intensity();
    b.linear_compute = 2.0 * p * n * m1;
    b.attn_compute = 2.0 * r * n * lin * d * m1 + r * n * d * m2;
    b.kv_access = 2.0 * lin * d * m1 + n * d * m2;
    return b;
}

CostBreakdown sparse_cost(const arch::ModelConfig& model, const arch::HardwareProfile& hw,
                          const TTSSetting& s) {
    model.validate();
    hw.validate();
    s.validate();
    if (s.variant == AttnVariant::dense) fail("cost", "sparse_cost requires a sparse setting");

    const double p = model.active_params, d = model.kv_elems_per_token, r = model.gqa_ratio;
    const double n = s.trials, lin = s.prompt_len, budget = *s.kv_budget;
    const double m1 = s.gen.mean, m2 = s.gen.second_moment;

    CostBreakdown b;
    b.intensity = hw.intensity();
    b.linear_compute = 2.0 * p * n * m1;
    b.attn_compute = 2.0 * r * n * d * budget * m1;
    b.kv_access = 2.0 * n * d * budget * m1;
    if (s.variant == AttnVariant::block_top_k) {
        const double half_bs = 2.0 * s.block_size;
        b.search_compute = (2.0 * n * lin * d * m1 + r * n * d * m2) / half_bs;
        b.search_access = (2.0 * lin * d * m1 + n * d * m2) / half_bs;
    }
    if (s.sparse_overhead > 0.0) {
        const double f = 1.0 + s.sparse_overhead;
        b.linear_compute *= f;
        b.attn_compute *= f;
        b.kv_access *= f;
        b.search_compute *= f;
        b.search_access *= f;
    }
    return b;
}

CostBreakdown tts_cost(const arch::ModelConfig& model, const arch::HardwareProfile& hw,
                       const TTSSetting& s) {
    return s.variant == AttnVariant::dense ? dense_cost(model, hw, s) : sparse_cost(model, hw, s);
}

double attention_param_ratio(const arch::ModelConfig& model, const arch::HardwareProfile& hw,
                             double prompt_len, double gen_len) {
    model.validate();
    hw.validate();
    if (!(prompt_len >= 0.0) || !(gen_len >= 0.0))
        fail("cost", "attention_param_ratio: lengths must be >= 0");
    const double d = model.kv_elems_per_token, r = model.gqa_ratio, i = hw.intensity();
    return (2.0 * r * prompt_len * d + (r * d + i * d) * gen_len) / (2.0 * model.active_params);
}

BlockSizeChoice balanced_block_size(const arch::ModelConfig& model, const arch::HardwareProfile& hw,
                                    const TTSSetting& s, bool power_of_two) {
    TTSSetting probe = s;
    probe.variant = AttnVariant::block_top_k;
    probe.block_size = 1.0;
    probe.sparse_overhead = 0.0;
    const CostBreakdown at_one = sparse_cost(model, hw, probe);

    // Non-search total and the bs=1 search numerator (so search(bs) = x / (2 bs)).
    const double sparse_total = at_one.linear_compute + at_one.attn_compute;
    const double sparse_total_e = sparse_total + at_one.intensity * at_one.kv_access;
    const double x = 2.0 * (at_one.search_compute + at_one.intensity * at_one.search_access);
    if (!(sparse_total_e > 0.0)) fail("cost", "balanced_block_size: zero-cost setting");

    BlockSizeChoice out;
    out.sparse_total = sparse_total_e;
    out.real_solution = x / (2.0 * sparse_total_e);

    auto search_at = [&](double bs) { return x / (2.0 * bs); };
    auto imbalance = [&](double bs) { return std::abs(sparse_total_e - search_at(bs)); };

    if (power_of_two) {
        double best = 1.0;
        for (double bs = 1.0; bs <= std::max(2.0 * out.real_solution, 1.0); bs *= 2.0)
            if (imbalance(bs) < imbalance(best)) best = bs;
        out.chosen = best;
    } else {
        const double lo = std::max(1.0, std::floor(out.real_solution));
        const double hi = std::max(1.0, std::ceil(out.real_solution));
        out.chosen = imbalance(hi) < imbalance(lo) ? hi : lo;
    }
    out.search_total_at_chosen = search_at(out.chosen);
    return out;
}

namespace {

// Dense cost as a0 * L^2 + a1 * L in the requested mode, with
// E[L^2] := L^2 for the scalar length being solved for.
void dense_cost_poly(const arch::ModelConfig& model, const arch::HardwareProfile& hw,
                     CostMode mode, double prompt_len, double trials, double& a2, double& a1) {
    const double p = model.active_params, d = model.kv_elems_per_token, r = model.gqa_ratio;
    const double i = hw.intensity(), n = trials, lin = prompt_len;
    const double c2 = r * n * d;
    const double c1 = 2.0 * p * n + 2.0 * r * n * lin * d;
    const double m2 = n * d;
    const double m1 = 2.0 * lin * d;
    switch (mode) {
        case CostMode::flops_only:
            a2 = c2;
            a1 = c1;
            break;
        case CostMode::eflops_additive:
            a2 = c2 + i * m2;
            a1 = c1 + i * m1;
            break;
        case CostMode::eflops_max:
            fail("cost", "equivalent_length supports eflops and flops-only modes");
    }
}

}  // namespace

double equivalent_length(const arch::ModelConfig& model_a, double len_a,
                         const arch::ModelConfig& model_b, CostMode mode,
                         const arch::HardwareProfile& hw, double prompt_len, double trials) {
    model_a.validate();
    model_b.validate();
    hw.validate();
    if (!(len_a > 0.0)) fail("cost", "equivalent_length: len_a must be > 0");
    if (!(trials >= 1.0)) fail("cost", "equivalent_length: trials must be >= 1");

    double a2a = 0.0, a1a = 0.0, a2b = 0.0, a1b = 0.0;
    dense_cost_poly(model_a, hw, mode, prompt_len, trials, a2a, a1a);
    dense_cost_poly(model_b, hw, mode, prompt_len, trials, a2b, a1b);
    const double target = a2a * len_a * len_a + a1a * len_a;
    if (!(target > 0.0)) fail("cost", "equivalent_length: zero-cost reference");

    // a2 L^2 + a1 L - target = 0. The root via 2c/(b + sqrt(b^2+4ac)) is
    // stable when a2 is tiny.
    const double disc = a1b * a1b + 4.0 * a2b * target;
    if (!(disc >= 0.0)) fail("cost", "equivalent_length: no positive root");
    const double denom = a1b + std::sqrt(disc);
    if (!(denom > 0.0)) fail("cost", "equivalent_length: no positive root");
    return 2.0 * target / denom;
}

double FamilyTrend::kv_at(double p) const {
    return d0 * std::pow(p / p0, beta);
}

FamilyTrend FamilyTrend::from_fit(const arch::ModelFamily& family) {
    const arch::KvGrowthFit fit = arch::kv_growth_fit(family);
    FamilyTrend t;
    t.p0 = 1.0;
    t.d0 = std::exp2(fit.log2_intercept);  // regression line evaluated at P = 1
    t.beta = fit.exponent;
    return t;
}

namespace {

double grid_cost(const FamilyTrend& trend, const arch::HardwareProfile& hw, double gqa_ratio,
                 double prompt_len, double trials, double p, double len, CostMode mode) {
    arch::ModelConfig m;
    m.name = "trend";
    m.active_params = p;
    m.kv_elems_per_token = trend.kv_at(p);
    m.gqa_ratio = gqa_ratio;
    TTSSetting s;
    s.trials = trials;
    s.prompt_len = prompt_len;
    s.gen = GenLenStats::from_scalar(len);
    if (m.kv_elems_per_token <= 0.0) {
        // Degenerate trend (d0 = 0) still defines the parameter-only cost.
        const double linear = 2.0 * p * trials * len;
        return linear;
    }
    return cost_scalar(dense_cost(m, hw, s), mode);
}

}  // namespace

IsoCostGrid iso_cost_grid(const FamilyTrend& trend, const arch::HardwareProfile& hw,
                          const std::vector<double>& params, const std::vector<double>& gen_lens,
                          const std::vector<double>& levels, double gqa_ratio, double prompt_len,
                          double trials) {
    hw.validate();
    if (params.empty() || gen_lens.empty()) fail("cost", "iso_cost_grid: empty grid");
    if (!(gqa_ratio >= 1.0)) fail("cost", "iso_cost_grid: gqa_ratio must be >= 1");

    IsoCostGrid grid;
    grid.points.reserve(params.size() * gen_lens.size());
    for (double p : params) {
        if (!(p > 0.0)) fail("cost", "iso_cost_grid: parameter counts must be > 0");
        for (double len : gen_lens) {
            IsoCostPoint pt;
            pt.params = p;
            pt.gen_len = len;
            pt.eflops = grid_cost(trend, hw, gqa_ratio, prompt_len, trials, p, len,
                                  CostMode::eflops_additive);
            pt.flops =
                grid_cost(trend, hw, gqa_ratio, prompt_len, trials, p, len, CostMode::flops_only);
            grid.points.push_back(pt);
        }
    }

    const double pmin = *std::min_element(params.begin(), params.end());
    const double pmax = *std::max_element(params.begin(), params.end());
    for (double level : levels) {
        for (CostMode mode : {CostMode::eflops_additive, CostMode::flops_only}) {
            for (double len : gen_lens) {
                IsoCostContourPoint c;
                c.level = level;
                c.mode = mode;
                c.gen_len = len;
                auto cost_at = [&](double p) {
                    return grid_cost(trend, hw, gqa_ratio, prompt_len, trials, p, len, mode);
                };
                // Cost is strictly increasing in P; bisect in log space.
                if (cost_at(pmin) > level || cost_at(pmax) < level) {
                    c.params = std::numeric_limits<double>::quiet_NaN();
                } else {
                    double lo = std::log(pmin), hi = std::log(pmax);
                    for (int it = 0; it < 200; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        (cost_at(std::exp(mid)) < level ? lo : hi) = mid;
                    }
                    c.params = std::exp(0.5 * (lo + hi));
                }
                grid.contours.push_back(c);
            }
        }
    }
    return grid;
}

double device_seconds(double eflops, const arch::HardwareProfile& hw) {
    hw.validate();
    if (!(eflops >= 0.0)) fail("cost", "device_seconds: cost must be >= 0");
    return eflops / hw.peak_flops;
}

ThroughputEstimate throughput_estimate(const arch::ModelConfig& model,
                                       const arch::HardwareProfile& hw, double batch, double ctx,
                                       AttnVariant variant, std::optional<double> kv_budget,
                                       double block_size, bool additive_latency) {
    model.validate();
    hw.validate();
    if (!(batch >= 1.0)) fail("cost", "throughput_estimate: batch must be >= 1");
    if (!(ctx >= 1.0)) fail("cost", "throughput_estimate: ctx must be >= 1");
    if (variant != AttnVariant::dense) {
        if (!kv_budget || !(*kv_budget >= 1.0))
            fail("cost", "throughput_estimate: sparse variant requires kv_budget >= 1");
    }
    if (variant == AttnVariant::block_top_k && !(block_size >= 1.0))
        fail("cost", "throughput_estimate: block_size must be >= 1");

    const double p = model.active_params, d = model.kv_elems_per_token, r = model.gqa_ratio;

    auto step_seconds = [&](AttnVariant v, double& compute_s, double& memory_s) {
        double attn_flops_per_token = 0.0;  // per sequence, per decode step
        double kv_elems_per_token = 0.0;
        switch (v) {
            case AttnVariant::dense:
                attn_flops_per_token = 2.0 * r * ctx * d;
                kv_elems_per_token = ctx * d;
                break;
            case AttnVariant::oracle_top_k:
            case AttnVariant::local:
                attn_flops_per_token = 2.0 * r * *kv_budget * d;
                kv_elems_per_token = *kv_budget * d;
                break;
            case AttnVariant::block_top_k: {
                // Block representatives: ctx/bs key-mean vectors of D/2
                // elements, each scored against r query heads.
                const double rep_elems = ctx * d / (2.0 * block_size);
                attn_flops_per_token = 2.0 * r * *kv_budget * d + 2.0 * r * rep_elems;
                kv_elems_per_token = *kv_budget * d + rep_elems;
                break;
            }
        }
        compute_s = (2.0 * p + attn_flops_per_token) * batch / hw.peak_flops;
        memory_s = (p + batch * kv_elems_per_token) / hw.mem_bw_elems;
    };

    auto combine = [&](double c, double m) { return additive_latency ? c + m : std::max(c, m); };

    ThroughputEstimate est;
    double c = 0.0, m = 0.0;
    step_seconds(variant, c, m);
    est.compute_step_seconds = c;
    est.memory_step_seconds = m;
    est.tokens_per_sec = batch / combine(c, m);

    double dc = 0.0, dm = 0.0;
    step_seconds(AttnVariant::dense, dc, dm);
    est.dense_tokens_per_sec = batch / combine(dc, dm);
    est.speedup = est.tokens_per_sec / est.dense_tokens_per_sec;
    return est;
}

std::optional<double> layer_skip_overhead(const std::string& model_name) {
    if (model_name == "Qwen3-0.6B") return 0.0357;
    if (model_name == "Qwen3-32B") return 0.0156;
    return std::nullopt;
}

}  // namespace ttscale::cost
