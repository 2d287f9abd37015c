#pragma once

// Model-architecture and hardware constants.
//
// A ModelConfig reduces a transformer variant to the four numbers the cost
// formulas need: active parameter count P, KV-cache elements stored per token
// D (keys plus values, summed over every layer and KV head), the GQA ratio r
// (query heads per KV head), and storage width. Presets for the Qwen3 and
// DeepSeek-R1-Distill series are derived from their published per-32K-token
// KV sizes and public model cards; they are external reference data, not
// measurements made by this toolkit.

#include <optional>
#include <string>
#include <vector>

#include "ttscale/fitting.hpp"

namespace ttscale::arch {

struct ModelConfig {
    std::string name;
    double active_params = 0.0;       // P
    double kv_elems_per_token = 0.0;  // D
    double gqa_ratio = 1.0;           // r
    int bytes_per_elem = 2;

    // Throws a validation error naming the offending field.
    void validate() const;
};

struct HardwareProfile {
    std::string name;
    double peak_flops = 0.0;     // FLOP/s
    double mem_bw_elems = 0.0;   // elements/s at the working precision

    // Arithmetic intensity I, always derived from the two rates.
    double intensity() const { return peak_flops / mem_bw_elems; }

    void validate() const;
};

struct ModelFamily {
    std::string name;
    std::vector<ModelConfig> members;  // sorted ascending by active_params
};

// Elements of KV cache per token implied by a "GB per 32K tokens" figure.
// Uses binary gigabytes so the published power-of-two sizes convert exactly:
// gb * 2^30 / 32768 / bytes_per_elem.
double kv_per_token(double gb_per_32k, int bytes_per_elem);

struct KvGrowthFit {
    double exponent = 0.0;       // slope of log2 D against log2 P
    double per_doubling = 1.0;   // 2^exponent
    double log2_intercept = 0.0;
    std::vector<double> residuals;  // log2-space residuals per member
};

// Least-squares slope of log2(D) against log2(P) across a family.
KvGrowthFit kv_growth_fit(const ModelFamily& family);

// Hypothetical config at parameter count p on the family trend line:
// D and r both interpolated by log-log regression over the members.
ModelConfig interpolate_config(const ModelFamily& family, double p, const std::string& name);

// Built-in presets.
const std::vector<ModelConfig>& model_presets();
const std::vector<HardwareProfile>& hardware_presets();

// The four Qwen3 / DeepSeek models with published per-32K KV sizes, as
// families for fitting.
ModelFamily qwen3_table_family();
ModelFamily ds_table_family();
ModelFamily family_preset(const std::string& name);  // "qwen3" | "ds"

// Loads a model config from a preset name or a key=value config file.
// When the TTSCALE_PRESETS environment variable points at a directory and
// <dir>/<source>.cfg exists, that file takes precedence over built-ins.
ModelConfig load_model_config(const std::string& source);
HardwareProfile load_hardware_profile(const std::string& source);

// Parses the key=value document format directly (exposed for tests).
ModelConfig parse_model_config(const std::string& text, const std::string& origin);
HardwareProfile parse_hardware_profile(const std::string& text, const std::string& origin);

}  // namespace ttscale::arch
