#include "ttscale/arch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ttscale/error.hpp"

namespace ttscale::arch {

namespace {

[[noreturn]] void field_error(const std::string& origin, const std::string& field, const std::string& why) {
    fail("arch", origin + ": field '" + field + "' " + why);
}

}  // namespace

void ModelConfig::validate() const {
    const std::string origin = name.empty() ? "<config>" : name;
    if (name.empty()) field_error(origin, "name", "must be non-empty");
    if (!(active_params > 0.0)) field_error(origin, "active_params", "must be > 0");
    if (!(kv_elems_per_token > 0.0)) field_error(origin, "kv_elems_per_token", "must be > 0");
    if (!(gqa_ratio >= 1.0)) field_error(origin, "gqa_ratio", "must be >= 1");
    if (bytes_per_elem != 1 && bytes_per_elem != 2 && bytes_per_elem != 4)
        field_error(origin, "bytes_per_elem", "must be 1, 2 or 4");
}

void HardwareProfile::validate() const {
    const std::string origin = name.empty() ? "<profile>" : name;
    if (name.empty()) field_error(origin, "name", "must be non-empty");
    if (!(peak_flops > 0.0)) field_error(origin, "peak_flops", "must be > 0");
    if (!(mem_bw_elems > 0.0)) field_error(origin, "mem_bw_elems", "must be > 0");
}

double kv_per_token(double gb_per_32k, int bytes_per_elem) {
    if (!(gb_per_32k > 0.0)) fail("arch", "kv_per_token: gb_per_32k must be > 0");
    if (bytes_per_elem != 1 && bytes_per_elem != 2 && bytes_per_elem != 4)
        fail("arch", "kv_per_token: bytes_per_elem must be 1, 2 or 4");
    return gb_per_32k * 1073741824.0 / 32768.0 / static_cast<double>(bytes_per_elem);
}

KvGrowthFit kv_growth_fit(const ModelFamily& family) {
    std::set<double> distinct;
    std::vector<double> p, d;
    for (const auto& m : family.members) {
        m.validate();
        distinct.insert(m.active_params);
        p.push_back(m.active_params);
        d.push_back(m.kv_elems_per_token);
    }
    if (distinct.size() < 2)
        fail("arch", "kv_growth_fit: family '" + family.name + "' needs >= 2 distinct parameter counts");
    const fitting::PowerFit fit = fitting::power_fit(p, d);
    KvGrowthFit out;
    out.exponent = fit.exponent;
    out.per_doubling = fit.per_doubling;
    out.log2_intercept = fit.log2_intercept;
    out.residuals = fit.residuals;
    return out;
}

ModelConfig interpolate_config(const ModelFamily& family, double p, const std::string& name) {
    if (!(p > 0.0)) fail("arch", "interpolate_config: parameter count must be > 0");
    if (family.members.size() < 2) fail("arch", "interpolate_config: family needs >= 2 members");
    std::vector<double> ps, ds, rs;
    for (const auto& m : family.members) {
        m.validate();
        ps.push_back(m.active_params);
        ds.push_back(m.kv_elems_per_token);
        rs.push_back(m.gqa_ratio);
    }
    const fitting::PowerFit dfit = fitting::power_fit(ps, ds);
    const fitting::PowerFit rfit = fitting::power_fit(ps, rs);
    ModelConfig cfg;
    cfg.name = name;
    cfg.active_params = p;
    cfg.kv_elems_per_token = std::exp2(dfit.log2_intercept + dfit.exponent * std::log2(p));
    cfg.gqa_ratio = std::max(1.0, std::exp2(rfit.log2_intercept + rfit.exponent * std::log2(p)));
    cfg.bytes_per_elem = family.members.front().bytes_per_elem;
    cfg.validate();
    return cfg;
}

namespace {

ModelConfig preset(const char* name, double p, double gb_per_32k, double r) {
    ModelConfig cfg;
    cfg.name = name;
    cfg.active_params = p;
    cfg.kv_elems_per_token = kv_per_token(gb_per_32k, 2);
    cfg.gqa_ratio = r;
    cfg.bytes_per_elem = 2;
    return cfg;
}

}  // namespace

const std::vector<ModelConfig>& model_presets() {
    // KV sizes in GB per 32K tokens; GQA ratios from public model cards.
    // Qwen3-0.6B and 1.7B share 3.5 GB (identical layer/KV-head geometry).
    // Qwen3-4B shares 8B's 4.5 GB; 30B-A3B lists its active parameter count.
    static const std::vector<ModelConfig> presets = {
        preset("Qwen3-0.6B", 0.6e9, 3.5, 2),
        preset("Qwen3-1.7B", 1.7e9, 3.5, 2),
        preset("Qwen3-4B", 4e9, 4.5, 4),
        preset("Qwen3-8B", 8e9, 4.5, 4),
        preset("Qwen3-14B", 14e9, 6.0, 5),
        preset("Qwen3-32B", 32e9, 8.0, 8),
        preset("Qwen3-30B-A3B", 3.3e9, 3.0, 8),
        preset("DS-1.5B", 1.5e9, 0.875, 6),
        preset("DS-7B", 7e9, 1.75, 7),
        preset("DS-14B", 14e9, 6.0, 5),
        preset("DS-32B", 32e9, 8.0, 5),
    };
    return presets;
}

const std::vector<HardwareProfile>& hardware_presets() {
    // Public vendor figures: dense 16-bit peak and HBM bandwidth divided by
    // two bytes per element.
    static const std::vector<HardwareProfile> presets = {
        {"b200", 2.25e15, 4e12},
        {"h200", 0.989e15, 2.4e12},
    };
    return presets;
}

ModelFamily qwen3_table_family() {
    ModelFamily fam;
    fam.name = "qwen3";
    for (const char* n : {"Qwen3-1.7B", "Qwen3-8B", "Qwen3-14B", "Qwen3-32B"})
        fam.members.push_back(load_model_config(n));
    return fam;
}

ModelFamily ds_table_family() {
    ModelFamily fam;
    fam.name = "ds";
    for (const char* n : {"DS-1.5B", "DS-7B", "DS-14B", "DS-32B"})
        fam.members.push_back(load_model_config(n));
    return fam;
}

ModelFamily family_preset(const std::string& name) {
    if (name == "qwen3") return qwen3_table_family();
    if (name == "ds") return ds_table_family();
    fail("arch", "unknown family preset '" + name + "' (expected qwen3 or ds)");
}

namespace {

// key = value document. '#' starts a comment; blank lines ignored.
std::map<std::string, std::string> parse_kv_document(const std::string& text, const std::string& origin) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const char* ws = " \t\r";
        const auto b = s.find_first_not_of(ws);
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(ws);
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail("arch", origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            fail("arch", origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        if (kv.count(key)) fail("arch", origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv[key] = value;
    }
    return kv;
}

double to_number(const std::string& origin, const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        field_error(origin, key, "is not a number: '" + value + "'");
    }
}

std::string take(std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) return {};
    std::string v = it->second;
    kv.erase(it);
    return v;
}

void reject_unknown(const std::map<std::string, std::string>& kv, const std::string& origin) {
    if (!kv.empty()) field_error(origin, kv.begin()->first, "is not recognized");
}

}  // namespace

ModelConfig parse_model_config(const std::string& text, const std::string& origin) {
    auto kv = parse_kv_document(text, origin);
    ModelConfig cfg;
    cfg.name = take(kv, "name");
    if (cfg.name.empty()) field_error(origin, "name", "is required");

    const std::string bytes = take(kv, "bytes_per_elem");
    if (!bytes.empty()) cfg.bytes_per_elem = static_cast<int>(to_number(origin, "bytes_per_elem", bytes));

    const std::string p = take(kv, "active_params");
    if (p.empty()) field_error(origin, "active_params", "is required");
    cfg.active_params = to_number(origin, "active_params", p);

    const std::string d = take(kv, "kv_elems_per_token");
    const std::string gb = take(kv, "kv_gb_per_32k");
    if (!d.empty() && !gb.empty())
        field_error(origin, "kv_elems_per_token", "conflicts with kv_gb_per_32k; give one");
    if (d.empty() && gb.empty())
        field_error(origin, "kv_elems_per_token", "or kv_gb_per_32k is required");
    if (!d.empty()) {
        cfg.kv_elems_per_token = to_number(origin, "kv_elems_per_token", d);
    } else {
        const double g = to_number(origin, "kv_gb_per_32k", gb);
        if (!(g > 0.0)) field_error(origin, "kv_gb_per_32k", "must be > 0");
        cfg.kv_elems_per_token = kv_per_token(g, cfg.bytes_per_elem);
    }

    const std::string r = take(kv, "gqa_ratio");
    if (r.empty()) field_error(origin, "gqa_ratio", "is required");
    cfg.gqa_ratio = to_number(origin, "gqa_ratio", r);

    reject_unknown(kv, origin);
    cfg.validate();
    return cfg;
}

HardwareProfile parse_hardware_profile(const std::string& text, const std::string& origin) {
    auto kv = parse_kv_document(text, origin);
    HardwareProfile hw;
    hw.name = take(kv, "name");
    if (hw.name.empty()) field_error(origin, "name", "is required");
    const std::string peak = take(kv, "peak_flops");
    if (peak.empty()) field_error(origin, "peak_flops", "is required");
    hw.peak_flops = to_number(origin, "peak_flops", peak);
    const std::string bw = take(kv, "mem_bw_elems");
    if (bw.empty()) field_error(origin, "mem_bw_elems", "is required");
    hw.mem_bw_elems = to_number(origin, "mem_bw_elems", bw);
    reject_unknown(kv, origin);
    hw.validate();
    return hw;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("arch", "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Resolution order: $TTSCALE_PRESETS/<source>.cfg, built-in preset, file path.
std::optional<std::string> preset_dir_file(const std::string& source) {
    const char* dir = std::getenv("TTSCALE_PRESETS");
    if (!dir || !*dir) return std::nullopt;
    const std::filesystem::path candidate = std::filesystem::path(dir) / (source + ".cfg");
    std::error_code ec;
    if (std::filesystem::is_regular_file(candidate, ec)) return candidate.string();
    return std::nullopt;
}

bool looks_like_path(const std::string& source) {
    return source.find('/') != std::string::npos || source.ends_with(".cfg");
}

}  // namespace

ModelConfig load_model_config(const std::string& source) {
    if (const auto file = preset_dir_file(source)) return parse_model_config(read_file(*file), *file);
    for (const auto& p : model_presets())
        if (p.name == source) return p;
    if (looks_like_path(source)) return parse_model_config(read_file(source), source);
    fail("arch", "unknown model preset '" + source + "' (and not a config file path)");
}

HardwareProfile load_hardware_profile(const std::string& source) {
    if (const auto file = preset_dir_file(source)) return parse_hardware_profile(read_file(*file), *file);
    for (const auto& p : hardware_presets())
        if (p.name == source) return p;
    if (looks_like_path(source)) return parse_hardware_profile(read_file(source), source);
    fail("arch", "unknown hardware preset '" + source + "' (and not a config file path)");
}

}  // namespace ttscale::arch
