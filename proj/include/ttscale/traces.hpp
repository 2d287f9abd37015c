#pragma once

// Reasoning-trace records and the estimators computed from them.
//
// Trace files are JSON Lines, one record per sample:
//   {"task_id":"aime-3","model":"Qwen3-8B","attn":"oracle-top-k",
//    "kv_budget":64,"max_new_tokens":32768,"sample_id":0,
//    "gen_len":15234,"correct":true}
// kv_budget is null for dense records. Unknown fields are rejected under
// strict ingestion and ignored otherwise.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ttscale/cost.hpp"

namespace ttscale::traces {

struct SampleRecord {
    std::string task_id;
    std::string model;
    cost::AttnVariant attn = cost::AttnVariant::dense;
    std::optional<std::int64_t> kv_budget;
    std::int64_t max_new_tokens = 0;
    std::int64_t sample_id = 0;
    std::int64_t gen_len = 0;
    bool correct = false;
};

// One generation configuration; totally ordered for deterministic iteration.
struct ConfigKey {
    std::string model;
    cost::AttnVariant attn = cost::AttnVariant::dense;
    std::optional<std::int64_t> kv_budget;
    std::int64_t max_new_tokens = 0;

    auto operator<=>(const ConfigKey&) const = default;

    static ConfigKey of(const SampleRecord& r) {
        return {r.model, r.attn, r.kv_budget, r.max_new_tokens};
    }
};

struct GroupKey {
    std::string task_id;
    ConfigKey config;

    auto operator<=>(const GroupKey&) const = default;
};

class TraceSet {
  public:
    TraceSet() = default;

    // Builds from records (validating and grouping). Throws on invariant
    // violations; `origin` names the source in error messages.
    static TraceSet from_records(std::vector<SampleRecord> records,
                                 const std::string& origin = "<memory>");

    const std::map<GroupKey, std::vector<SampleRecord>>& groups() const { return groups_; }
    bool empty() const { return groups_.empty(); }

    const std::vector<SampleRecord>& group(const GroupKey& key) const;
    bool has_group(const GroupKey& key) const { return groups_.count(key) > 0; }

    // Distinct task ids, models, in deterministic order.
    std::vector<std::string> tasks() const;
    std::vector<std::string> models() const;

  private:
    std::map<GroupKey, std::vector<SampleRecord>> groups_;
};

// Reads a JSONL trace file. Errors report the 1-based line number.
TraceSet ingest(const std::string& path, bool strict = false);
TraceSet ingest_stream(std::istream& in, const std::string& origin, bool strict = false);

// Writes records back out in canonical group order (one JSON object per line).
void serialize(const TraceSet& ts, std::ostream& out);

// Length moments of one group: mean, second moment, sample count.
cost::GenLenStats length_moments(const TraceSet& ts, const GroupKey& key);

// Number of correct samples in a group.
std::int64_t correct_count(const TraceSet& ts, const GroupKey& key);

// Unbiased Pass@K: 1 - C(S-c, K)/C(S, K), computed in overflow-safe product
// form. Exactly 1 when S - c < K, exactly 0 when c == 0.
double pass_at_k(std::int64_t s, std::int64_t c, std::int64_t k);

struct SolveRateRow {
    GroupKey key;
    std::int64_t k = 0;
    std::int64_t samples = 0;
    std::int64_t correct = 0;
    double pass = 0.0;
};

// Pass@K for every group and every requested K, ordered by (task, config, K).
std::vector<SolveRateRow> solve_rate_table(const TraceSet& ts,
                                           const std::vector<std::int64_t>& k_values);

}  // namespace ttscale::traces
