#include "ttscale/traces.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ttscale/error.hpp"

namespace ttscale::traces {

using nlohmann::json;

namespace {

void validate_record(const SampleRecord& r, const std::string& where) {
    if (r.task_id.empty()) fail("traces", where + ": task_id must be non-empty");
    if (r.model.empty()) fail("traces", where + ": model must be non-empty");
    if (r.max_new_tokens <= 0) fail("traces", where + ": max_new_tokens must be > 0");
    if (r.gen_len < 0) fail("traces", where + ": gen_len must be >= 0");
    if (r.gen_len > r.max_new_tokens) fail("traces", where + ": gen_len exceeds max_new_tokens");
    if (r.attn == cost::AttnVariant::dense) {
        if (r.kv_budget) fail("traces", where + ": dense record must have null kv_budget");
    } else {
        if (!r.kv_budget || *r.kv_budget < 1)
            fail("traces", where + ": sparse record requires kv_budget >= 1");
    }
}

}  // namespace

TraceSet TraceSet::from_records(std::vector<SampleRecord> records, const std::string& origin) {
    TraceSet ts;
    for (const auto& r : records) {
        validate_record(r, origin);
        ts.groups_[{r.task_id, ConfigKey::of(r)}].push_back(r);
    }
    for (auto& [key, group] : ts.groups_) {
        std::sort(group.begin(), group.end(),
                  [](const SampleRecord& a, const SampleRecord& b) { return a.sample_id < b.sample_id; });
        for (std::size_t i = 1; i < group.size(); ++i)
            if (group[i].sample_id == group[i - 1].sample_id)
                fail("traces", origin + ": duplicate sample_id " + std::to_string(group[i].sample_id) +
                                   " in task '" + key.task_id + "' config (" + key.config.model + ", " +
                                   cost::variant_name(key.config.attn) + ")");
    }
    return ts;
}

const std::vector<SampleRecord>& TraceSet::group(const GroupKey& key) const {
    auto it = groups_.find(key);
    if (it == groups_.end())
        fail("traces", "no trace group for task '" + key.task_id + "' model '" + key.config.model +
                           "' attn " + cost::variant_name(key.config.attn) +
                           (key.config.kv_budget ? " B=" + std::to_string(*key.config.kv_budget) : " (dense)") +
                           " n=" + std::to_string(key.config.max_new_tokens));
    return it->second;
}

std::vector<std::string> TraceSet::tasks() const {
    std::set<std::string> s;
    for (const auto& [key, _] : groups_) s.insert(key.task_id);
    return {s.begin(), s.end()};
}

std::vector<std::string> TraceSet::models() const {
    std::set<std::string> s;
    for (const auto& [key, _] : groups_) s.insert(key.config.model);
    return {s.begin(), s.end()};
}

namespace {

SampleRecord parse_line(const json& j, const std::string& where, bool strict) {
    static const std::set<std::string> known = {"task_id", "model",     "attn",    "kv_budget",
                                                "max_new_tokens", "sample_id", "gen_len", "correct"};
    if (!j.is_object()) fail("traces", where + ": record is not a JSON object");
    if (strict) {
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!known.count(it.key())) fail("traces", where + ": unknown field '" + it.key() + "'");
    }
    for (const auto& field : known)
        if (!j.contains(field)) fail("traces", where + ": missing field '" + field + "'");

    try {
        SampleRecord r;
        r.task_id = j.at("task_id").get<std::string>();
        r.model = j.at("model").get<std::string>();
        r.attn = cost::variant_from_name(j.at("attn").get<std::string>());
        if (!j.at("kv_budget").is_null()) r.kv_budget = j.at("kv_budget").get<std::int64_t>();
        r.max_new_tokens = j.at("max_new_tokens").get<std::int64_t>();
        r.sample_id = j.at("sample_id").get<std::int64_t>();
        r.gen_len = j.at("gen_len").get<std::int64_t>();
        r.correct = j.at("correct").get<bool>();
        return r;
    } catch (const json::exception& e) {
        fail("traces", where + ": " + e.what());
    }
}

}  // namespace

TraceSet ingest_stream(std::istream& in, const std::string& origin, bool strict) {
    std::vector<SampleRecord> records;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            fail("traces", where + ": malformed JSON: " + e.what());
        }
        SampleRecord r = parse_line(j, where, strict);
        validate_record(r, where);
        records.push_back(std::move(r));
    }
    return TraceSet::from_records(std::move(records), origin);
}

TraceSet ingest(const std::string& path, bool strict) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("traces", "cannot open trace file '" + path + "'");
    return ingest_stream(in, path, strict);
}

void serialize(const TraceSet& ts, std::ostream& out) {
    for (const auto& [key, group] : ts.groups()) {
        for (const auto& r : group) {
            json j;
            j["task_id"] = r.task_id;
            j["model"] = r.model;
            j["attn"] = cost::variant_name(r.attn);
            if (r.kv_budget)
                j["kv_budget"] = *r.kv_budget;
            else
                j["kv_budget"] = nullptr;
            j["max_new_tokens"] = r.max_new_tokens;
            j["sample_id"] = r.sample_id;
            j["gen_len"] = r.gen_len;
            j["correct"] = r.correct;
            out << j.dump() << '\n';
        }
    }
}

cost::GenLenStats length_moments(const TraceSet& ts, const GroupKey& key) {
    const auto& group = ts.group(key);
    cost::GenLenStats stats;
    stats.count = static_cast<double>(group.size());
    double sum = 0.0, sumsq = 0.0;
    for (const auto& r : group) {
        const double len = static_cast<double>(r.gen_len);
        sum += len;
        sumsq += len * len;
    }
    stats.mean = sum / stats.count;
    stats.second_moment = sumsq / stats.count;
    return stats;
}

std::int64_t correct_count(const TraceSet& ts, const GroupKey& key) {
    const auto& group = ts.group(key);
    std::int64_t c = 0;
    for (const auto& r : group) c += r.correct ? 1 : 0;
    return c;
}

double pass_at_k(std::int64_t s, std::int64_t c, std::int64_t k) {
    if (s < 1) fail("traces", "pass_at_k: need sample count >= 1");
    if (c < 0 || c > s) fail("traces", "pass_at_k: correct count out of range");
    if (k < 1 || k > s) fail("traces", "pass_at_k: K out of range (1 <= K <= S)");
    if (c == 0) return 0.0;
    if (s - c < k) return 1.0;
    // 1 - prod_{i=0}^{K-1} (S-c-i)/(S-i)
    double miss = 1.0;
    for (std::int64_t i = 0; i < k; ++i)
        miss *= static_cast<double>(s - c - i) / static_cast<double>(s - i);
    return 1.0 - miss;
}

std::vector<SolveRateRow> solve_rate_table(const TraceSet& ts,
                                           const std::vector<std::int64_t>& k_values) {
    // Validate up front so failures report every offending group, not the first.
    std::string bad;
    for (const auto& [key, group] : ts.groups()) {
        for (std::int64_t k : k_values) {
            if (k > static_cast<std::int64_t>(group.size())) {
                bad += (bad.empty() ? "" : "; ") + std::string("task '") + key.task_id + "' model '" +
                       key.config.model + "' has S=" + std::to_string(group.size()) +
                       " < K=" + std::to_string(k);
                break;
            }
        }
    }
    if (!bad.empty()) fail("traces", "solve_rate_table: " + bad);

    std::vector<SolveRateRow> rows;
    for (const auto& [key, group] : ts.groups()) {
        const auto s = static_cast<std::int64_t>(group.size());
        const std::int64_t c = correct_count(ts, key);
        for (std::int64_t k : k_values) {
            SolveRateRow row;
            row.key = key;
            row.k = k;
            row.samples = s;
            row.correct = c;
            row.pass = pass_at_k(s, c, k);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace ttscale::traces
