#include "ttscale/attn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ttscale/error.hpp"
#include "ttscale/simd.hpp"

namespace ttscale::attn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Per-row scores s[i] = q . k_i * scale for one query row.
void row_scores(const AttnProblem& p, std::size_t row, std::vector<double>& s) {
    const double* q = p.queries.data() + row * p.dim;
    s.resize(p.context);
    for (std::size_t i = 0; i < p.context; ++i)
        s[i] = simd::dot(q, p.keys.data() + i * p.dim, p.dim) * p.scale;
}

// Scores averaged over the group's query rows (shared selection).
std::vector<double> pooled_scores(const AttnProblem& p) {
    std::vector<double> pooled(p.context, 0.0);
    std::vector<double> s;
    for (std::size_t row = 0; row < p.group_heads; ++row) {
        row_scores(p, row, s);
        for (std::size_t i = 0; i < p.context; ++i) pooled[i] += s[i];
    }
    const double inv = 1.0 / static_cast<double>(p.group_heads);
    for (double& v : pooled) v *= inv;
    return pooled;
}

// Indices of the `count` largest scores; ties broken by lowest index.
std::vector<std::size_t> top_indices(const std::vector<double>& scores, std::size_t count) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;
                      });
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// Softmax over the kept indices of one row's scores, accumulated into out.
void attend_subset(const AttnProblem& p, std::size_t row, const std::vector<double>& scores,
                   const std::vector<std::size_t>& keep, double* out) {
    double mx = kNegInf;
    for (std::size_t i : keep) mx = std::max(mx, scores[i]);
    double denom = 0.0;
    std::vector<double> w(keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) {
        w[j] = std::exp(scores[keep[j]] - mx);
        denom += w[j];
    }
    (void)row;
    for (std::size_t j = 0; j < keep.size(); ++j)
        simd::axpy(w[j] / denom, p.values.data() + keep[j] * p.dim, out, p.dim);
}

AttnResult attend_all_rows(const AttnProblem& p, const std::vector<std::size_t>& keep) {
    AttnResult res;
    res.out.assign(p.group_heads * p.dim, 0.0);
    res.selected = keep;
    std::vector<double> s;
    for (std::size_t row = 0; row < p.group_heads; ++row) {
        row_scores(p, row, s);
        attend_subset(p, row, s, keep, res.out.data() + row * p.dim);
    }
    return res;
}

}  // namespace

AttnProblem AttnProblem::make(std::size_t g, std::size_t n, std::size_t d) {
    AttnProblem p;
    p.group_heads = g;
    p.context = n;
    p.dim = d;
    p.queries.assign(g * d, 0.0);
    p.keys.assign(n * d, 0.0);
    p.values.assign(n * d, 0.0);
    p.scale = 1.0 / std::sqrt(static_cast<double>(d));
    return p;
}

void AttnProblem::validate() const {
    if (group_heads < 1) fail("attn", "group_heads must be >= 1");
    if (context < 1) fail("attn", "context must be >= 1");
    if (dim < 1) fail("attn", "dim must be >= 1");
    if (queries.size() != group_heads * dim) fail("attn", "queries must be g x d");
    if (keys.size() != context * dim) fail("attn", "keys must be n x d");
    if (values.size() != context * dim) fail("attn", "values must be n x d");
    for (double v : queries)
        if (!std::isfinite(v)) fail("attn", "non-finite query entry");
    for (double v : keys)
        if (!std::isfinite(v)) fail("attn", "non-finite key entry");
    for (double v : values)
        if (!std::isfinite(v)) fail("attn", "non-finite value entry");
}

AttnResult dense_attention(const AttnProblem& p) {
    p.validate();
    std::vector<std::size_t> all(p.context);
    std::iota(all.begin(), all.end(), 0);
    return attend_all_rows(p, all);
}

AttnResult topk_attention(const AttnProblem& p, const SparseSpec& spec) {
    p.validate();
    if (spec.kv_budget < 1 || spec.kv_budget > p.context)
        fail("attn", "top-k budget must satisfy 1 <= k <= n");
    const std::vector<double> pooled = pooled_scores(p);
    return attend_all_rows(p, top_indices(pooled, spec.kv_budget));
}

AttnResult block_topk_attention(const AttnProblem& p, const SparseSpec& spec) {
    p.validate();
    if (spec.block_size < 1) fail("attn", "block_size must be >= 1");
    if (spec.kv_budget < 1 || spec.kv_budget > p.context)
        fail("attn", "block top-k budget must satisfy 1 <= k <= n");
    if (spec.kv_budget % spec.block_size != 0)
        fail("attn", "block top-k budget must be divisible by block_size");

    const std::size_t bs = spec.block_size;
    const std::size_t blocks = (p.context + bs - 1) / bs;
    const std::size_t want = std::min(spec.kv_budget / bs, blocks);

    // Mean key per block; the trailing partial block averages its actual members.
    std::vector<double> reps(blocks * p.dim, 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t begin = b * bs;
        const std::size_t end = std::min(begin + bs, p.context);
        double* rep = reps.data() + b * p.dim;
        for (std::size_t i = begin; i < end; ++i)
            simd::axpy(1.0, p.keys.data() + i * p.dim, rep, p.dim);
        const double inv = 1.0 / static_cast<double>(end - begin);
        for (std::size_t j = 0; j < p.dim; ++j) rep[j] *= inv;
    }

    // Block scores pooled over the group's query rows.
    std::vector<double> scores(blocks, 0.0);
    for (std::size_t row = 0; row < p.group_heads; ++row) {
        const double* q = p.queries.data() + row * p.dim;
        for (std::size_t b = 0; b < blocks; ++b)
            scores[b] += simd::dot(q, reps.data() + b * p.dim, p.dim) * p.scale;
    }
    const double inv = 1.0 / static_cast<double>(p.group_heads);
    for (double& v : scores) v *= inv;

    const std::vector<std::size_t> chosen = top_indices(scores, want);
    std::vector<std::size_t> keep;
    for (std::size_t b : chosen) {
        const std::size_t begin = b * bs;
        const std::size_t end = std::min(begin + bs, p.context);
        for (std::size_t i = begin; i < end; ++i) keep.push_back(i);
    }
    std::sort(keep.begin(), keep.end());

    AttnResult res = attend_all_rows(p, keep);
    res.selected_blocks = chosen;
    return res;
}

AttnResult local_attention(const AttnProblem& p, const SparseSpec& spec) {
    p.validate();
    if (spec.window < 1) fail("attn", "local window must be >= 1");
    const std::size_t w = std::min(spec.window, p.context);
    std::vector<std::size_t> keep(w);
    std::iota(keep.begin(), keep.end(), p.context - w);
    return attend_all_rows(p, keep);
}

AttnResult masked_dense_reference(const AttnProblem& p, const std::vector<std::size_t>& keep) {
    p.validate();
    if (keep.empty()) fail("attn", "masked reference needs a non-empty keep set");
    // Independent route: full per-row softmax with dropped scores at -inf.
    AttnResult res;
    res.out.assign(p.group_heads * p.dim, 0.0);
    res.selected = keep;
    std::vector<bool> kept(p.context, false);
    for (std::size_t i : keep) {
        if (i >= p.context) fail("attn", "keep index out of range");
        kept[i] = true;
    }
    std::vector<double> s;
    for (std::size_t row = 0; row < p.group_heads; ++row) {
        row_scores(p, row, s);
        for (std::size_t i = 0; i < p.context; ++i)
            if (!kept[i]) s[i] = kNegInf;
        double mx = *std::max_element(s.begin(), s.end());
        double denom = 0.0;
        std::vector<double> w(p.context, 0.0);
        for (std::size_t i = 0; i < p.context; ++i) {
            if (s[i] == kNegInf) continue;
            w[i] = std::exp(s[i] - mx);
            denom += w[i];
        }
        double* out = res.out.data() + row * p.dim;
        for (std::size_t i = 0; i < p.context; ++i)
            if (w[i] != 0.0) simd::axpy(w[i] / denom, p.values.data() + i * p.dim, out, p.dim);
    }
    return res;
}

namespace {

double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return den > 0.0 ? num / den : num;
}

}  // namespace

SelfcheckReport selfcheck(std::uint64_t seed, int instances, double tolerance) {
    SelfcheckReport report;
    report.seed = seed;
    report.instances = instances;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_n(1, 64), pick_d(1, 16), pick_g(1, 4);

    for (int it = 0; it < instances; ++it) {
        const std::size_t n = pick_n(rng), d = pick_d(rng), g = pick_g(rng);
        AttnProblem p = AttnProblem::make(g, n, d);
        for (double& v : p.queries) v = normal(rng);
        for (double& v : p.keys) v = normal(rng);
        for (double& v : p.values) v = normal(rng);

        auto check = [&](const AttnResult& got, const AttnResult& want) {
            const double e = rel_err(got.out, want.out);
            report.max_rel_err = std::max(report.max_rel_err, e);
            if (!(e <= tolerance)) ++report.failures;
        };

        const AttnResult dense = dense_attention(p);

        // top-k vs masking oracle; k = n must reproduce dense.
        std::uniform_int_distribution<std::size_t> pick_k(1, n);
        SparseSpec tk{SparseKind::top_k, pick_k(rng), 1, 1};
        const AttnResult topk = topk_attention(p, tk);
        check(topk, masked_dense_reference(p, topk.selected));
        SparseSpec full{SparseKind::top_k, n, 1, 1};
        check(topk_attention(p, full), dense);

        // block top-k vs masking oracle; block_size = 1 must match top-k.
        std::uniform_int_distribution<std::size_t> pick_bs(1, std::max<std::size_t>(1, n / 2));
        const std::size_t bs = pick_bs(rng);
        const std::size_t blocks = (n + bs - 1) / bs;
        std::uniform_int_distribution<std::size_t> pick_nb(1, blocks);
        SparseSpec bk{SparseKind::block_top_k, bs * pick_nb(rng), bs, 1};
        const AttnResult block = block_topk_attention(p, bk);
        check(block, masked_dense_reference(p, block.selected));
        if (block.selected.size() > bk.kv_budget) ++report.failures;

        SparseSpec b1{SparseKind::block_top_k, tk.kv_budget, 1, 1};
        const AttnResult block1 = block_topk_attention(p, b1);
        if (block1.selected != topk_attention(p, tk).selected) ++report.failures;
        check(block1, topk_attention(p, tk));

        // local vs masking oracle on the trailing window.
        SparseSpec loc{SparseKind::local, 1, 1, pick_k(rng)};
        const AttnResult local = local_attention(p, loc);
        check(local, masked_dense_reference(p, local.selected));
    }
    return report;
}

}  // namespace ttscale::attn
