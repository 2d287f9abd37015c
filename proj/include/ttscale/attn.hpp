#pragma once

// Reference single-step decode attention for one GQA group, at desk scale.
//
// The group holds g query rows attending over n cached key/value rows of
// width d. Sparse variants restrict the softmax to a selected token set:
//   top-k       — the k highest pooled scores (scores averaged over the g
//                 query rows so the selection is shared across the group)
//   block top-k — scores against per-block mean-key representatives; the
//                 top k/block_size blocks are kept
//   local       — the trailing min(window, n) tokens
// Weights are renormalized over the selected tokens only; every non-selected
// weight is exactly zero. Softmax uses max-subtraction.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ttscale::attn {

enum class SparseKind { top_k, block_top_k, local };

struct AttnProblem {
    std::size_t group_heads = 1;  // g
    std::size_t context = 0;      // n
    std::size_t dim = 0;          // d
    std::vector<double> queries;  // g x d, row-major
    std::vector<double> keys;     // n x d
    std::vector<double> values;   // n x d
    double scale = 1.0;           // usually 1/sqrt(d)

    static AttnProblem make(std::size_t g, std::size_t n, std::size_t d);
    void validate() const;
};

struct SparseSpec {
    SparseKind kind = SparseKind::top_k;
    std::size_t kv_budget = 1;   // k, in tokens (top-k / block top-k)
    std::size_t block_size = 1;  // block top-k only; kv_budget must divide
    std::size_t window = 1;      // local only
};

struct AttnResult {
    std::vector<double> out;               // g x d
    std::vector<std::size_t> selected;     // kept token indices, ascending
    std::vector<std::size_t> selected_blocks;  // block top-k only, ascending
};

AttnResult dense_attention(const AttnProblem& p);
AttnResult topk_attention(const AttnProblem& p, const SparseSpec& spec);
AttnResult block_topk_attention(const AttnProblem& p, const SparseSpec& spec);
AttnResult local_attention(const AttnProblem& p, const SparseSpec& spec);

// Independent oracle: dense attention evaluated with non-kept scores forced
// to -inf (so kept weights renormalize among themselves).
AttnResult masked_dense_reference(const AttnProblem& p, const std::vector<std::size_t>& keep);

// Randomized equivalence suite used by the CLI self-check and the acceptance
// tests: masking-oracle equivalence for every sparse variant, top-k(k=n) vs
// dense, and block-top-k(block_size=1) vs top-k, over `instances` random
// problems (n <= 64, d <= 16, g <= 4).
struct SelfcheckReport {
    std::uint64_t seed = 0;
    int instances = 0;
    double max_rel_err = 0.0;
    int failures = 0;
    bool pass() const { return failures == 0; }
};
SelfcheckReport selfcheck(std::uint64_t seed, int instances, double tolerance = 1e-6);

}  // namespace ttscale::attn
