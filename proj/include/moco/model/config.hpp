#pragma once

#include "moco/util/error.hpp"

namespace moco::model {

// Network width/depth knobs. Defaults are the desk-scale configuration; all
// invariants are checked by validate().
struct ModelConfig {
    int embed_dim = 32;   // d; must be divisible by n_heads
    int n_layers = 2;     // encoder layers
    int n_heads = 4;
    int n_experts = 4;    // feed-forward experts (one identity expert is
                          // always appended)
    int topk = 2;         // experts kept per routing decision, <= n_experts+1
    double clip = 50.0;   // compatibility logit clip
    int ff_hidden = 0;    // 0 means 4 * embed_dim

    int resolved_ff() const { return ff_hidden > 0 ? ff_hidden : 4 * embed_dim; }

    void validate() const {
        if (embed_dim <= 0) throw DataError("embed_dim must be positive");
        if (n_layers <= 0) throw DataError("n_layers must be positive");
        if (n_heads <= 0) throw DataError("n_heads must be positive");
        if (embed_dim % n_heads != 0)
            throw DataError("embed_dim must be divisible by n_heads");
        if (n_experts <= 0) throw DataError("n_experts must be positive");
        if (topk <= 0 || topk > n_experts + 1)
            throw DataError("topk must lie in [1, n_experts + 1]");
        if (clip <= 0.0) throw DataError("clip must be positive");
        if (ff_hidden < 0) throw DataError("ff_hidden must be non-negative");
    }
};

}  // namespace moco::model
