// The network: two-stream joint embedding, per-context-type LSTM passes,
// multi-scale temporal attention and the regression head.
#pragma once

#include "dtcn/autodiff.hpp"
#include "dtcn/context.hpp"
#include "dtcn/dataset.hpp"
#include "dtcn/checkpoint.hpp"
#include "dtcn/lstm.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dtcn {

enum class EmbeddingLossKind { SoftmaxAlign, DirectAlign, None };

struct ModelConfig {
    std::size_t dim_visual = 32;
    std::size_t hidden_wide = 256;
    std::size_t hidden_narrow = 32;
    std::size_t context_hidden = 64;  // LSTM hidden size = joint embedding size
    std::size_t head_hidden = 32;
    double dropout_rate = 0.5;
    double attention_eps_clamp = 1e-3;
    GateActivation gate_activation = GateActivation::Sigmoid;
    bool candidate_hard_sigmoid = false;
    bool share_context_lstm = false;
    // Feed each context item's observed popularity into its LSTM input via a
    // learned per-stream injection vector. The context is historical data, so
    // its popularity is known at prediction time.
    bool context_popularity_input = true;
    EmbeddingLossKind embedding_loss_kind = EmbeddingLossKind::SoftmaxAlign;
};

class DtcnModel {
public:
    DtcnModel(const ModelConfig& config, std::uint64_t seed);

    const ModelConfig& config() const { return config_; }
    std::size_t joint_dim() const { return 2 * config_.hidden_narrow; }

    const std::vector<Var>& parameters() const { return param_list_; }
    const std::vector<std::string>& parameter_names() const { return param_names_; }
    void zero_grad();
    NamedTensors state() const;
    void load_state(const NamedTensors& entries);

    // Stream parameters (exposed for the forward pass).
    struct Ffn {
        Var w1, b1, w2, b2, w3, b3;
    };
    const Ffn& user_stream() const { return user_stream_; }
    const Ffn& photo_stream() const { return photo_stream_; }
    const LstmParams& ntc_lstm() const { return ntc_lstm_; }
    const LstmParams& ptc_lstm() const {
        return config_.share_context_lstm ? ntc_lstm_ : ptc_lstm_;
    }
    const Var& ntc_popularity_in() const { return ntc_pop_; }
    const Var& ptc_popularity_in() const { return ptc_pop_; }
    const Var& head_w1() const { return head_w1_; }
    const Var& head_b1() const { return head_b1_; }
    const Var& head_w2() const { return head_w2_; }
    const Var& head_b2() const { return head_b2_; }

private:
    Var add_param(const std::string& name, Tensor t);

    ModelConfig config_;
    Ffn user_stream_;
    Ffn photo_stream_;
    LstmParams ntc_lstm_;
    LstmParams ptc_lstm_;
    Var ntc_pop_, ptc_pop_;
    Var head_w1_, head_b1_, head_w2_, head_b2_;
    std::vector<Var> param_list_;
    std::vector<std::string> param_names_;
};

struct EmbeddedPair {
    Var joint;       // 64
    Var user_part;   // 32
    Var photo_part;  // 32
};

// Two-stream feed-forward embedding of one user/photo pair.
EmbeddedPair embed_pair(Tape& tape, const DtcnModel& model,
                        const std::vector<double>& user_features,
                        const std::vector<double>& visual_features, bool training,
                        std::mt19937_64& rng);

// Batched variant over several records (shared dropout masks per layer).
std::vector<EmbeddedPair> embed_records(Tape& tape, const DtcnModel& model,
                                        const std::vector<const PostRecord*>& records,
                                        bool training, std::mt19937_64& rng);

// Alignment loss between the two stream outputs of one pair.
Var embedding_loss(Tape& tape, const EmbeddedPair& pair, EmbeddingLossKind kind);

struct AttentionResult {
    std::vector<double> scores;   // clamped e_j
    std::vector<double> weights;  // alpha, positive, sums to 1
    Var context_vector;
};

// e_j = 1 - cos(t_target, t_j) on normalized time vectors, clamped below at
// eps_clamp; alpha = softmax of 1/e with max-subtraction; c = sum alpha_j h_j.
// Weights depend on time vectors only.
AttentionResult temporal_attention(Tape& tape, const MultiScaleTimeVector& target_tv,
                                   const std::vector<MultiScaleTimeVector>& context_tvs,
                                   const std::vector<Var>& hidden_states,
                                   double eps_clamp);

struct ForwardResult {
    Var prediction;  // scalar
    EmbeddedPair target_embedding;
    std::size_t ntc_items = 0;
    std::size_t ptc_items = 0;
};

// Full pass over prebuilt contexts (either may be null for ablations; an
// absent or empty stream contributes a zero context vector).
ForwardResult dtcn_forward(Tape& tape, const DtcnModel& model,
                           const UserPostSequence& seq, std::size_t target,
                           const TemporalContext* ntc_ctx,
                           const TemporalContext* ptc_ctx, bool training,
                           std::mt19937_64& rng);

// Convenience variant that builds the contexts itself. The streams are
// independent; the two specs may use different time units.
ForwardResult dtcn_forward(Tape& tape, const DtcnModel& model,
                           const UserPostSequence& seq, std::size_t target,
                           const std::optional<ContextSpec>& ntc_spec,
                           const std::optional<ContextSpec>& ptc_spec, bool training,
                           std::mt19937_64& rng);

}  // namespace dtcn
