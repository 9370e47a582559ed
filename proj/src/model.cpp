#include "dtcn/model.hpp"

#include <cmath>
#include <stdexcept>

namespace dtcn {

namespace {

Tensor glorot(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> uni(-limit, limit);
    Tensor t(rows, cols);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = uni(rng);
    return t;
}

}  // namespace

Var DtcnModel::add_param(const std::string& name, Tensor t) {
    Var p = make_param(std::move(t));
    param_list_.push_back(p);
    param_names_.push_back(name);
    return p;
}

DtcnModel::DtcnModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
    std::mt19937_64 rng(seed);
    const std::size_t wide = config.hidden_wide;
    const std::size_t narrow = config.hidden_narrow;
    auto make_ffn = [&](const std::string& prefix, std::size_t in_dim) {
        Ffn f;
        f.w1 = add_param(prefix + ".w1", glorot(in_dim, wide, rng));
        f.b1 = add_param(prefix + ".b1", Tensor(wide));
        f.w2 = add_param(prefix + ".w2", glorot(wide, narrow, rng));
        f.b2 = add_param(prefix + ".b2", Tensor(narrow));
        f.w3 = add_param(prefix + ".w3", glorot(narrow, narrow, rng));
        f.b3 = add_param(prefix + ".b3", Tensor(narrow));
        return f;
    };
    user_stream_ = make_ffn("user", 5);
    photo_stream_ = make_ffn("photo", config.dim_visual);

    const std::size_t joint = 2 * narrow;
    const std::size_t hidden = config.context_hidden;
    auto register_lstm = [&](const std::string& prefix, LstmParams& p) {
        p = init_lstm(joint, hidden, rng);
        param_list_.push_back(p.weights);
        param_names_.push_back(prefix + ".weights");
        param_list_.push_back(p.bias);
        param_names_.push_back(prefix + ".bias");
    };
    register_lstm("ntc_lstm", ntc_lstm_);
    if (!config.share_context_lstm) register_lstm("ptc_lstm", ptc_lstm_);

    if (config.context_popularity_input) {
        std::uniform_real_distribution<double> uni(-0.1, 0.1);
        Tensor np(joint), pp(joint);
        for (std::size_t i = 0; i < joint; ++i) np[i] = uni(rng);
        for (std::size_t i = 0; i < joint; ++i) pp[i] = uni(rng);
        ntc_pop_ = add_param("ntc_popularity_in", std::move(np));
        ptc_pop_ = add_param("ptc_popularity_in", std::move(pp));
    }

    const std::size_t head_in = joint + 2 * hidden;
    head_w1_ = add_param("head.w1", glorot(head_in, config.head_hidden, rng));
    head_b1_ = add_param("head.b1", Tensor(config.head_hidden));
    head_w2_ = add_param("head.w2", glorot(config.head_hidden, 1, rng));
    head_b2_ = add_param("head.b2", Tensor(std::size_t{1}));
}

void DtcnModel::zero_grad() {
    for (auto& p : param_list_) p->grad.fill(0.0);
}

NamedTensors DtcnModel::state() const {
    NamedTensors entries;
    entries.reserve(param_list_.size());
    for (std::size_t i = 0; i < param_list_.size(); ++i) {
        entries.emplace_back(param_names_[i], param_list_[i]->value);
    }
    return entries;
}

void DtcnModel::load_state(const NamedTensors& entries) {
    if (entries.size() != param_list_.size()) {
        throw std::runtime_error("load_state: parameter count mismatch");
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].first != param_names_[i] ||
            !entries[i].second.same_shape(param_list_[i]->value)) {
            throw std::runtime_error("load_state: mismatch at '" + entries[i].first + "'");
        }
        param_list_[i]->value = entries[i].second;
    }
}

std::vector<EmbeddedPair> embed_records(Tape& tape, const DtcnModel& model,
                                        const std::vector<const PostRecord*>& records,
                                        bool training, std::mt19937_64& rng) {
    const auto& cfg = model.config();
    const std::size_t k = records.size();
    if (k == 0) return {};
    Tensor user_in(k, 5);
    Tensor photo_in(k, cfg.dim_visual);
    for (std::size_t i = 0; i < k; ++i) {
        const PostRecord& r = *records[i];
        if (r.user_features.size() != 5) {
            throw std::invalid_argument("embed: user_features must have length 5");
        }
        if (r.visual_features.size() != cfg.dim_visual) {
            throw std::invalid_argument("embed: visual_features length mismatch");
        }
        for (std::size_t j = 0; j < 5; ++j) user_in.at(i, j) = r.user_features[j];
        for (std::size_t j = 0; j < cfg.dim_visual; ++j)
            photo_in.at(i, j) = r.visual_features[j];
    }
    auto run_stream = [&](Tensor in, const DtcnModel::Ffn& f) {
        Var x = tape.constant(std::move(in));
        Var h1 = tape.tanh_(tape.add(tape.matmul(x, f.w1), f.b1));
        h1 = tape.dropout(h1, cfg.dropout_rate, training, rng);
        Var h2 = tape.tanh_(tape.add(tape.matmul(h1, f.w2), f.b2));
        h2 = tape.dropout(h2, cfg.dropout_rate, training, rng);
        return tape.tanh_(tape.add(tape.matmul(h2, f.w3), f.b3));
    };
    Var xu = run_stream(std::move(user_in), model.user_stream());
    Var xv = run_stream(std::move(photo_in), model.photo_stream());
    std::vector<EmbeddedPair> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        EmbeddedPair p;
        p.user_part = tape.row(xu, i);
        p.photo_part = tape.row(xv, i);
        p.joint = tape.concat({p.user_part, p.photo_part});
        out.push_back(std::move(p));
    }
    return out;
}

EmbeddedPair embed_pair(Tape& tape, const DtcnModel& model,
                        const std::vector<double>& user_features,
                        const std::vector<double>& visual_features, bool training,
                        std::mt19937_64& rng) {
    PostRecord rec;
    rec.user_features = user_features;
    rec.visual_features = visual_features;
    auto out = embed_records(tape, model, {&rec}, training, rng);
    return out.front();
}

Var embedding_loss(Tape& tape, const EmbeddedPair& pair, EmbeddingLossKind kind) {
    switch (kind) {
        case EmbeddingLossKind::None:
            return tape.constant(Tensor::scalar(0.0));
        case EmbeddingLossKind::DirectAlign: {
            Var d = tape.sub(pair.user_part, pair.photo_part);
            return tape.sum(tape.mul(d, d));
        }
        case EmbeddingLossKind::SoftmaxAlign: {
            Var d = tape.sub(tape.softmax(pair.user_part), tape.softmax(pair.photo_part));
            return tape.sum(tape.mul(d, d));
        }
    }
    throw std::invalid_argument("embedding_loss: unknown kind");
}

AttentionResult temporal_attention(Tape& tape, const MultiScaleTimeVector& target_tv,
                                   const std::vector<MultiScaleTimeVector>& context_tvs,
                                   const std::vector<Var>& hidden_states,
                                   double eps_clamp) {
    if (context_tvs.empty() || context_tvs.size() != hidden_states.size()) {
        throw std::invalid_argument("temporal_attention: need matching non-empty inputs");
    }
    if (eps_clamp <= 0.0) throw std::invalid_argument("temporal_attention: eps_clamp must be > 0");
    const std::array<double, 4> tgt = normalized_time_vector(target_tv);
    double tgt_norm = 0.0;
    for (double v : tgt) tgt_norm += v * v;
    tgt_norm = std::sqrt(tgt_norm);

    AttentionResult result;
    const std::size_t k = context_tvs.size();
    result.scores.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        const std::array<double, 4> tv = normalized_time_vector(context_tvs[j]);
        double dot = 0.0, norm = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            dot += tgt[i] * tv[i];
            norm += tv[i] * tv[i];
        }
        norm = std::sqrt(norm);
        double e;
        if (tgt_norm == 0.0 || norm == 0.0) {
            e = 1.0;  // orthogonal default for degenerate vectors
        } else {
            e = 1.0 - dot / (tgt_norm * norm);
        }
        result.scores[j] = std::max(e, eps_clamp);
    }

    // softmax over 1/e with max-subtraction
    double mx = 1.0 / result.scores[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, 1.0 / result.scores[j]);
    result.weights.resize(k);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        result.weights[j] = std::exp(1.0 / result.scores[j] - mx);
        sum += result.weights[j];
    }
    for (double& w : result.weights) w /= sum;

    result.context_vector = tape.weighted_sum(hidden_states, result.weights);
    return result;
}

namespace {

// Embed the context items, run the stream LSTM over them in time order and
// summarize the hidden states with temporal attention.
Var context_stream(Tape& tape, const DtcnModel& model, const UserPostSequence& seq,
                   const TemporalContext& ctx, const MultiScaleTimeVector& target_tv,
                   const LstmParams& lstm, const Var& pop_in, bool training,
                   std::mt19937_64& rng) {
    const auto& cfg = model.config();
    std::vector<const PostRecord*> records;
    records.reserve(ctx.items.size());
    for (const auto& item : ctx.items) records.push_back(&seq.records[item.record_index]);
    std::vector<EmbeddedPair> embedded = embed_records(tape, model, records, training, rng);

    Var h = tape.constant(Tensor(cfg.context_hidden));
    Var c = tape.constant(Tensor(cfg.context_hidden));
    std::vector<Var> hidden;
    std::vector<MultiScaleTimeVector> tvs;
    hidden.reserve(ctx.items.size());
    tvs.reserve(ctx.items.size());
    for (std::size_t j = 0; j < ctx.items.size(); ++j) {
        Var x = embedded[j].joint;
        if (cfg.context_popularity_input) {
            const double s = seq.popularity(ctx.items[j].record_index);
            x = tape.add(x, tape.scale(pop_in, s));
        }
        LstmStep step = lstm_cell(tape, x, h, c, lstm, cfg.gate_activation,
                                  cfg.candidate_hard_sigmoid);
        h = step.h;
        c = step.c;
        hidden.push_back(h);
        tvs.push_back(ctx.items[j].time_vector);
    }
    return temporal_attention(tape, target_tv, tvs, hidden, cfg.attention_eps_clamp)
        .context_vector;
}

}  // namespace

ForwardResult dtcn_forward(Tape& tape, const DtcnModel& model,
                           const UserPostSequence& seq, std::size_t target,
                           const TemporalContext* ntc_ctx,
                           const TemporalContext* ptc_ctx, bool training,
                           std::mt19937_64& rng) {
    if (target >= seq.size()) throw std::out_of_range("dtcn_forward: bad target index");
    const auto& cfg = model.config();
    const PostRecord& rec = seq.records[target];
    const MultiScaleTimeVector target_tv = to_multiscale(rec.timestamp, seq.tz_offset_seconds);

    ForwardResult result;
    result.target_embedding =
        embed_records(tape, model, {&rec}, training, rng).front();

    Var c_ntc = tape.constant(Tensor(cfg.context_hidden));
    if (ntc_ctx != nullptr && !ntc_ctx->items.empty()) {
        c_ntc = context_stream(tape, model, seq, *ntc_ctx, target_tv, model.ntc_lstm(),
                               model.ntc_popularity_in(), training, rng);
        result.ntc_items = ntc_ctx->items.size();
    }
    Var c_ptc = tape.constant(Tensor(cfg.context_hidden));
    if (ptc_ctx != nullptr && !ptc_ctx->items.empty()) {
        c_ptc = context_stream(tape, model, seq, *ptc_ctx, target_tv, model.ptc_lstm(),
                               model.ptc_popularity_in(), training, rng);
        result.ptc_items = ptc_ctx->items.size();
    }

    Var fused = tape.concat({result.target_embedding.joint, c_ntc, c_ptc});
    Var hidden = tape.tanh_(tape.add(tape.matmul(fused, model.head_w1()), model.head_b1()));
    result.prediction = tape.add(tape.matmul(hidden, model.head_w2()), model.head_b2());
    return result;
}

ForwardResult dtcn_forward(Tape& tape, const DtcnModel& model,
                           const UserPostSequence& seq, std::size_t target,
                           const std::optional<ContextSpec>& ntc_spec,
                           const std::optional<ContextSpec>& ptc_spec, bool training,
                           std::mt19937_64& rng) {
    std::optional<TemporalContext> ntc_ctx, ptc_ctx;
    if (ntc_spec) ntc_ctx = build_context(seq, target, *ntc_spec);
    if (ptc_spec) ptc_ctx = build_context(seq, target, *ptc_spec);
    return dtcn_forward(tape, model, seq, target, ntc_ctx ? &*ntc_ctx : nullptr,
                        ptc_ctx ? &*ptc_ctx : nullptr, training, rng);
}

}  // namespace dtcn
