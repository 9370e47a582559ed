#include "dtcn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dtcn {

namespace {

struct PreparedContexts {
    std::vector<TemporalContext> ntc;
    std::vector<TemporalContext> ptc;
    bool has_ntc = false;
    bool has_ptc = false;

    const TemporalContext* ntc_for(std::size_t i) const {
        return has_ntc ? &ntc[i] : nullptr;
    }
    const TemporalContext* ptc_for(std::size_t i) const {
        return has_ptc ? &ptc[i] : nullptr;
    }
};

PreparedContexts prepare_contexts(const UserPostSequence& seq,
                                  const std::vector<std::size_t>& targets,
                                  const std::optional<ContextSpec>& ntc_spec,
                                  const std::optional<ContextSpec>& ptc_spec) {
    PreparedContexts out;
    out.has_ntc = ntc_spec.has_value();
    out.has_ptc = ptc_spec.has_value();
    if (out.has_ntc) out.ntc.reserve(targets.size());
    if (out.has_ptc) out.ptc.reserve(targets.size());
    for (std::size_t t : targets) {
        if (out.has_ntc) out.ntc.push_back(build_context(seq, t, *ntc_spec));
        if (out.has_ptc) out.ptc.push_back(build_context(seq, t, *ptc_spec));
    }
    return out;
}

}  // namespace

TrainResult train(DtcnModel& model, const UserPostSequence& seq,
                  const std::vector<std::size_t>& targets,
                  const std::optional<ContextSpec>& ntc_spec,
                  const std::optional<ContextSpec>& ptc_spec, RmspropState& optimizer,
                  const TrainConfig& config) {
    if (targets.empty()) throw std::invalid_argument("train: empty target set");
    if (config.batch_size <= 0 || config.epochs < 0) {
        throw std::invalid_argument("train: bad batch size or epoch count");
    }
    const PreparedContexts contexts = prepare_contexts(seq, targets, ntc_spec, ptc_spec);

    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(targets.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    result.best_loss = std::numeric_limits<double>::infinity();
    NamedTensors best_state;
    int stale_epochs = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t batch_start = 0; batch_start < order.size();
             batch_start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t batch_end =
                std::min(order.size(), batch_start + static_cast<std::size_t>(config.batch_size));
            const std::size_t bsz = batch_end - batch_start;

            Tape tape(true);
            Var total;
            for (std::size_t bi = batch_start; bi < batch_end; ++bi) {
                const std::size_t idx = order[bi];
                const std::size_t target = targets[idx];
                ForwardResult fwd =
                    dtcn_forward(tape, model, seq, target, contexts.ntc_for(idx),
                                 contexts.ptc_for(idx), /*training=*/true, rng);
                Var truth = tape.constant(Tensor::scalar(seq.popularity(target)));
                Var diff = tape.sub(fwd.prediction, truth);
                Var term = tape.mul(diff, diff);
                if (config.lambda_emb != 0.0) {
                    Var emb = embedding_loss(tape, fwd.target_embedding,
                                             model.config().embedding_loss_kind);
                    term = tape.add(term, tape.scale(emb, config.lambda_emb));
                }
                total = total ? tape.add(total, term) : term;
            }
            Var loss = tape.scale(total, 1.0 / static_cast<double>(bsz));
            const double loss_value = loss->value[0];
            if (!std::isfinite(loss_value)) {
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch + 1) + ", batch " +
                                         std::to_string(batch_start / config.batch_size + 1));
            }
            model.zero_grad();
            tape.backward(loss);
            clip_global_norm(model.parameters(), config.clip_norm);
            rmsprop_step(model.parameters(), optimizer);

            epoch_loss += loss_value * static_cast<double>(bsz);
            seen += bsz;
        }
        epoch_loss /= static_cast<double>(seen);
        result.epoch_loss.push_back(epoch_loss);
        result.epochs_run = epoch + 1;

        if (epoch_loss < result.best_loss) {
            result.best_loss = epoch_loss;
            stale_epochs = 0;
            if (config.restore_best) best_state = model.state();
        } else if (++stale_epochs >= config.early_stop_patience &&
                   config.early_stop_patience > 0) {
            break;
        }
    }
    if (config.restore_best && !best_state.empty()) model.load_state(best_state);
    return result;
}

std::vector<Prediction> predict(const DtcnModel& model, const UserPostSequence& seq,
                                const std::vector<std::size_t>& targets,
                                const std::optional<ContextSpec>& ntc_spec,
                                const std::optional<ContextSpec>& ptc_spec) {
    const PreparedContexts contexts = prepare_contexts(seq, targets, ntc_spec, ptc_spec);
    std::mt19937_64 rng(0);  // unused in eval mode
    std::vector<Prediction> out;
    out.reserve(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        Tape tape(false);
        ForwardResult fwd = dtcn_forward(tape, model, seq, targets[i], contexts.ntc_for(i),
                                         contexts.ptc_for(i), /*training=*/false, rng);
        Prediction p;
        p.post_id = seq.records[targets[i]].post_id;
        p.predicted = fwd.prediction->value[0];
        p.truth = seq.popularity(targets[i]);
        out.push_back(std::move(p));
    }
    return out;
}

EvaluationReport evaluate_rounds(const UserPostSequence& seq,
                                 const std::optional<ContextSpec>& ntc_spec,
                                 const std::optional<ContextSpec>& ptc_spec,
                                 const ProtocolConfig& config) {
    const std::vector<PartitionRound> rounds =
        moving_partition(seq, config.parts, config.window);
    std::vector<RoundMetrics> metrics;
    metrics.reserve(rounds.size());
    for (const auto& round : rounds) {
        // Protocol integrity: time-ordered split with a disjoint later test part.
        if (round.train_end != round.test_begin || round.test_begin >= round.test_end) {
            throw std::logic_error("evaluate_rounds: malformed partition round");
        }
        if (seq.records[round.test_begin].timestamp <
            seq.records[round.train_end - 1].timestamp) {
            throw std::logic_error("evaluate_rounds: test precedes training data");
        }

        std::vector<std::size_t> train_targets(round.train_end - round.train_begin);
        std::iota(train_targets.begin(), train_targets.end(), round.train_begin);
        std::vector<std::size_t> test_targets(round.test_end - round.test_begin);
        std::iota(test_targets.begin(), test_targets.end(), round.test_begin);

        DtcnModel model(config.model, config.model_seed);
        RmspropState opt = config.optimizer;
        train(model, seq, train_targets, ntc_spec, ptc_spec, opt, config.train);
        const auto preds = predict(model, seq, test_targets, ntc_spec, ptc_spec);

        std::vector<double> truth, pred;
        truth.reserve(preds.size());
        pred.reserve(preds.size());
        for (const auto& p : preds) {
            truth.push_back(p.truth);
            pred.push_back(p.predicted);
        }
        RoundMetrics m;
        m.round_index = round.round_index;
        m.src = spearman(truth, pred);
        m.mae = mae(truth, pred);
        m.n_test = preds.size();
        metrics.push_back(m);
    }
    return aggregate_rounds(std::move(metrics));
}

}  // namespace dtcn
