#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dtcn/gradcheck.hpp"
#include "dtcn/model.hpp"
#include "dtcn/synthetic.hpp"
#include "dtcn/train.hpp"

#include <cmath>
#include <random>

using namespace dtcn;

namespace {

ModelConfig micro_config() {
    ModelConfig cfg;
    cfg.dim_visual = 6;
    cfg.hidden_wide = 8;
    cfg.hidden_narrow = 4;
    cfg.context_hidden = 8;
    cfg.head_hidden = 6;
    cfg.dropout_rate = 0.0;
    return cfg;
}

UserPostSequence tiny_sequence(std::size_t n, std::size_t dim_visual,
                               std::uint64_t seed) {
    SyntheticConfig gen;
    gen.n_records = n;
    gen.n_users = 3;
    gen.dim_visual = dim_visual;
    return generate_synthetic(gen, seed).sequence;
}

}  // namespace

TEST_CASE("parameter registry shapes at paper defaults") {
    const DtcnModel model(ModelConfig{}, 1);
    std::size_t total = 0;
    for (const auto& [name, tensor] : model.state()) total += tensor.size();
    // Two-stream FNN: (5+32)*256 + 2*256 + 2*(256*32 + 32) + 2*(32*32 + 32),
    // two LSTMs, two popularity injectors, head 192->32->1.
    const std::size_t ffn = (5 + 32) * 256 + 2 * 256 + 2 * (256 * 32 + 32) +
                            2 * (32 * 32 + 32);
    const std::size_t lstm = 2 * ((64 + 64) * 256 + 256);
    const std::size_t pop = 2 * 64;
    const std::size_t head = 192 * 32 + 32 + 32 * 1 + 1;
    CHECK(total == ffn + lstm + pop + head);
    CHECK(model.joint_dim() == 64);
    CHECK(model.parameters().size() == model.parameter_names().size());
}

TEST_CASE("state round trip restores every parameter") {
    DtcnModel a(micro_config(), 3);
    DtcnModel b(micro_config(), 4);
    // Different seeds give different parameters.
    bool any_diff = false;
    const auto sa = a.state();
    const auto sb = b.state();
    for (std::size_t i = 0; i < sa.size(); ++i) {
        for (std::size_t k = 0; k < sa[i].second.size(); ++k) {
            if (sa[i].second[k] != sb[i].second[k]) any_diff = true;
        }
    }
    CHECK(any_diff);
    b.load_state(sa);
    const auto sb2 = b.state();
    for (std::size_t i = 0; i < sa.size(); ++i) {
        CHECK(sa[i].first == sb2[i].first);
        for (std::size_t k = 0; k < sa[i].second.size(); ++k) {
            CHECK(sa[i].second[k] == sb2[i].second[k]);
        }
    }
    NamedTensors truncated(sa.begin(), sa.end() - 1);
    CHECK_THROWS_AS(b.load_state(truncated), std::runtime_error);
}

TEST_CASE("embed_pair output shapes and eval determinism") {
    const auto cfg = micro_config();
    const DtcnModel model(cfg, 7);
    std::mt19937_64 rng(1);
    std::vector<double> user{0.1, -0.2, 0.3, 0.0, 1.0};
    std::vector<double> visual(cfg.dim_visual, 0.25);
    Tape tape(false);
    const auto pair = embed_pair(tape, model, user, visual, false, rng);
    CHECK(pair.joint->value.size() == 2 * cfg.hidden_narrow);
    CHECK(pair.user_part->value.size() == cfg.hidden_narrow);
    CHECK(pair.photo_part->value.size() == cfg.hidden_narrow);
    // Joint = concat(user_part, photo_part).
    for (std::size_t i = 0; i < cfg.hidden_narrow; ++i) {
        CHECK(pair.joint->value[i] == pair.user_part->value[i]);
        CHECK(pair.joint->value[cfg.hidden_narrow + i] == pair.photo_part->value[i]);
    }
    // tanh output stays in (-1, 1).
    for (std::size_t i = 0; i < pair.joint->value.size(); ++i) {
        CHECK(std::abs(pair.joint->value[i]) < 1.0);
    }
    // Same inputs, eval mode: identical output.
    Tape tape2(false);
    std::mt19937_64 rng2(999);
    const auto pair2 = embed_pair(tape2, model, user, visual, false, rng2);
    for (std::size_t i = 0; i < pair.joint->value.size(); ++i) {
        CHECK(pair.joint->value[i] == pair2.joint->value[i]);
    }
}

TEST_CASE("embed_records matches embed_pair row by row (no dropout)") {
    const auto cfg = micro_config();
    const DtcnModel model(cfg, 5);
    const auto seq = tiny_sequence(6, cfg.dim_visual, 2);
    std::vector<const PostRecord*> recs;
    for (const auto& r : seq.records) recs.push_back(&r);
    std::mt19937_64 rng(0);
    Tape tape(false);
    const auto batch = embed_records(tape, model, recs, false, rng);
    REQUIRE(batch.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        Tape t2(false);
        std::mt19937_64 r2(0);
        const auto one = embed_pair(t2, model, recs[i]->user_features,
                                    recs[i]->visual_features, false, r2);
        for (std::size_t k = 0; k < one.joint->value.size(); ++k) {
            CHECK(batch[i].joint->value[k] ==
                  doctest::Approx(one.joint->value[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("embedding_loss kinds") {
    const auto cfg = micro_config();
    const DtcnModel model(cfg, 9);
    std::mt19937_64 rng(3);
    Tape tape;
    std::vector<double> user{1.0, 0.0, 0.0, 0.5, -0.5};
    std::vector<double> visual(cfg.dim_visual, -0.1);
    const auto pair = embed_pair(tape, model, user, visual, false, rng);

    const auto sm = embedding_loss(tape, pair, EmbeddingLossKind::SoftmaxAlign);
    CHECK(sm->value.size() == 1);
    CHECK(sm->value[0] >= 0.0);

    const auto da = embedding_loss(tape, pair, EmbeddingLossKind::DirectAlign);
    CHECK(da->value[0] >= 0.0);

    const auto none = embedding_loss(tape, pair, EmbeddingLossKind::None);
    CHECK(none->value[0] == 0.0);

    // Identical streams give zero loss for both alignment kinds.
    EmbeddedPair same{pair.joint, pair.user_part, pair.user_part};
    CHECK(embedding_loss(tape, same, EmbeddingLossKind::SoftmaxAlign)->value[0] ==
          doctest::Approx(0.0));
    CHECK(embedding_loss(tape, same, EmbeddingLossKind::DirectAlign)->value[0] ==
          doctest::Approx(0.0));
}

TEST_CASE("temporal_attention weight behavior") {
    Tape tape;
    auto h1 = make_param(Tensor::from_vector({1.0, 0.0}));
    auto h2 = make_param(Tensor::from_vector({0.0, 1.0}));
    const MultiScaleTimeVector target{30, 2, 3, 2};
    const MultiScaleTimeVector near = target;            // identical time
    const MultiScaleTimeVector far{0, 5, 0, 4};          // dissimilar

    const auto res = temporal_attention(tape, target, {near, far}, {h1, h2}, 1e-3);
    REQUIRE(res.weights.size() == 2);
    CHECK(res.weights[0] + res.weights[1] == doctest::Approx(1.0));
    CHECK(res.weights[0] > res.weights[1]);  // closer time wins
    // The clamped identical vector gets 1/e = 1000; the far one underflows
    // to essentially zero weight after the softmax.
    CHECK(res.weights[1] >= 0.0);
    // Identical time vector hits the eps clamp: e = eps.
    CHECK(res.scores[0] == doctest::Approx(1e-3));
    // Context vector is the weighted mix of hidden states.
    CHECK(res.context_vector->value[0] == doctest::Approx(res.weights[0]));
    CHECK(res.context_vector->value[1] == doctest::Approx(res.weights[1]));
}

TEST_CASE("temporal_attention scores match a direct cosine computation") {
    Tape tape;
    auto h = make_param(Tensor::from_vector({1.0}));
    const MultiScaleTimeVector target{10, 1, 2, 3};
    const MultiScaleTimeVector other{45, 4, 0, 1};
    const auto res = temporal_attention(tape, target, {other}, {h}, 1e-3);
    const auto a = normalized_time_vector(target);
    const auto b = normalized_time_vector(other);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int i = 0; i < 4; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double want = 1.0 - dot / std::sqrt(na * nb);
    CHECK(res.scores[0] == doctest::Approx(want).epsilon(1e-12));
    CHECK(res.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("temporal_attention zero-norm time vector falls back to e = 1") {
    Tape tape;
    auto h1 = make_param(Tensor::from_vector({1.0}));
    auto h2 = make_param(Tensor::from_vector({2.0}));
    const MultiScaleTimeVector zero{0, 0, 0, 0};
    const MultiScaleTimeVector target{30, 2, 3, 2};
    const auto res = temporal_attention(tape, target, {zero, zero}, {h1, h2}, 1e-3);
    CHECK(res.scores[0] == doctest::Approx(1.0));
    CHECK(res.weights[0] == doctest::Approx(0.5));
}

TEST_CASE("dtcn_forward: shapes, determinism, empty contexts") {
    const auto cfg = micro_config();
    const DtcnModel model(cfg, 11);
    const auto seq = tiny_sequence(40, cfg.dim_visual, 6);
    const auto ntc = parse_context_spec("NTC:1P:1D");
    const auto ptc = parse_context_spec("PTC:1P:1W");
    std::mt19937_64 rng(1);

    Tape tape(false);
    const auto out = dtcn_forward(tape, model, seq, 30, std::optional(ntc),
                                  std::optional(ptc), false, rng);
    CHECK(out.prediction->value.size() == 1);
    CHECK(std::isfinite(out.prediction->value[0]));

    // Deterministic in eval mode.
    Tape tape2(false);
    std::mt19937_64 rng2(555);
    const auto out2 = dtcn_forward(tape2, model, seq, 30, std::optional(ntc),
                                   std::optional(ptc), false, rng2);
    CHECK(out.prediction->value[0] == out2.prediction->value[0]);

    // First record: both contexts empty, still a finite prediction.
    Tape tape3(false);
    const auto out3 = dtcn_forward(tape3, model, seq, 0, std::optional(ntc),
                                   std::optional(ptc), false, rng);
    CHECK(out3.ntc_items == 0);
    CHECK(out3.ptc_items == 0);
    CHECK(std::isfinite(out3.prediction->value[0]));

    // Ablation: null context pointers behave like empty streams.
    Tape tape4(false);
    const auto out4 = dtcn_forward(tape4, model, seq, 30, nullptr, nullptr,
                                   false, rng);
    CHECK(std::isfinite(out4.prediction->value[0]));
}

TEST_CASE("dtcn_forward end-to-end gradient check on a micro model") {
    auto cfg = micro_config();
    cfg.context_popularity_input = true;
    DtcnModel model(cfg, 13);
    const auto seq = tiny_sequence(25, cfg.dim_visual, 8);
    const auto ntc = parse_context_spec("NTC:1P:1D");
    const auto ptc = parse_context_spec("PTC:1P:1W");
    const TemporalContext nctx = build_context(seq, 20, ntc);
    const TemporalContext pctx = build_context(seq, 20, ptc);
    const double truth = seq.popularity(20);
    auto build = [&](Tape& tape) {
        std::mt19937_64 rng(0);
        const auto out = dtcn_forward(tape, model, seq, 20, &nctx, &pctx,
                                      /*training=*/false, rng);
        auto err = tape.mean_squared_error(out.prediction,
                                           tape.constant(Tensor::scalar(truth)));
        auto emb = embedding_loss(tape, out.target_embedding,
                                  cfg.embedding_loss_kind);
        return tape.add(err, tape.scale(emb, 0.1));
    };
    GradCheckOptions opt;
    opt.max_entries_per_param = 6;
    opt.sample_seed = 42;
    const auto result = check_gradients(model.parameters(),
                                        model.parameter_names(), build, opt);
    INFO("worst ", result.worst_param, "[", result.worst_entry, "] analytic ",
         result.worst_analytic, " numeric ", result.worst_numeric, " rel ",
         result.max_rel_error);
    CHECK(result.ok);
}

TEST_CASE("shared context LSTM halves the recurrent parameters") {
    auto cfg = micro_config();
    cfg.share_context_lstm = true;
    const DtcnModel shared(cfg, 1);
    cfg.share_context_lstm = false;
    const DtcnModel split(cfg, 1);
    CHECK(shared.parameters().size() < split.parameters().size());
    CHECK(&shared.ptc_lstm() == &shared.ntc_lstm());
}

TEST_CASE("context popularity injection feeds observed history in") {
    auto cfg = micro_config();
    auto seq = tiny_sequence(30, cfg.dim_visual, 14);
    const auto ntc = parse_context_spec("NTC:1P:1D");
    const std::size_t target = 25;
    const auto ctx = build_context(seq, target, ntc);
    REQUIRE(!ctx.items.empty());
    // Perturb one context member's observed popularity only.
    auto perturbed = seq;
    perturbed.records[ctx.items.front().record_index].view_count *= 4;

    auto predict_one = [&](const DtcnModel& m, const UserPostSequence& s) {
        Tape tape(false);
        std::mt19937_64 rng(1);
        return dtcn_forward(tape, m, s, target, std::optional(ntc), std::nullopt,
                            false, rng).prediction->value[0];
    };

    cfg.context_popularity_input = true;
    const DtcnModel with(cfg, 21);
    CHECK(predict_one(with, seq) != predict_one(with, perturbed));

    // With injection off the context contributes features only, so a changed
    // view count is invisible.
    cfg.context_popularity_input = false;
    const DtcnModel without(cfg, 22);
    CHECK(predict_one(without, seq) == predict_one(without, perturbed));
}

TEST_CASE("training reduces the loss on a small stream") {
    auto cfg = micro_config();
    DtcnModel model(cfg, 31);
    const auto seq = tiny_sequence(60, cfg.dim_visual, 17);
    std::vector<std::size_t> targets;
    for (std::size_t i = 5; i < seq.size(); ++i) targets.push_back(i);
    TrainConfig tc;
    tc.epochs = 15;
    tc.batch_size = 16;
    tc.early_stop_patience = 100;
    tc.restore_best = false;
    RmspropState opt;
    const auto result = train(model, seq, targets,
                              std::optional(parse_context_spec("NTC:1P:1D")),
                              std::optional(parse_context_spec("PTC:1P:1W")), opt, tc);
    REQUIRE(result.epoch_loss.size() == 15);
    CHECK(result.epoch_loss.back() < result.epoch_loss.front());
    CHECK(result.best_loss <= result.epoch_loss.front());
    for (double loss : result.epoch_loss) CHECK(std::isfinite(loss));
}

TEST_CASE("predict preserves target order and carries truths") {
    auto cfg = micro_config();
    const DtcnModel model(cfg, 41);
    const auto seq = tiny_sequence(30, cfg.dim_visual, 19);
    const std::vector<std::size_t> targets{28, 5, 17};
    const auto preds = predict(model, seq, targets,
                               std::optional(parse_context_spec("NTC:1P:1D")),
                               std::nullopt);
    REQUIRE(preds.size() == 3);
    CHECK(preds[0].post_id == seq.records[28].post_id);
    CHECK(preds[1].post_id == seq.records[5].post_id);
    CHECK(preds[0].truth == doctest::Approx(seq.popularity(28)));
    for (const auto& p : preds) CHECK(std::isfinite(p.predicted));
}

TEST_CASE("evaluate_rounds produces one metric row per round") {
    auto cfg = micro_config();
    SyntheticConfig gen;
    gen.n_records = 70;
    gen.n_users = 3;
    gen.dim_visual = cfg.dim_visual;
    const auto seq = generate_synthetic(gen, 23).sequence;
    ProtocolConfig pc;
    pc.parts = 14;
    pc.window = 10;
    pc.model = cfg;
    pc.train.epochs = 2;
    pc.train.batch_size = 16;
    const auto report = evaluate_rounds(
        seq, std::optional(parse_context_spec("NTC:1P:1D")),
        std::optional(parse_context_spec("PTC:1P:1W")), pc);
    REQUIRE(report.per_round.size() == 5);
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(report.per_round[k].round_index == static_cast<int>(k) + 1);
        CHECK(report.per_round[k].n_test == 5);  // 70 records / 14 parts
        CHECK(std::isfinite(report.per_round[k].mae));
    }
}
