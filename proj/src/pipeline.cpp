#include "dtcn/pipeline.hpp"

#include "dtcn/gradcheck.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dtcn {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("bad boolean value '" + v + "'");
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::trunc | std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << content;
    if (!os) throw std::runtime_error("write failure on " + path);
}

}  // namespace

bool apply_config_kv(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "data") c.data_path = value;
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "checkpoint") c.checkpoint_path = value;
    else if (key == "ntc" || key == "ntc_spec") c.ntc_spec = value;
    else if (key == "ptc" || key == "ptc_spec") c.ptc_spec = value;
    else if (key == "max_items") c.max_items = std::stoul(value);
    else if (key == "per_user_context") c.per_user_context = parse_bool(value);
    else if (key == "dropout_rate") c.dropout_rate = std::stod(value);
    else if (key == "attention_eps_clamp") c.attention_eps_clamp = std::stod(value);
    else if (key == "lambda_emb") c.lambda_emb = std::stod(value);
    else if (key == "hard_sigmoid_gates") c.hard_sigmoid_gates = parse_bool(value);
    else if (key == "candidate_hard_sigmoid") c.candidate_hard_sigmoid = parse_bool(value);
    else if (key == "share_context_lstm") c.share_context_lstm = parse_bool(value);
    else if (key == "context_popularity_input") c.context_popularity_input = parse_bool(value);
    else if (key == "embedding_loss") c.embedding_loss = value;
    else if (key == "learning_rate") c.learning_rate = std::stod(value);
    else if (key == "rmsprop_decay") c.rmsprop_decay = std::stod(value);
    else if (key == "rmsprop_epsilon") c.rmsprop_epsilon = std::stod(value);
    else if (key == "clip_norm") c.clip_norm = std::stod(value);
    else if (key == "epochs") c.epochs = std::stoi(value);
    else if (key == "batch_size") c.batch_size = std::stoi(value);
    else if (key == "early_stop_patience") c.early_stop_patience = std::stoi(value);
    else if (key == "parts") c.parts = std::stoi(value);
    else if (key == "window") c.window = std::stoi(value);
    else if (key == "seed") c.seed = std::stoull(value);
    else if (key == "gen.n_users") c.gen.n_users = std::stoi(value);
    else if (key == "gen.n_records") c.gen.n_records = std::stoi(value);
    else if (key == "gen.dim_visual") c.gen.dim_visual = std::stoul(value);
    else if (key == "gen.span_days") c.gen.span_days = std::stod(value);
    else if (key == "gen.start_epoch_seconds") c.gen.start_epoch_seconds = std::stoll(value);
    else if (key == "gen.base_amplitude") c.gen.base_amplitude = std::stod(value);
    else if (key == "gen.periodic_amplitude") c.gen.periodic_amplitude = std::stod(value);
    else if (key == "gen.trend_amplitude") c.gen.trend_amplitude = std::stod(value);
    else if (key == "gen.trend_tau_days") c.gen.trend_tau_days = std::stod(value);
    else if (key == "gen.noise_level") c.gen.noise_level = std::stod(value);
    else if (key == "gen.popularity_offset") c.gen.popularity_offset = std::stod(value);
    else if (key == "gen.feature_noise") c.gen.feature_noise = std::stod(value);
    else if (key == "gen.latent_dim") c.gen.latent_dim = std::stoi(value);
    else return false;
    return true;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                        ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!apply_config_kv(base, key, value)) {
            throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
        }
    }
    return base;
}

std::string manifest_json(const RunConfig& c, const std::string& command) {
    json j;
    j["command"] = command;
    j["data"] = c.data_path;
    j["out_dir"] = c.out_dir;
    j["checkpoint"] = c.checkpoint_path;
    j["ntc"] = c.ntc_spec;
    j["ptc"] = c.ptc_spec;
    j["max_items"] = c.max_items;
    j["per_user_context"] = c.per_user_context;
    j["dropout_rate"] = c.dropout_rate;
    j["attention_eps_clamp"] = c.attention_eps_clamp;
    j["lambda_emb"] = c.lambda_emb;
    j["hard_sigmoid_gates"] = c.hard_sigmoid_gates;
    j["candidate_hard_sigmoid"] = c.candidate_hard_sigmoid;
    j["share_context_lstm"] = c.share_context_lstm;
    j["context_popularity_input"] = c.context_popularity_input;
    j["embedding_loss"] = c.embedding_loss;
    j["learning_rate"] = c.learning_rate;
    j["rmsprop_decay"] = c.rmsprop_decay;
    j["rmsprop_epsilon"] = c.rmsprop_epsilon;
    j["clip_norm"] = c.clip_norm;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["early_stop_patience"] = c.early_stop_patience;
    j["parts"] = c.parts;
    j["window"] = c.window;
    j["seed"] = c.seed;
    j["gen"] = {
        {"n_users", c.gen.n_users},
        {"n_records", c.gen.n_records},
        {"dim_visual", c.gen.dim_visual},
        {"span_days", c.gen.span_days},
        {"start_epoch_seconds", c.gen.start_epoch_seconds},
        {"base_amplitude", c.gen.base_amplitude},
        {"periodic_amplitude", c.gen.periodic_amplitude},
        {"trend_amplitude", c.gen.trend_amplitude},
        {"trend_tau_days", c.gen.trend_tau_days},
        {"noise_level", c.gen.noise_level},
        {"popularity_offset", c.gen.popularity_offset},
        {"feature_noise", c.gen.feature_noise},
        {"latent_dim", c.gen.latent_dim},
    };
    return j.dump(2) + "\n";
}

std::optional<ContextSpec> make_context_spec(const RunConfig& config,
                                             const std::string& text) {
    if (text.empty()) return std::nullopt;
    ContextSpec spec = parse_context_spec(text);
    spec.max_items = config.max_items;
    spec.per_user = config.per_user_context;
    return spec;
}

ModelConfig make_model_config(const RunConfig& c, std::size_t dim_visual) {
    ModelConfig m;
    m.dim_visual = dim_visual;
    m.dropout_rate = c.dropout_rate;
    m.attention_eps_clamp = c.attention_eps_clamp;
    m.gate_activation =
        c.hard_sigmoid_gates ? GateActivation::HardSigmoid : GateActivation::Sigmoid;
    m.candidate_hard_sigmoid = c.candidate_hard_sigmoid;
    m.share_context_lstm = c.share_context_lstm;
    m.context_popularity_input = c.context_popularity_input;
    if (c.embedding_loss == "softmax_align") m.embedding_loss_kind = EmbeddingLossKind::SoftmaxAlign;
    else if (c.embedding_loss == "direct_align") m.embedding_loss_kind = EmbeddingLossKind::DirectAlign;
    else if (c.embedding_loss == "none") m.embedding_loss_kind = EmbeddingLossKind::None;
    else throw std::invalid_argument("unknown embedding_loss '" + c.embedding_loss + "'");
    return m;
}

TrainConfig make_train_config(const RunConfig& c) {
    TrainConfig t;
    t.epochs = c.epochs;
    t.batch_size = c.batch_size;
    t.lambda_emb = c.lambda_emb;
    t.clip_norm = c.clip_norm;
    t.early_stop_patience = c.early_stop_patience;
    t.seed = c.seed;
    return t;
}

RmspropState make_optimizer(const RunConfig& c) {
    RmspropState s;
    s.learning_rate = c.learning_rate;
    s.decay = c.rmsprop_decay;
    s.epsilon = c.rmsprop_epsilon;
    return s;
}

void run_gen(const RunConfig& config) {
    if (config.data_path.empty()) throw std::invalid_argument("gen: data path required");
    SyntheticResult result = generate_synthetic(config.gen, config.seed);
    save_sequence(config.data_path, result.sequence, result.provenance);
    fs::create_directories(config.out_dir);
    write_file(config.out_dir + "/stats.csv", stats_to_csv(dataset_stats(result.sequence)));
    write_file(config.out_dir + "/manifest.json", manifest_json(config, "gen"));
}

void run_train(const RunConfig& config) {
    UserPostSequence seq = load_sequence(config.data_path);
    const auto ntc = make_context_spec(config, config.ntc_spec);
    const auto ptc = make_context_spec(config, config.ptc_spec);
    DtcnModel model(make_model_config(config, seq.dim_visual), config.seed);
    RmspropState opt = make_optimizer(config);
    std::vector<std::size_t> targets(seq.size());
    std::iota(targets.begin(), targets.end(), 0);
    TrainResult result = train(model, seq, targets, ntc, ptc, opt, make_train_config(config));

    fs::create_directories(config.out_dir);
    save_checkpoint(config.out_dir + "/checkpoint.bin", model.state());
    std::ostringstream hist;
    hist << "epoch,train_loss\n";
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
        hist << (e + 1) << ',' << result.epoch_loss[e] << '\n';
    }
    write_file(config.out_dir + "/loss_history.csv", hist.str());
    write_file(config.out_dir + "/manifest.json", manifest_json(config, "train"));
}

void run_predict(const RunConfig& config) {
    UserPostSequence seq = load_sequence(config.data_path);
    const auto ntc = make_context_spec(config, config.ntc_spec);
    const auto ptc = make_context_spec(config, config.ptc_spec);
    DtcnModel model(make_model_config(config, seq.dim_visual), config.seed);
    if (config.checkpoint_path.empty()) {
        throw std::invalid_argument("predict: checkpoint path required");
    }
    model.load_state(load_checkpoint(config.checkpoint_path));
    std::vector<std::size_t> targets(seq.size());
    std::iota(targets.begin(), targets.end(), 0);
    const auto preds = predict(model, seq, targets, ntc, ptc);

    fs::create_directories(config.out_dir);
    std::ostringstream os;
    os << "post_id,predicted,truth\n";
    os.precision(10);
    for (const auto& p : preds) {
        os << p.post_id << ',' << p.predicted << ',' << p.truth << '\n';
    }
    write_file(config.out_dir + "/predictions.csv", os.str());
    write_file(config.out_dir + "/manifest.json", manifest_json(config, "predict"));
}

EvaluationReport run_eval(const RunConfig& config) {
    UserPostSequence seq = load_sequence(config.data_path);
    const auto ntc = make_context_spec(config, config.ntc_spec);
    const auto ptc = make_context_spec(config, config.ptc_spec);
    ProtocolConfig protocol;
    protocol.parts = config.parts;
    protocol.window = config.window;
    protocol.train = make_train_config(config);
    protocol.model = make_model_config(config, seq.dim_visual);
    protocol.optimizer = make_optimizer(config);
    protocol.model_seed = config.seed;
    EvaluationReport report = evaluate_rounds(seq, ntc, ptc, protocol);

    fs::create_directories(config.out_dir);
    write_file(config.out_dir + "/report.csv", report_to_csv(report));
    write_file(config.out_dir + "/report.txt", report_to_text(report));
    write_file(config.out_dir + "/manifest.json", manifest_json(config, "eval"));
    return report;
}

int run_gradcheck(std::ostream& log) {
    int failures = 0;
    auto run = [&](const std::string& name, const std::vector<Var>& params,
                   const std::vector<std::string>& names, const LossBuilder& builder,
                   GradCheckOptions opts = {}) {
        const GradCheckResult r = check_gradients(params, names, builder, opts);
        log << (r.ok ? "PASS " : "FAIL ") << name << "  max_rel_error=" << r.max_rel_error
            << "  entries=" << r.entries_checked;
        if (!r.ok) {
            log << "  worst=" << r.worst_param << '[' << r.worst_entry
                << "] analytic=" << r.worst_analytic << " numeric=" << r.worst_numeric;
        }
        log << '\n';
        if (!r.ok) ++failures;
    };

    std::mt19937_64 rng(20240501);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_tensor = [&](std::size_t r, std::size_t c) {
        Tensor t(r, c);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = gauss(rng);
        return t;
    };
    auto random_vec = [&](std::size_t n) {
        Tensor t(n);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = gauss(rng);
        return t;
    };

    // Elementwise and matrix primitives chained into one scalar.
    {
        Var w = make_param(random_tensor(3, 4));
        Var b = make_param(random_vec(4));
        Var x = make_const(random_tensor(2, 3));
        auto builder = [&](Tape& t) {
            Var h = t.tanh_(t.add(t.matmul(x, w), b));
            Var s = t.sigmoid_(h);
            Var m = t.mul(s, t.softmax(h));
            return t.sum(m);
        };
        run("primitive chain", {w, b}, {"w", "b"}, builder);
    }
    // LSTM unroll.
    {
        std::mt19937_64 init_rng(7);
        LstmParams lstm = init_lstm(5, 6, init_rng);
        std::vector<Tensor> xs = {random_vec(5), random_vec(5), random_vec(5)};
        auto builder = [&](Tape& t) {
            Var h = t.constant(Tensor(std::size_t{6}));
            Var c = t.constant(Tensor(std::size_t{6}));
            for (const auto& x : xs) {
                LstmStep step = lstm_cell(t, t.constant(x), h, c, lstm);
                h = step.h;
                c = step.c;
            }
            return t.sum(t.mul(h, h));
        };
        run("lstm 3-step unroll", {lstm.weights, lstm.bias}, {"weights", "bias"}, builder);
    }
    // Micro end-to-end model.
    {
        ModelConfig cfg;
        cfg.dim_visual = 8;
        cfg.hidden_wide = 4;
        cfg.hidden_narrow = 4;
        cfg.context_hidden = 8;
        cfg.head_hidden = 4;
        cfg.dropout_rate = 0.0;
        DtcnModel model(cfg, 11);
        SyntheticConfig gen;
        gen.n_users = 4;
        gen.n_records = 24;
        gen.dim_visual = 8;
        gen.span_days = 6.0;
        gen.periodic_amplitude = 0.5;
        gen.trend_amplitude = 0.5;
        UserPostSequence seq = generate_synthetic(gen, 3).sequence;
        ContextSpec ntc = parse_context_spec("NTC:1P:1D");
        ntc.max_items = 3;
        ContextSpec ptc = parse_context_spec("PTC:1P:2D");
        ptc.max_items = 3;
        const std::size_t target = seq.size() - 1;
        auto builder = [&](Tape& t) {
            std::mt19937_64 local(0);
            ForwardResult f = dtcn_forward(t, model, seq, target, std::optional(ntc),
                                           std::optional(ptc), false, local);
            Var truth = t.constant(Tensor::scalar(seq.popularity(target)));
            Var d = t.sub(f.prediction, truth);
            Var mse = t.mul(d, d);
            Var emb = embedding_loss(t, f.target_embedding, cfg.embedding_loss_kind);
            return t.add(mse, t.scale(emb, 0.1));
        };
        // The composite graph has high curvature (saturating gates), so the
        // default step's ~step^2 truncation error would swamp the tolerance.
        GradCheckOptions opts;
        opts.step = 1e-5;
        run("micro model end-to-end", model.parameters(), model.parameter_names(), builder,
            opts);
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace dtcn
