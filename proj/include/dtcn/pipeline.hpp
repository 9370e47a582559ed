// End-to-end runs shared by the command-line tool and the acceptance suite:
// synthetic generation, training, prediction and the moving-partition
// evaluation, each with a manifest for exact reruns.
#pragma once

#include "dtcn/synthetic.hpp"
#include "dtcn/train.hpp"

#include <iosfwd>
#include <string>

namespace dtcn {

struct RunConfig {
    // io
    std::string data_path;
    std::string out_dir = "run_out";
    std::string checkpoint_path;  // for predict; train writes into out_dir

    // contexts ("NTC:1P:1D" style; empty string = stream absent)
    std::string ntc_spec;
    std::string ptc_spec;
    std::size_t max_items = 32;
    bool per_user_context = false;

    // model
    double dropout_rate = 0.5;
    double attention_eps_clamp = 1e-3;
    double lambda_emb = 0.1;
    bool hard_sigmoid_gates = false;
    bool candidate_hard_sigmoid = false;
    bool share_context_lstm = false;
    bool context_popularity_input = true;
    std::string embedding_loss = "softmax_align";  // softmax_align|direct_align|none

    // optimizer / training
    double learning_rate = 0.001;
    double rmsprop_decay = 0.9;
    double rmsprop_epsilon = 1e-8;
    double clip_norm = 5.0;
    int epochs = 100;
    int batch_size = 32;
    int early_stop_patience = 10;

    // protocol
    int parts = 14;
    int window = 10;

    std::uint64_t seed = 7;

    // generator (used by the gen run)
    SyntheticConfig gen;
};

// Flat key-value config file: one `key = value` per line, '#' comments.
// Unknown keys are rejected.
RunConfig load_config_file(const std::string& path, RunConfig base = {});
// Returns false for an unknown key.
bool apply_config_kv(RunConfig& config, const std::string& key, const std::string& value);

std::string manifest_json(const RunConfig& config, const std::string& command);

std::optional<ContextSpec> make_context_spec(const RunConfig& config,
                                             const std::string& text);
ModelConfig make_model_config(const RunConfig& config, std::size_t dim_visual);
TrainConfig make_train_config(const RunConfig& config);
RmspropState make_optimizer(const RunConfig& config);

// gen: dataset + sidecar + stats.csv at data_path / out_dir.
void run_gen(const RunConfig& config);
// train on the full stream: checkpoint.bin, loss_history.csv, manifest.json.
void run_train(const RunConfig& config);
// predictions.csv (post_id, predicted, truth) for every record.
void run_predict(const RunConfig& config);
// full moving-partition protocol: report.txt, report.csv, manifest.json.
EvaluationReport run_eval(const RunConfig& config);
// Numerics verification; returns 0 when every check passes.
int run_gradcheck(std::ostream& log);

}  // namespace dtcn
