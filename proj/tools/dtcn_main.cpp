// Command-line front end: gen / train / predict / eval / gradcheck.
#include "dtcn/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

// Flags override config-file values, which override defaults.
void add_common_options(CLI::App* cmd, dtcn::RunConfig& config, std::string& config_file,
                        std::vector<std::string>& context_args) {
    cmd->add_option("--config", config_file, "flat key=value config file");
    cmd->add_option("--data", config.data_path, "dataset file (line-delimited records)");
    cmd->add_option("--out", config.out_dir, "output directory");
    cmd->add_option("--seed", config.seed, "run seed");
    cmd->add_option("--context", context_args,
                    "context spec KIND:UNIT:RANGE (repeatable, one per kind)");
    cmd->add_option("--max-items", config.max_items, "context length cap");
    cmd->add_flag("--per-user-context", config.per_user_context,
                  "restrict contexts to the target's own user");
    cmd->add_option("--epochs", config.epochs);
    cmd->add_option("--batch-size", config.batch_size);
    cmd->add_option("--learning-rate", config.learning_rate);
    cmd->add_option("--lambda-emb", config.lambda_emb);
    cmd->add_option("--clip-norm", config.clip_norm);
    cmd->add_option("--dropout", config.dropout_rate);
    cmd->add_option("--parts", config.parts);
    cmd->add_option("--window", config.window);
    cmd->add_option("--checkpoint", config.checkpoint_path);
    cmd->add_flag("--hard-sigmoid-gates", config.hard_sigmoid_gates);
    cmd->add_option("--embedding-loss", config.embedding_loss,
                    "softmax_align|direct_align|none");
}

void add_gen_options(CLI::App* cmd, dtcn::RunConfig& config) {
    cmd->add_option("--n-users", config.gen.n_users);
    cmd->add_option("--n-records", config.gen.n_records);
    cmd->add_option("--dim-visual", config.gen.dim_visual);
    cmd->add_option("--span-days", config.gen.span_days);
    cmd->add_option("--base-amplitude", config.gen.base_amplitude);
    cmd->add_option("--periodic-amplitude", config.gen.periodic_amplitude);
    cmd->add_option("--trend-amplitude", config.gen.trend_amplitude);
    cmd->add_option("--trend-tau-days", config.gen.trend_tau_days);
    cmd->add_option("--noise-level", config.gen.noise_level);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep temporal context network for sequential popularity prediction"};
    app.require_subcommand(1);

    dtcn::RunConfig config;
    if (const char* env_out = std::getenv("DTCN_OUT_DIR")) config.out_dir = env_out;
    std::string config_file;
    std::vector<std::string> context_args;

    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    auto* train = app.add_subcommand("train", "train on the full stream");
    auto* predict = app.add_subcommand("predict", "predict with a trained checkpoint");
    auto* eval = app.add_subcommand("eval", "run the moving-partition protocol");
    auto* gradcheck = app.add_subcommand("gradcheck", "verify gradients numerically");
    for (CLI::App* cmd : {gen, train, predict, eval}) {
        add_common_options(cmd, config, config_file, context_args);
    }
    add_gen_options(gen, config);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (!config_file.empty()) {
            // Re-parse so explicit flags win over file values.
            config = dtcn::load_config_file(config_file, dtcn::RunConfig{});
            app.clear();
            app.parse(argc, argv);
        }
        for (const auto& v : context_args) {
            if (v.rfind("NTC:", 0) == 0) config.ntc_spec = v;
            else if (v.rfind("PTC:", 0) == 0) config.ptc_spec = v;
            else throw std::invalid_argument("--context: expected NTC:... or PTC:..., got '" + v + "'");
        }
        if (gradcheck->parsed()) {
            return dtcn::run_gradcheck(std::cout) == 0 ? kExitOk : kExitNumeric;
        }
        std::cout << dtcn::manifest_json(config,
                                         app.get_subcommands().front()->get_name());
        if (gen->parsed()) dtcn::run_gen(config);
        else if (train->parsed()) dtcn::run_train(config);
        else if (predict->parsed()) dtcn::run_predict(config);
        else if (eval->parsed()) {
            const auto report = dtcn::run_eval(config);
            std::cout << dtcn::report_to_text(report);
        }
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        const std::string what = e.what();
        return what.find("non-finite") != std::string::npos ? kExitNumeric : kExitData;
    }
}
