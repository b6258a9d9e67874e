#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dlm/error.hpp"
#include "dlm/pipeline.hpp"

namespace {

int exit_code(dlm::ErrorKind kind) {
    switch (kind) {
        case dlm::ErrorKind::config: return 2;
        case dlm::ErrorKind::data: return 3;
        case dlm::ErrorKind::numerical: return 4;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discriminative lexicon experiments: comprehension, production, probing and productivity"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    app.add_option("--config", config_path, "experiment configuration (JSON)");
    app.add_option("--out", out, "output directory (overrides paths.out)");
    app.add_option("--seed", seed, "random seed (overrides seed)");
    app.add_option("--threads", threads, "worker threads, 0 = all cores");

    const std::map<std::string, std::pair<std::string, std::function<std::string(const dlm::ExperimentConfig&)>>> commands{
        {"ingest", {"normalize the lexicon and attach embeddings", dlm::cmd_ingest}},
        {"split", {"write the train/test partition", dlm::cmd_split}},
        {"comprehend", {"fit and evaluate the form-to-meaning mapping", dlm::cmd_comprehend}},
        {"produce", {"fit the what-system and produce word forms", dlm::cmd_produce}},
        {"probe", {"linear discriminant probes of the semantic space", dlm::cmd_probe}},
        {"productivity", {"productivity measures per inflectional class", dlm::cmd_productivity}},
        {"report", {"correlate class performance with productivity", dlm::cmd_report}},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, entry] : commands) subs[name] = app.add_subcommand(name, entry.first);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        dlm::ExperimentConfig config;
        if (!config_path.empty()) config = dlm::ExperimentConfig::load(config_path);
        if (out) config.paths.out = *out;
        if (seed) config.seed = *seed;
        if (threads) config.threads = *threads;
        for (const auto& [name, sub] : subs)
            if (sub->parsed()) {
                std::cout << commands.at(name).second(config) << '\n';
                return 0;
            }
    } catch (const dlm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
