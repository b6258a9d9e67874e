#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace dlm {

// Everything a command needs; serialized verbatim into each output directory.
struct ExperimentConfig {
    struct Paths {
        std::string lexicon;
        std::string embeddings;
        std::string lemma_frequencies;  // optional; otherwise summed form frequencies
        std::string out = "out";
    } paths;

    int gram_size = 3;
    std::string learning = "EOL";  // EOL | FIL
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0 = machine parallelism

    struct Split {
        std::string mode = "frequency";  // frequency | constrained | none
        std::uint64_t threshold = 5;
        double fraction = 0.1;
    } split;

    struct Mapping {
        double ridge = 0.0;
    } mapping;

    struct Evaluation {
        std::size_t k = 10;
        std::string pool = "full";  // full | split
    } evaluation;

    struct Network {
        std::vector<std::size_t> hidden{1000};
        int epochs = 100;
        int patience = 5;
        std::size_t batch_size = 512;
        double step_size = 1e-3;
        std::string optimizer = "adam";  // adam | sgd
        double validation_fraction = 0.05;
    } network;

    struct Production {
        std::string what = "network";     // network | linear | gold
        std::string feedback = "EOL";     // learning of the comprehension feedback mapping
        std::string evaluate = "test";    // test | train
        double threshold = 0.01;
        std::size_t max_length = 25;
        std::size_t candidate_cap = 10000;
    } production;

    struct Probe {
        double shrinkage = 0.1;
        std::vector<std::string> targets{"class"};
        std::size_t min_tokens = 30;
        bool by_cell = true;
        bool shift_vectors = true;
        std::string loocv = "downdate";  // downdate | refit
    } probe;

    struct Report {
        std::string results;              // per-word CSV from comprehend or produce
        std::string metric = "mean_accuracy";
    } report;

    nlohmann::ordered_json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);  // unknown keys are errors
    static ExperimentConfig load(const std::filesystem::path& path);
};

// Each command writes into config.paths.out and returns a short human summary.
std::string cmd_ingest(const ExperimentConfig& config);
std::string cmd_split(const ExperimentConfig& config);
std::string cmd_comprehend(const ExperimentConfig& config);
std::string cmd_produce(const ExperimentConfig& config);
std::string cmd_probe(const ExperimentConfig& config);
std::string cmd_productivity(const ExperimentConfig& config);
std::string cmd_report(const ExperimentConfig& config);

}  // namespace dlm
