#pragma once

#include <json.hpp>

#include "coed/graph.hpp"

namespace coed {

enum class Split { Train, Val, Test };

std::string split_name(Split s);
Split split_from_name(const std::string& name);

// One feature realization on the shared graph. mask[i] == 1 keeps node i in
// the loss; knocked-out genes carry 0.
struct Sample {
    Mat features;
    Mat targets;
    std::vector<uint8_t> mask;
};

struct EnsembleDataset {
    FuzzyDiGraph graph;
    std::vector<Sample> samples;
    std::vector<Split> split;
    nlohmann::json metadata;  // dims, provenance, true parameters when synthetic

    std::vector<int> indices_of(Split s) const;

    void save_file(const std::string& path) const;
    static EnsembleDataset load_file(const std::string& path);

    // Human-inspectable dump: one CSV row per (sample, node).
    void export_csv(const std::string& path) const;
};

}  // namespace coed
