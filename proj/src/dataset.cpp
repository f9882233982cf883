#include "coed/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace coed {

std::string split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    throw ConfigError("bad split enum");
}

Split split_from_name(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "val") return Split::Val;
    if (name == "test") return Split::Test;
    throw ConfigError("unknown split label: " + name);
}

std::vector<int> EnsembleDataset::indices_of(Split s) const {
    std::vector<int> out;
    for (size_t k = 0; k < split.size(); ++k)
        if (split[k] == s) out.push_back(static_cast<int>(k));
    return out;
}

void EnsembleDataset::save_file(const std::string& path) const {
    if (samples.size() != split.size()) throw IoError("split labels do not cover every sample");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write("COEDDS1", 7);

    nlohmann::json meta = metadata;
    std::ostringstream gs;
    graph.save(gs);
    meta["graph"] = gs.str();
    meta["n_samples"] = samples.size();
    meta["n_nodes"] = graph.n_nodes();
    meta["d_in"] = samples.empty() ? 0 : samples[0].features.cols;
    meta["d_tgt"] = samples.empty() ? 0 : samples[0].targets.cols;
    std::vector<std::string> labels;
    for (Split s : split) labels.push_back(split_name(s));
    meta["split"] = labels;
    std::string blob = meta.dump();
    uint64_t len = blob.size();
    os.write(reinterpret_cast<const char*>(&len), 8);
    os.write(blob.data(), static_cast<std::streamsize>(blob.size()));

    for (const auto& s : samples) {
        os.write(reinterpret_cast<const char*>(s.features.d.data()),
                 static_cast<std::streamsize>(s.features.size() * 8));
        os.write(reinterpret_cast<const char*>(s.targets.d.data()),
                 static_cast<std::streamsize>(s.targets.size() * 8));
        os.write(reinterpret_cast<const char*>(s.mask.data()),
                 static_cast<std::streamsize>(s.mask.size()));
    }
    if (!os) throw IoError("write failed: " + path);
}

EnsembleDataset EnsembleDataset::load_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[7];
    is.read(magic, 7);
    if (!is || std::string(magic, 7) != "COEDDS1") throw IoError("bad dataset magic");

    uint64_t len = 0;
    is.read(reinterpret_cast<char*>(&len), 8);
    std::string blob(len, '\0');
    is.read(blob.data(), static_cast<std::streamsize>(len));
    if (!is) throw IoError("truncated dataset metadata");
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(blob);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("corrupt dataset metadata: ") + e.what());
    }

    EnsembleDataset out;
    {
        std::istringstream gs(meta.at("graph").get<std::string>());
        out.graph = FuzzyDiGraph::load(gs);
    }
    size_t n_samples = meta.at("n_samples").get<size_t>();
    int n_nodes = meta.at("n_nodes").get<int>();
    int d_in = meta.at("d_in").get<int>();
    int d_tgt = meta.at("d_tgt").get<int>();
    if (n_nodes != out.graph.n_nodes()) throw IoError("dataset node count mismatch");
    for (const auto& label : meta.at("split")) out.split.push_back(split_from_name(label));
    if (out.split.size() != n_samples) throw IoError("split labels do not cover every sample");

    for (size_t k = 0; k < n_samples; ++k) {
        Sample s{Mat(n_nodes, d_in), Mat(n_nodes, d_tgt), std::vector<uint8_t>(n_nodes)};
        is.read(reinterpret_cast<char*>(s.features.d.data()),
                static_cast<std::streamsize>(s.features.size() * 8));
        is.read(reinterpret_cast<char*>(s.targets.d.data()),
                static_cast<std::streamsize>(s.targets.size() * 8));
        is.read(reinterpret_cast<char*>(s.mask.data()), n_nodes);
        if (!is) throw IoError("truncated dataset payload");
        out.samples.push_back(std::move(s));
    }
    meta.erase("graph");
    meta.erase("split");
    out.metadata = std::move(meta);
    return out;
}

void EnsembleDataset::export_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "sample,split,node,mask";
    int d_in = samples.empty() ? 0 : samples[0].features.cols;
    int d_tgt = samples.empty() ? 0 : samples[0].targets.cols;
    for (int j = 0; j < d_in; ++j) os << ",x" << j;
    for (int j = 0; j < d_tgt; ++j) os << ",y" << j;
    os << '\n';
    char buf[64];
    for (size_t k = 0; k < samples.size(); ++k) {
        const Sample& s = samples[k];
        for (int i = 0; i < s.features.rows; ++i) {
            os << k << ',' << split_name(split[k]) << ',' << i << ',' << int(s.mask[i]);
            for (int j = 0; j < d_in; ++j) {
                std::snprintf(buf, sizeof(buf), ",%.17g", s.features(i, j));
                os << buf;
            }
            for (int j = 0; j < d_tgt; ++j) {
                std::snprintf(buf, sizeof(buf), ",%.17g", s.targets(i, j));
                os << buf;
            }
            os << '\n';
        }
    }
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace coed
