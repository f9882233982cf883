#include "coed/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "coed/sparse.hpp"

namespace coed {

namespace {

bool all_finite(const Mat& m) {
    for (double v : m.d)
        if (!std::isfinite(v)) return false;
    return true;
}

void write_bytes(std::ostream& os, const void* p, size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
void read_bytes(std::istream& is, void* p, size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw IoError("truncated checkpoint");
}
void write_u32(std::ostream& os, uint32_t v) { write_bytes(os, &v, 4); }
uint32_t read_u32(std::istream& is) {
    uint32_t v;
    read_bytes(is, &v, 4);
    return v;
}
void write_mat(std::ostream& os, const Mat& m) { write_bytes(os, m.d.data(), m.size() * 8); }
void read_mat(std::istream& is, Mat& m) { read_bytes(is, m.d.data(), m.size() * 8); }

}  // namespace

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Identity: return "identity";
        case Activation::UnitNorm: return "unit_norm";
    }
    throw ConfigError("bad activation enum");
}

Activation activation_from_name(const std::string& name) {
    if (name == "relu") return Activation::Relu;
    if (name == "identity") return Activation::Identity;
    if (name == "unit_norm") return Activation::UnitNorm;
    throw ConfigError("unknown activation: " + name);
}

CoEDModel::CoEDModel(const FuzzyDiGraph& graph, const std::vector<int>& dims, bool layerwise_theta,
                     bool use_self_feature, Activation activation, double alpha, uint64_t seed)
    : graph_(graph),
      plan_(kernels::GatherPlan::build(graph)),
      alpha_(alpha),
      layerwise_(layerwise_theta),
      use_self_(use_self_feature),
      activation_(activation) {
    if (dims.size() < 2) throw ConfigError("model needs at least one layer");
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha outside [0, 1]");
    Rng rng(seed);
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        int din = dims[l], dout = dims[l + 1];
        if (din <= 0 || dout <= 0) throw ConfigError("non-positive layer dimension");
        CoEDLayerParams p{Mat(din, dout), Mat(din, dout), Mat(din, dout), Mat(1, dout)};
        double limit = std::sqrt(6.0 / (din + dout));
        for (Mat* w : {&p.w_self, &p.w_in, &p.w_out})
            for (auto& v : w->d) v = rng.uniform(-limit, limit);
        layers_.push_back(std::move(p));
    }
    int n_sets = layerwise_ ? static_cast<int>(layers_.size()) : 1;
    raw_phases_.assign(n_sets, Mat(1, graph_.n_edges()));
}

std::vector<double> CoEDModel::thetas(int set) const {
    const Mat& raw = raw_phases_.at(set);
    std::vector<double> out(raw.size());
    for (size_t k = 0; k < raw.size(); ++k) out[k] = kQuarterPi * (1.0 + std::tanh(raw.d[k]));
    return out;
}

CoEDModel::Binding CoEDModel::bind(Tape& tape) const {
    Binding b;
    for (const auto& l : layers_)
        b.layers.push_back({tape.parameter(l.w_self), tape.parameter(l.w_in),
                            tape.parameter(l.w_out), tape.parameter(l.bias)});
    for (const auto& r : raw_phases_) b.raw.push_back(tape.parameter(r));
    return b;
}

Tape::TensorRef CoEDModel::forward(Tape& tape, const Binding& binding,
                                   Tape::TensorRef features) const {
    struct Phases {
        Tape::TensorRef c, s, r_in, r_out;
    };
    std::vector<Phases> phases;
    for (auto raw : binding.raw) {
        auto theta = tape.theta_from_raw(raw);
        auto c = tape.cos_of(theta);
        auto s = tape.sin_of(theta);
        auto deg = tape.fuzzy_degrees(plan_, c, s);
        phases.push_back({c, s, tape.rsqrt_floor(deg.d_in, kDegreeEpsilon),
                          tape.rsqrt_floor(deg.d_out, kDegreeEpsilon)});
    }
    auto f = features;
    int n_layers = static_cast<int>(layers_.size());
    for (int l = 0; l < n_layers; ++l) {
        const Phases& ph = phases[layerwise_ ? l : 0];
        auto msg = tape.fuzzy_gather(plan_, ph.c, ph.s, ph.r_in, ph.r_out, f);
        auto pre = tape.add(tape.scale(tape.matmul(msg.m_in, binding.layers[l].w_in), alpha_),
                            tape.scale(tape.matmul(msg.m_out, binding.layers[l].w_out),
                                       1.0 - alpha_));
        if (use_self_) pre = tape.add(pre, tape.matmul(f, binding.layers[l].w_self));
        pre = tape.add_row_broadcast(pre, binding.layers[l].bias);
        if (activation_ == Activation::Relu && l + 1 < n_layers)
            f = tape.relu(pre);
        else if (activation_ == Activation::UnitNorm)
            f = tape.row_normalize(pre);
        else
            f = pre;
        if (!all_finite(tape.value(f)))
            throw NumericError("non-finite activations at layer " + std::to_string(l));
    }
    return f;
}

Mat CoEDModel::forward_eval(const Mat& features, const std::vector<double>* thetas_override) const {
    struct Phases {
        std::vector<double> c, s, r_in, r_out;
    };
    int n_sets = static_cast<int>(raw_phases_.size());
    std::vector<Phases> phases(n_sets);
    for (int k = 0; k < n_sets; ++k) {
        std::vector<double> th = thetas_override ? *thetas_override : thetas(k);
        if (static_cast<int>(th.size()) != plan_.n_edges)
            throw ConfigError("theta vector length mismatch");
        Phases& ph = phases[k];
        ph.c.resize(th.size());
        ph.s.resize(th.size());
        for (size_t e = 0; e < th.size(); ++e) {
            ph.c[e] = std::cos(th[e]);
            ph.s[e] = std::sin(th[e]);
        }
        ph.r_in.resize(plan_.n_nodes);
        ph.r_out.resize(plan_.n_nodes);
        kernels::fuzzy_degrees(plan_, ph.c.data(), ph.s.data(), ph.r_in.data(), ph.r_out.data());
        for (int i = 0; i < plan_.n_nodes; ++i) {
            ph.r_in[i] = 1.0 / std::sqrt(std::max(ph.r_in[i], kDegreeEpsilon));
            ph.r_out[i] = 1.0 / std::sqrt(std::max(ph.r_out[i], kDegreeEpsilon));
        }
    }
    if (features.rows != graph_.n_nodes()) throw ConfigError("feature rows != node count");
    Mat f = features;
    int n_layers = static_cast<int>(layers_.size());
    for (int l = 0; l < n_layers; ++l) {
        const Phases& ph = phases[layerwise_ ? l : 0];
        Mat m_in, m_out;
        kernels::fuzzy_gather(plan_, ph.c.data(), ph.s.data(), ph.r_in.data(), ph.r_out.data(), f,
                              m_in, m_out);
        const CoEDLayerParams& p = layers_[l];
        Mat a, b;
        kernels::gemm_nn(m_in, p.w_in, a);
        kernels::gemm_nn(m_out, p.w_out, b);
        Mat pre(f.rows, p.w_in.cols);
        for (size_t k = 0; k < pre.size(); ++k)
            pre.d[k] = alpha_ * a.d[k] + (1.0 - alpha_) * b.d[k];
        if (use_self_) {
            Mat sf;
            kernels::gemm_nn(f, p.w_self, sf);
            for (size_t k = 0; k < pre.size(); ++k) pre.d[k] += sf.d[k];
        }
        for (int i = 0; i < pre.rows; ++i)
            for (int j = 0; j < pre.cols; ++j) pre(i, j) += p.bias(0, j);
        if (activation_ == Activation::Relu && l + 1 < n_layers) {
            for (auto& v : pre.d) v = v > 0.0 ? v : 0.0;
        } else if (activation_ == Activation::UnitNorm) {
            for (int i = 0; i < pre.rows; ++i) {
                double n2 = 0.0;
                for (int j = 0; j < pre.cols; ++j) n2 += pre(i, j) * pre(i, j);
                double n = std::sqrt(std::max(n2, 1e-300));
                for (int j = 0; j < pre.cols; ++j) pre(i, j) /= n;
            }
        }
        if (!all_finite(pre))
            throw NumericError("non-finite activations at layer " + std::to_string(l));
        f = std::move(pre);
    }
    return f;
}

double CoEDModel::sample_loss(const Sample& sample) const {
    Mat pred = forward_eval(sample.features);
    long kept = 0;
    double acc = 0.0;
    for (int i = 0; i < pred.rows; ++i) {
        if (!sample.mask[i]) continue;
        ++kept;
        for (int j = 0; j < pred.cols; ++j) {
            double d = pred(i, j) - sample.targets(i, j);
            acc += d * d;
        }
    }
    if (kept == 0) throw NumericError("all rows masked out of the loss");
    return acc / (static_cast<double>(kept) * pred.cols);
}

double CoEDModel::split_loss(const EnsembleDataset& data, Split split) const {
    double acc = 0.0;
    int n = 0;
    for (size_t k = 0; k < data.samples.size(); ++k) {
        if (data.split[k] != split) continue;
        acc += sample_loss(data.samples[k]);
        ++n;
    }
    if (n == 0) throw ConfigError("empty split");
    return acc / n;
}

void CoEDModel::save_file(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write("COED1", 5);
    write_u32(os, static_cast<uint32_t>(layers_.size()));
    for (const auto& l : layers_) {
        write_u32(os, static_cast<uint32_t>(l.w_self.rows));
        write_u32(os, static_cast<uint32_t>(l.w_self.cols));
        write_mat(os, l.w_self);
        write_mat(os, l.w_in);
        write_mat(os, l.w_out);
        write_mat(os, l.bias);
    }
    uint8_t flag = layerwise_ ? 1 : 0;
    write_bytes(os, &flag, 1);
    write_u32(os, static_cast<uint32_t>(raw_phases_.size()));
    write_u32(os, static_cast<uint32_t>(graph_.n_edges()));
    for (const auto& r : raw_phases_) write_mat(os, r);
    uint8_t self_flag = use_self_ ? 1 : 0;
    uint8_t act = static_cast<uint8_t>(activation_);
    write_bytes(os, &self_flag, 1);
    write_bytes(os, &act, 1);
    write_bytes(os, &alpha_, 8);
    uint64_t h = graph_.topology_hash();
    write_bytes(os, &h, 8);
    if (!os) throw IoError("write failed: " + path);
}

CoEDModel CoEDModel::load_file(const std::string& path, const FuzzyDiGraph& graph) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[5];
    read_bytes(is, magic, 5);
    if (std::string(magic, 5) != "COED1") throw IoError("bad checkpoint magic");
    uint32_t n_layers = read_u32(is);
    CoEDModel m;
    m.graph_ = graph;
    m.plan_ = kernels::GatherPlan::build(graph);
    std::vector<int> dims;
    for (uint32_t l = 0; l < n_layers; ++l) {
        uint32_t din = read_u32(is), dout = read_u32(is);
        CoEDLayerParams p{Mat(din, dout), Mat(din, dout), Mat(din, dout), Mat(1, dout)};
        read_mat(is, p.w_self);
        read_mat(is, p.w_in);
        read_mat(is, p.w_out);
        read_mat(is, p.bias);
        m.layers_.push_back(std::move(p));
    }
    uint8_t flag;
    read_bytes(is, &flag, 1);
    m.layerwise_ = flag != 0;
    uint32_t n_sets = read_u32(is);
    uint32_t n_edges = read_u32(is);
    if (static_cast<int>(n_edges) != graph.n_edges())
        throw IoError("checkpoint edge count does not match the graph");
    for (uint32_t k = 0; k < n_sets; ++k) {
        Mat r(1, static_cast<int>(n_edges));
        read_mat(is, r);
        m.raw_phases_.push_back(std::move(r));
    }
    uint8_t self_flag, act;
    read_bytes(is, &self_flag, 1);
    read_bytes(is, &act, 1);
    m.use_self_ = self_flag != 0;
    if (act > 2) throw IoError("bad activation code in checkpoint");
    m.activation_ = static_cast<Activation>(act);
    read_bytes(is, &m.alpha_, 8);
    uint64_t h;
    read_bytes(is, &h, 8);
    if (h != graph.topology_hash()) throw IoError("checkpoint was trained on a different graph");
    return m;
}

namespace {

struct AdamState {
    std::vector<Mat> m, v;
    long t = 0;
};

std::vector<Mat*> flat_params(CoEDModel& model) {
    std::vector<Mat*> out;
    for (auto& l : model.layers()) {
        out.push_back(&l.w_self);
        out.push_back(&l.w_in);
        out.push_back(&l.w_out);
        out.push_back(&l.bias);
    }
    for (auto& r : model.raw_phases()) out.push_back(&r);
    return out;
}

std::vector<const Mat*> flat_grads(const Tape& tape, const CoEDModel::Binding& binding) {
    std::vector<const Mat*> out;
    for (const auto& l : binding.layers) {
        out.push_back(&tape.grad(l.w_self));
        out.push_back(&tape.grad(l.w_in));
        out.push_back(&tape.grad(l.w_out));
        out.push_back(&tape.grad(l.bias));
    }
    for (auto r : binding.raw) out.push_back(&tape.grad(r));
    return out;
}

void adam_update(std::vector<Mat*>& params, const std::vector<const Mat*>& grads,
                 AdamState& state, const std::vector<double>& lrs) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++state.t;
    double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (size_t k = 0; k < params.size(); ++k) {
        if (lrs[k] == 0.0) continue;
        Mat& p = *params[k];
        const Mat& g = *grads[k];
        Mat& mm = state.m[k];
        Mat& vv = state.v[k];
        for (size_t i = 0; i < p.size(); ++i) {
            double gi = g.d[i];
            if (!std::isfinite(gi)) throw NumericError("non-finite gradient in optimizer step");
            mm.d[i] = b1 * mm.d[i] + (1.0 - b1) * gi;
            vv.d[i] = b2 * vv.d[i] + (1.0 - b2) * gi * gi;
            p.d[i] -= lrs[k] * (mm.d[i] / c1) / (std::sqrt(vv.d[i] / c2) + eps);
        }
    }
}

}  // namespace

TrainResult train(CoEDModel& model, const EnsembleDataset& data, const TrainConfig& config) {
    std::vector<int> train_idx = data.indices_of(Split::Train);
    if (train_idx.empty()) throw ConfigError("empty train split");
    if (data.indices_of(Split::Val).empty()) throw ConfigError("empty val split");
    if (config.batch_size < 1) throw ConfigError("batch_size must be positive");

    auto params = flat_params(model);
    size_t n_weight_params = model.layers().size() * 4;
    std::vector<double> lrs(params.size(), config.lr);
    for (size_t k = n_weight_params; k < params.size(); ++k)
        lrs[k] = config.freeze_theta ? 0.0 : config.lr_theta;
    AdamState state;
    for (auto* p : params) {
        state.m.emplace_back(p->rows, p->cols);
        state.v.emplace_back(p->rows, p->cols);
    }

    TrainResult result;
    Rng rng(config.seed);
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<CoEDLayerParams> best_layers = model.layers();
    std::vector<Mat> best_raw = model.raw_phases();
    int counter = 0;

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        rng.shuffle(train_idx);
        double loss_acc = 0.0;
        int n_batches = 0;
        for (size_t start = 0; start < train_idx.size(); start += config.batch_size) {
            size_t stop = std::min(train_idx.size(), start + config.batch_size);
            Tape tape;
            auto binding = model.bind(tape);
            Tape::TensorRef total{};
            for (size_t k = start; k < stop; ++k) {
                const Sample& s = data.samples[train_idx[k]];
                auto pred = model.forward(tape, binding, tape.constant(s.features));
                auto li = tape.masked_mse(pred, tape.constant(s.targets), s.mask);
                total = k == start ? li : tape.add(total, li);
            }
            auto loss = tape.scale(total, 1.0 / static_cast<double>(stop - start));
            double lv = tape.value(loss)(0, 0);
            if (!std::isfinite(lv))
                throw TrainingDiverged("training loss went non-finite", result.history);
            tape.backward(loss);
            auto grads = flat_grads(tape, binding);
            adam_update(params, grads, state, lrs);
            loss_acc += lv;
            ++n_batches;
        }
        double train_loss = loss_acc / n_batches;
        double val_loss = model.split_loss(data, Split::Val);
        if (!std::isfinite(val_loss))
            throw TrainingDiverged("validation loss went non-finite", result.history);
        if (val_loss < best_val) {
            best_val = val_loss;
            best_layers = model.layers();
            best_raw = model.raw_phases();
            result.best_epoch = epoch;
            counter = 0;
        } else {
            ++counter;
        }
        result.history.push_back({epoch, train_loss, val_loss, counter});
        if (counter >= config.patience) break;
    }

    model.layers() = std::move(best_layers);
    model.raw_phases() = std::move(best_raw);
    result.best_val_loss = best_val;
    return result;
}

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "epoch,train_loss,val_loss,patience_counter\n";
    char buf[128];
    for (const auto& r : history) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%d\n", r.epoch, r.train_loss, r.val_loss,
                      r.patience_counter);
        os << buf;
    }
    if (!os) throw IoError("write failed: " + path);
}

GradCheckReport gradient_check(const CoEDModel& model, const Sample& sample, double h,
                               size_t budget, uint64_t seed) {
    CoEDModel work = model;

    Tape tape;
    auto binding = work.bind(tape);
    auto pred = work.forward(tape, binding, tape.constant(sample.features));
    auto loss = tape.masked_mse(pred, tape.constant(sample.targets), sample.mask);
    tape.backward(loss);
    auto grads = flat_grads(tape, binding);
    auto params = flat_params(work);
    size_t n_weight_params = work.layers().size() * 4;

    struct Entry {
        size_t tensor, idx;
        bool is_phase;
    };
    std::vector<Entry> entries;
    for (size_t k = 0; k < params.size(); ++k)
        for (size_t i = 0; i < params[k]->size(); ++i)
            entries.push_back({k, i, k >= n_weight_params});
    if (entries.size() > budget) {
        Rng rng(seed);
        rng.shuffle(entries);
        entries.resize(budget);
    }

    // Relative error with the denominator floored at a fraction of the
    // dominant gradient magnitude: components much smaller than the dominant
    // gradient sit below the finite-difference rounding noise (~eps/h on an
    // O(1) loss), where a pure relative comparison is meaningless.
    double gmax = 0.0;
    for (const auto& e : entries) gmax = std::max(gmax, std::abs(grads[e.tensor]->d[e.idx]));
    double floor = 1e-4 * std::max(1.0, gmax);

    GradCheckReport report;
    for (const auto& e : entries) {
        double saved = params[e.tensor]->d[e.idx];
        params[e.tensor]->d[e.idx] = saved + h;
        double lp = work.sample_loss(sample);
        params[e.tensor]->d[e.idx] = saved - h;
        double lm = work.sample_loss(sample);
        params[e.tensor]->d[e.idx] = saved;
        double numeric = (lp - lm) / (2.0 * h);
        double analytic = grads[e.tensor]->d[e.idx];
        double rel = std::abs(numeric - analytic) /
                     std::max({std::abs(numeric), std::abs(analytic), floor});
        double& slot = e.is_phase ? report.max_rel_phase : report.max_rel_weight;
        slot = std::max(slot, rel);
    }
    return report;
}

}  // namespace coed
