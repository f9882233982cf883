#pragma once

#include "coed/dataset.hpp"
#include "coed/tape.hpp"

namespace coed {

enum class Activation { Relu, Identity, UnitNorm };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct CoEDLayerParams {
    Mat w_self;
    Mat w_in;
    Mat w_out;
    Mat bias;  // 1 x d_out
};

// Eq. 3-4 stack. Phases are stored as unconstrained raw values, one 1xE row
// per phase set (a single shared set, or one per layer when layerwise).
// ReLU applies to all layers but the last; unit-norm renormalization (the
// lattice-generator convention) applies to every layer; identity to none.
class CoEDModel {
public:
    CoEDModel() = default;
    CoEDModel(const FuzzyDiGraph& graph, const std::vector<int>& dims, bool layerwise_theta,
              bool use_self_feature, Activation activation, double alpha, uint64_t seed);

    const FuzzyDiGraph& graph() const { return graph_; }
    const kernels::GatherPlan& plan() const { return plan_; }
    int n_layers() const { return static_cast<int>(layers_.size()); }
    bool layerwise_theta() const { return layerwise_; }
    bool use_self_feature() const { return use_self_; }
    Activation activation() const { return activation_; }
    double alpha() const { return alpha_; }

    std::vector<CoEDLayerParams>& layers() { return layers_; }
    const std::vector<CoEDLayerParams>& layers() const { return layers_; }
    std::vector<Mat>& raw_phases() { return raw_phases_; }
    const std::vector<Mat>& raw_phases() const { return raw_phases_; }

    // theta(raw) for the given phase set.
    std::vector<double> thetas(int set = 0) const;

    // Tape handles for every trainable tensor, in a fixed flattening order.
    struct Binding {
        struct Layer {
            Tape::TensorRef w_self, w_in, w_out, bias;
        };
        std::vector<Layer> layers;
        std::vector<Tape::TensorRef> raw;  // one per phase set
    };
    Binding bind(Tape& tape) const;

    // Differentiable forward pass; propagation tensors are built once per
    // phase set and shared across every sample that reuses the binding.
    Tape::TensorRef forward(Tape& tape, const Binding& binding, Tape::TensorRef features) const;

    // Gradient-free forward. thetas_override (size E), when given, replaces
    // the reparameterized phases in every layer; the lattice generator and
    // its round-trip check use this to drive the exact same map with phases
    // outside the open range of theta_from_raw.
    Mat forward_eval(const Mat& features, const std::vector<double>* thetas_override = nullptr) const;

    double sample_loss(const Sample& sample) const;
    double split_loss(const EnsembleDataset& data, Split split) const;

    void save_file(const std::string& path) const;
    static CoEDModel load_file(const std::string& path, const FuzzyDiGraph& graph);

private:
    FuzzyDiGraph graph_;
    kernels::GatherPlan plan_;
    std::vector<CoEDLayerParams> layers_;
    std::vector<Mat> raw_phases_;
    double alpha_ = 0.5;
    bool layerwise_ = false;
    bool use_self_ = true;
    Activation activation_ = Activation::Relu;
};

struct TrainConfig {
    int batch_size = 16;
    int patience = 20;
    int max_epochs = 200;
    double lr = 1e-2;
    double lr_theta = 1e-2;
    uint64_t seed = 0;
    bool freeze_theta = false;
};

struct EpochRecord {
    int epoch;
    double train_loss;  // running mean of the epoch's mini-batch losses
    double val_loss;
    int patience_counter;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    double best_val_loss = 0.0;
    int best_epoch = -1;
};

// Thrown when the loss goes non-finite; carries the history accumulated so
// far so the caller can still dump it.
struct TrainingDiverged : NumericError {
    explicit TrainingDiverged(const std::string& what, std::vector<EpochRecord> h)
        : NumericError(what), history(std::move(h)) {}
    std::vector<EpochRecord> history;
};

// Mini-batch Adam with early stopping on validation loss; the model is left
// at the best-validation snapshot.
TrainResult train(CoEDModel& model, const EnsembleDataset& data, const TrainConfig& config);

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history);

struct GradCheckReport {
    double max_rel_weight = 0.0;
    double max_rel_phase = 0.0;
};

// Central finite differences against the tape gradients on one sample.
// Parameters beyond the budget are subsampled with the given seed.
GradCheckReport gradient_check(const CoEDModel& model, const Sample& sample, double h = 1e-5,
                               size_t budget = 10000, uint64_t seed = 1);

}  // namespace coed
