#pragma once

#include <functional>

#include "coed/kernels.hpp"

namespace coed {

// Reverse-mode tape over dense f64 matrices. The operation set is exactly
// what the CoED forward pass needs; there is no generic graph compiler here.
// Tensor handles are indices into the tape, so they stay trivially copyable
// and the tape owns all storage.
class Tape {
public:
    struct TensorRef {
        int id = -1;
        int rows = 0;
        int cols = 0;
    };

    TensorRef constant(Mat value) { return create(std::move(value), false); }
    TensorRef parameter(Mat value) { return create(std::move(value), true); }

    const Mat& value(TensorRef t) const { return slots_[t.id].value; }
    const Mat& grad(TensorRef t) const { return slots_[t.id].grad; }

    // --- dense algebra ---
    TensorRef matmul(TensorRef a, TensorRef b);
    TensorRef add(TensorRef a, TensorRef b);
    TensorRef mul(TensorRef a, TensorRef b);  // elementwise
    TensorRef scale(TensorRef a, double k);
    TensorRef add_row_broadcast(TensorRef a, TensorRef row);  // a + 1*row
    TensorRef relu(TensorRef a);
    TensorRef row_normalize(TensorRef a);  // rows scaled to unit L2 norm
    TensorRef sum(TensorRef a);            // 1x1

    // --- elementwise transcendentals ---
    TensorRef cos_of(TensorRef a);
    TensorRef sin_of(TensorRef a);
    // theta = (pi/4) * (1 + tanh(raw)); smooth bijection onto (0, pi/2).
    TensorRef theta_from_raw(TensorRef raw);
    // 1 / sqrt(max(x, eps)); the floor zeroes the derivative below eps.
    TensorRef rsqrt_floor(TensorRef a, double eps);

    // --- graph aggregation ---
    struct MessagePair {
        TensorRef m_in;
        TensorRef m_out;
    };
    struct DegreePair {
        TensorRef d_in;
        TensorRef d_out;
    };
    DegreePair fuzzy_degrees(const kernels::GatherPlan& plan, TensorRef c, TensorRef s);
    MessagePair fuzzy_gather(const kernels::GatherPlan& plan, TensorRef c, TensorRef s,
                             TensorRef r_in, TensorRef r_out, TensorRef f);

    // --- loss ---
    // Mean squared error over unmasked rows and all columns. mask[i] == true
    // keeps row i. Throws when every row is masked out.
    TensorRef masked_mse(TensorRef pred, TensorRef target, const std::vector<uint8_t>& keep);

    // Populates grads of every requires_grad tensor reachable from the given
    // scalar. Throws on a non-scalar.
    void backward(TensorRef loss);

private:
    struct Slot {
        Mat value;
        Mat grad;
        bool requires_grad = false;
    };
    struct Node {
        std::function<void()> back;
    };

    TensorRef create(Mat value, bool requires_grad);
    Mat& g(int id) { return slots_[id].grad; }
    bool rg(int id) const { return slots_[id].requires_grad; }

    std::vector<Slot> slots_;
    std::vector<Node> nodes_;
};

double pearson(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace coed
