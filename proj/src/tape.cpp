#include "coed/tape.hpp"

#include <algorithm>
#include <cmath>

namespace coed {

Tape::TensorRef Tape::create(Mat value, bool requires_grad) {
    TensorRef t{static_cast<int>(slots_.size()), value.rows, value.cols};
    Slot s;
    s.grad = Mat(value.rows, value.cols);
    s.value = std::move(value);
    s.requires_grad = requires_grad;
    slots_.push_back(std::move(s));
    return t;
}

Tape::TensorRef Tape::matmul(TensorRef a, TensorRef b) {
    if (a.cols != b.rows) throw NumericError("matmul shape mismatch");
    Mat out;
    kernels::gemm_nn(slots_[a.id].value, slots_[b.id].value, out);
    TensorRef y = create(std::move(out), rg(a.id) || rg(b.id));
    nodes_.push_back({[this, a, b, y] {
        Mat tmp;
        if (rg(a.id)) {
            kernels::gemm_nt(g(y.id), slots_[b.id].value, tmp);
            for (size_t k = 0; k < tmp.size(); ++k) g(a.id).d[k] += tmp.d[k];
        }
        if (rg(b.id)) {
            kernels::gemm_tn(slots_[a.id].value, g(y.id), tmp);
            for (size_t k = 0; k < tmp.size(); ++k) g(b.id).d[k] += tmp.d[k];
        }
    }});
    return y;
}

Tape::TensorRef Tape::add(TensorRef a, TensorRef b) {
    if (!slots_[a.id].value.same_shape(slots_[b.id].value))
        throw NumericError("add shape mismatch");
    Mat out = slots_[a.id].value;
    for (size_t k = 0; k < out.size(); ++k) out.d[k] += slots_[b.id].value.d[k];
    TensorRef y = create(std::move(out), rg(a.id) || rg(b.id));
    nodes_.push_back({[this, a, b, y] {
        if (rg(a.id))
            for (size_t k = 0; k < g(a.id).size(); ++k) g(a.id).d[k] += g(y.id).d[k];
        if (rg(b.id))
            for (size_t k = 0; k < g(b.id).size(); ++k) g(b.id).d[k] += g(y.id).d[k];
    }});
    return y;
}

Tape::TensorRef Tape::mul(TensorRef a, TensorRef b) {
    if (!slots_[a.id].value.same_shape(slots_[b.id].value))
        throw NumericError("mul shape mismatch");
    Mat out = slots_[a.id].value;
    for (size_t k = 0; k < out.size(); ++k) out.d[k] *= slots_[b.id].value.d[k];
    TensorRef y = create(std::move(out), rg(a.id) || rg(b.id));
    nodes_.push_back({[this, a, b, y] {
        if (rg(a.id))
            for (size_t k = 0; k < g(a.id).size(); ++k)
                g(a.id).d[k] += g(y.id).d[k] * slots_[b.id].value.d[k];
        if (rg(b.id))
            for (size_t k = 0; k < g(b.id).size(); ++k)
                g(b.id).d[k] += g(y.id).d[k] * slots_[a.id].value.d[k];
    }});
    return y;
}

Tape::TensorRef Tape::scale(TensorRef a, double k) {
    Mat out = slots_[a.id].value;
    for (auto& v : out.d) v *= k;
    TensorRef y = create(std::move(out), rg(a.id));
    nodes_.push_back({[this, a, y, k] {
        if (rg(a.id))
            for (size_t t = 0; t < g(a.id).size(); ++t) g(a.id).d[t] += k * g(y.id).d[t];
    }});
    return y;
}

Tape::TensorRef Tape::add_row_broadcast(TensorRef a, TensorRef row) {
    const Mat& r = slots_[row.id].value;
    if (r.rows != 1 || r.cols != a.cols) throw NumericError("bias shape mismatch");
    Mat out = slots_[a.id].value;
    for (int i = 0; i < out.rows; ++i)
        for (int j = 0; j < out.cols; ++j) out(i, j) += r(0, j);
    TensorRef y = create(std::move(out), rg(a.id) || rg(row.id));
    nodes_.push_back({[this, a, row, y] {
        if (rg(a.id))
            for (size_t k = 0; k < g(a.id).size(); ++k) g(a.id).d[k] += g(y.id).d[k];
        if (rg(row.id)) {
            Mat& gr = g(row.id);
            const Mat& gy = g(y.id);
            for (int i = 0; i < gy.rows; ++i)
                for (int j = 0; j < gy.cols; ++j) gr(0, j) += gy(i, j);
        }
    }});
    return y;
}

Tape::TensorRef Tape::relu(TensorRef a) {
    Mat out = slots_[a.id].value;
    for (auto& v : out.d) v = v > 0.0 ? v : 0.0;
    TensorRef y = create(std::move(out), rg(a.id));
    nodes_.push_back({[this, a, y] {
        if (!rg(a.id)) return;
        for (size_t k = 0; k < g(a.id).size(); ++k)
            if (slots_[a.id].value.d[k] > 0.0) g(a.id).d[k] += g(y.id).d[k];
    }});
    return y;
}

Tape::TensorRef Tape::row_normalize(TensorRef a) {
    const Mat& x = slots_[a.id].value;
    Mat out(x.rows, x.cols);
    std::vector<double> norms(x.rows);
    for (int i = 0; i < x.rows; ++i) {
        double n2 = 0.0;
        for (int j = 0; j < x.cols; ++j) n2 += x(i, j) * x(i, j);
        double n = std::sqrt(std::max(n2, 1e-300));
        norms[i] = n;
        for (int j = 0; j < x.cols; ++j) out(i, j) = x(i, j) / n;
    }
    TensorRef y = create(std::move(out), rg(a.id));
    nodes_.push_back({[this, a, y, norms = std::move(norms)] {
        if (!rg(a.id)) return;
        const Mat& yv = slots_[y.id].value;
        const Mat& gy = g(y.id);
        Mat& ga = g(a.id);
        for (int i = 0; i < yv.rows; ++i) {
            double proj = 0.0;
            for (int j = 0; j < yv.cols; ++j) proj += gy(i, j) * yv(i, j);
            for (int j = 0; j < yv.cols; ++j)
                ga(i, j) += (gy(i, j) - proj * yv(i, j)) / norms[i];
        }
    }});
    return y;
}

Tape::TensorRef Tape::sum(TensorRef a) {
    double acc = 0.0;
    for (double v : slots_[a.id].value.d) acc += v;
    Mat out(1, 1);
    out(0, 0) = acc;
    TensorRef y = create(std::move(out), rg(a.id));
    nodes_.push_back({[this, a, y] {
        if (!rg(a.id)) return;
        double gy = g(y.id)(0, 0);
        for (auto& v : g(a.id).d) v += gy;
    }});
    return y;
}

Tape::TensorRef Tape::cos_of(TensorRef a) {
    Mat out = slots_[a.id].value;
    for (auto& v : out.d) v = std::cos(v);
    TensorRef y = create(std::move(out), rg(a.id));
    nodes_.push_back({[this, a, y] {
        if (!rg(a.id)) return;
        for (size_t k = 0; k < g(a.id).size(); ++k)
            g(a.id).d[k] -= g(y.id).d[k] * std::sin(slots_[a.id].value.d[k]);
    }});
    return y;
}

Tape::TensorRef Tape::sin_of(TensorRef a) {
    Mat out = slots_[a.id].value;
    for (auto& v : out.d) v = std::sin(v);
    TensorRef y = create(std::move(out), rg(a.id));
    nodes_.push_back({[this, a, y] {
        if (!rg(a.id)) return;
        for (size_t k = 0; k < g(a.id).size(); ++k)
            g(a.id).d[k] += g(y.id).d[k] * std::cos(slots_[a.id].value.d[k]);
    }});
    return y;
}

Tape::TensorRef Tape::theta_from_raw(TensorRef raw) {
    Mat out = slots_[raw.id].value;
    for (auto& v : out.d) v = kQuarterPi * (1.0 + std::tanh(v));
    TensorRef y = create(std::move(out), rg(raw.id));
    nodes_.push_back({[this, raw, y] {
        if (!rg(raw.id)) return;
        for (size_t k = 0; k < g(raw.id).size(); ++k) {
            double th = std::tanh(slots_[raw.id].value.d[k]);
            g(raw.id).d[k] += g(y.id).d[k] * kQuarterPi * (1.0 - th * th);
        }
    }});
    return y;
}

Tape::TensorRef Tape::rsqrt_floor(TensorRef a, double eps) {
    const Mat& x = slots_[a.id].value;
    Mat out(x.rows, x.cols);
    for (size_t k = 0; k < x.size(); ++k) out.d[k] = 1.0 / std::sqrt(std::max(x.d[k], eps));
    TensorRef y = create(std::move(out), rg(a.id));
    nodes_.push_back({[this, a, y, eps] {
        if (!rg(a.id)) return;
        for (size_t k = 0; k < g(a.id).size(); ++k) {
            double x = slots_[a.id].value.d[k];
            if (x > eps) {
                double r = slots_[y.id].value.d[k];
                g(a.id).d[k] += g(y.id).d[k] * (-0.5) * r * r * r;
            }
        }
    }});
    return y;
}

Tape::DegreePair Tape::fuzzy_degrees(const kernels::GatherPlan& plan, TensorRef c, TensorRef s) {
    Mat din(1, plan.n_nodes), dout(1, plan.n_nodes);
    kernels::fuzzy_degrees(plan, slots_[c.id].value.d.data(), slots_[s.id].value.d.data(),
                           din.d.data(), dout.d.data());
    bool needs = rg(c.id) || rg(s.id);
    TensorRef ti = create(std::move(din), needs);
    TensorRef to = create(std::move(dout), needs);
    nodes_.push_back({[this, &plan, c, s, ti, to] {
        if (!(rg(c.id) || rg(s.id))) return;
        Mat gc(1, plan.n_edges), gs(1, plan.n_edges);
        kernels::fuzzy_degrees_backward(plan, g(ti.id).d.data(), g(to.id).d.data(), gc.d.data(),
                                        gs.d.data());
        if (rg(c.id))
            for (int e = 0; e < plan.n_edges; ++e) g(c.id).d[e] += gc.d[e];
        if (rg(s.id))
            for (int e = 0; e < plan.n_edges; ++e) g(s.id).d[e] += gs.d[e];
    }});
    return {ti, to};
}

Tape::MessagePair Tape::fuzzy_gather(const kernels::GatherPlan& plan, TensorRef c, TensorRef s,
                                     TensorRef r_in, TensorRef r_out, TensorRef f) {
    Mat m_in, m_out;
    kernels::fuzzy_gather(plan, slots_[c.id].value.d.data(), slots_[s.id].value.d.data(),
                          slots_[r_in.id].value.d.data(), slots_[r_out.id].value.d.data(),
                          slots_[f.id].value, m_in, m_out);
    bool needs = rg(c.id) || rg(s.id) || rg(r_in.id) || rg(r_out.id) || rg(f.id);
    TensorRef ti = create(std::move(m_in), needs);
    TensorRef to = create(std::move(m_out), needs);
    nodes_.push_back({[this, &plan, c, s, r_in, r_out, f, ti, to] {
        bool any = rg(c.id) || rg(s.id) || rg(r_in.id) || rg(r_out.id) || rg(f.id);
        if (!any) return;
        Mat gf(slots_[f.id].value.rows, slots_[f.id].value.cols);
        Mat gc(1, plan.n_edges), gs(1, plan.n_edges);
        Mat gri(1, plan.n_nodes), gro(1, plan.n_nodes);
        kernels::fuzzy_gather_backward(
            plan, slots_[c.id].value.d.data(), slots_[s.id].value.d.data(),
            slots_[r_in.id].value.d.data(), slots_[r_out.id].value.d.data(), slots_[f.id].value,
            g(ti.id), g(to.id), gf, gc.d.data(), gs.d.data(), gri.d.data(), gro.d.data());
        if (rg(f.id))
            for (size_t k = 0; k < gf.size(); ++k) g(f.id).d[k] += gf.d[k];
        if (rg(c.id))
            for (int e = 0; e < plan.n_edges; ++e) g(c.id).d[e] += gc.d[e];
        if (rg(s.id))
            for (int e = 0; e < plan.n_edges; ++e) g(s.id).d[e] += gs.d[e];
        if (rg(r_in.id))
            for (int i = 0; i < plan.n_nodes; ++i) g(r_in.id).d[i] += gri.d[i];
        if (rg(r_out.id))
            for (int i = 0; i < plan.n_nodes; ++i) g(r_out.id).d[i] += gro.d[i];
    }});
    return {ti, to};
}

Tape::TensorRef Tape::masked_mse(TensorRef pred, TensorRef target,
                                 const std::vector<uint8_t>& keep) {
    const Mat& p = slots_[pred.id].value;
    const Mat& t = slots_[target.id].value;
    if (!p.same_shape(t)) throw NumericError("masked_mse shape mismatch");
    if (static_cast<int>(keep.size()) != p.rows) throw NumericError("mask length mismatch");
    long kept = 0;
    for (auto k : keep) kept += k ? 1 : 0;
    if (kept == 0) throw NumericError("all rows masked out of the loss");
    const double denom = static_cast<double>(kept) * p.cols;
    double acc = 0.0;
    for (int i = 0; i < p.rows; ++i) {
        if (!keep[i]) continue;
        for (int j = 0; j < p.cols; ++j) {
            double d = p(i, j) - t(i, j);
            acc += d * d;
        }
    }
    Mat out(1, 1);
    out(0, 0) = acc / denom;
    TensorRef y = create(std::move(out), rg(pred.id) || rg(target.id));
    nodes_.push_back({[this, pred, target, y, keep, denom] {
        double gy = g(y.id)(0, 0);
        const Mat& p = slots_[pred.id].value;
        const Mat& t = slots_[target.id].value;
        for (int i = 0; i < p.rows; ++i) {
            if (!keep[i]) continue;
            for (int j = 0; j < p.cols; ++j) {
                double d = 2.0 * (p(i, j) - t(i, j)) / denom * gy;
                if (rg(pred.id)) g(pred.id)(i, j) += d;
                if (rg(target.id)) g(target.id)(i, j) -= d;
            }
        }
    }});
    return y;
}

void Tape::backward(TensorRef loss) {
    if (loss.rows != 1 || loss.cols != 1) throw NumericError("backward requires a scalar loss");
    if (!rg(loss.id)) throw NumericError("loss is detached from every parameter");
    g(loss.id)(0, 0) = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->back();
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) throw NumericError("pearson input mismatch");
    double ma = 0.0, mb = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
        ma += a[k];
        mb += b[k];
    }
    ma /= a.size();
    mb /= b.size();
    double num = 0.0, va = 0.0, vb = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
        num += (a[k] - ma) * (b[k] - mb);
        va += (a[k] - ma) * (a[k] - ma);
        vb += (b[k] - mb) * (b[k] - mb);
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return num / std::sqrt(va * vb);
}

}  // namespace coed
