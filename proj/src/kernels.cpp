#include "coed/kernels.hpp"

#include <algorithm>
#include <cassert>

namespace coed::kernels {

namespace {

inline void gemm_nn_row(const Mat& a, const Mat& b, Mat& c, int i) {
    double* ci = c.row(i);
    std::fill(ci, ci + c.cols, 0.0);
    const double* ai = a.row(i);
    for (int l = 0; l < a.cols; ++l) {
        const double al = ai[l];
        const double* bl = b.row(l);
        for (int j = 0; j < b.cols; ++j) ci[j] += al * bl[j];
    }
}

inline void gemm_nt_row(const Mat& a, const Mat& b, Mat& c, int i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (int j = 0; j < b.rows; ++j) {
        const double* bj = b.row(j);
        double acc = 0.0;
        for (int l = 0; l < a.cols; ++l) acc += ai[l] * bj[l];
        ci[j] = acc;
    }
}

inline void gemm_tn_row(const Mat& a, const Mat& b, Mat& c, int i) {
    // c[i, :] = sum_l a[l, i] * b[l, :]
    double* ci = c.row(i);
    std::fill(ci, ci + c.cols, 0.0);
    for (int l = 0; l < a.rows; ++l) {
        const double al = a(l, i);
        const double* bl = b.row(l);
        for (int j = 0; j < b.cols; ++j) ci[j] += al * bl[j];
    }
}

}  // namespace

void gemm_nn(const Mat& a, const Mat& b, Mat& c) {
    assert(a.cols == b.rows);
    c = Mat(a.rows, b.cols);
#pragma omp parallel for schedule(static) if (a.rows > 63)
    for (int i = 0; i < a.rows; ++i) gemm_nn_row(a, b, c, i);
}

void gemm_nt(const Mat& a, const Mat& b, Mat& c) {
    assert(a.cols == b.cols);
    c = Mat(a.rows, b.rows);
#pragma omp parallel for schedule(static) if (a.rows > 63)
    for (int i = 0; i < a.rows; ++i) gemm_nt_row(a, b, c, i);
}

void gemm_tn(const Mat& a, const Mat& b, Mat& c) {
    assert(a.rows == b.rows);
    c = Mat(a.cols, b.cols);
#pragma omp parallel for schedule(static) if (a.cols > 63)
    for (int i = 0; i < a.cols; ++i) gemm_tn_row(a, b, c, i);
}

void gemm_nn_serial(const Mat& a, const Mat& b, Mat& c) {
    c = Mat(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) gemm_nn_row(a, b, c, i);
}

void gemm_nt_serial(const Mat& a, const Mat& b, Mat& c) {
    c = Mat(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) gemm_nt_row(a, b, c, i);
}

void gemm_tn_serial(const Mat& a, const Mat& b, Mat& c) {
    c = Mat(a.cols, b.cols);
    for (int i = 0; i < a.cols; ++i) gemm_tn_row(a, b, c, i);
}

GatherPlan GatherPlan::build(const FuzzyDiGraph& graph) {
    GatherPlan plan;
    plan.n_nodes = graph.n_nodes();
    plan.n_edges = graph.n_edges();
    plan.node_ptr.assign(plan.n_nodes + 1, 0);
    plan.edge_endpoints.reserve(plan.n_edges);
    for (const auto& e : graph.edges()) {
        plan.node_ptr[e.i + 1]++;
        plan.node_ptr[e.j + 1]++;
        plan.edge_endpoints.emplace_back(e.i, e.j);
    }
    for (int i = 0; i < plan.n_nodes; ++i) plan.node_ptr[i + 1] += plan.node_ptr[i];
    plan.incident.resize(2 * plan.n_edges);
    std::vector<int> cursor(plan.node_ptr.begin(), plan.node_ptr.end() - 1);
    for (int e = 0; e < plan.n_edges; ++e) {
        auto [i, j] = plan.edge_endpoints[e];
        plan.incident[cursor[i]++] = {e, j, true};
        plan.incident[cursor[j]++] = {e, i, false};
    }
    return plan;
}

void fuzzy_degrees(const GatherPlan& plan, const double* c, const double* s, double* d_in,
                   double* d_out) {
#pragma omp parallel for schedule(static) if (plan.n_nodes > 255)
    for (int i = 0; i < plan.n_nodes; ++i) {
        double din = 0.0, dout = 0.0;
        for (int k = plan.node_ptr[i]; k < plan.node_ptr[i + 1]; ++k) {
            const auto& inc = plan.incident[k];
            // Re entry seen from the canonical side is cos(theta); from the
            // other side it is cos(pi/2 - theta) = sin(theta).
            if (inc.fwd) {
                din += c[inc.edge];
                dout += s[inc.edge];
            } else {
                din += s[inc.edge];
                dout += c[inc.edge];
            }
        }
        d_in[i] = din;
        d_out[i] = dout;
    }
}

void fuzzy_degrees_backward(const GatherPlan& plan, const double* gd_in, const double* gd_out,
                            double* gc, double* gs) {
#pragma omp parallel for schedule(static) if (plan.n_edges > 511)
    for (int e = 0; e < plan.n_edges; ++e) {
        auto [i, j] = plan.edge_endpoints[e];
        gc[e] = gd_in[i] + gd_out[j];
        gs[e] = gd_in[j] + gd_out[i];
    }
}

namespace {

inline void gather_node(const GatherPlan& plan, const double* c, const double* s,
                        const double* r_in, const double* r_out, const Mat& f, Mat& m_in,
                        Mat& m_out, int i) {
    const int d = f.cols;
    double* mi = m_in.row(i);
    double* mo = m_out.row(i);
    std::fill(mi, mi + d, 0.0);
    std::fill(mo, mo + d, 0.0);
    for (int k = plan.node_ptr[i]; k < plan.node_ptr[i + 1]; ++k) {
        const auto& inc = plan.incident[k];
        const double* fn = f.row(inc.nbr);
        const double w_in = inc.fwd ? c[inc.edge] : s[inc.edge];
        const double w_out = inc.fwd ? s[inc.edge] : c[inc.edge];
        const double kin = r_in[i] * w_in * r_out[inc.nbr];
        const double kout = r_out[i] * w_out * r_in[inc.nbr];
        for (int t = 0; t < d; ++t) {
            mi[t] += kin * fn[t];
            mo[t] += kout * fn[t];
        }
    }
}

inline double dot(const double* a, const double* b, int n) {
    double acc = 0.0;
    for (int t = 0; t < n; ++t) acc += a[t] * b[t];
    return acc;
}

}  // namespace

void fuzzy_gather(const GatherPlan& plan, const double* c, const double* s, const double* r_in,
                  const double* r_out, const Mat& f, Mat& m_in, Mat& m_out) {
    m_in = Mat(plan.n_nodes, f.cols);
    m_out = Mat(plan.n_nodes, f.cols);
#pragma omp parallel for schedule(static) if (plan.n_nodes > 255)
    for (int i = 0; i < plan.n_nodes; ++i)
        gather_node(plan, c, s, r_in, r_out, f, m_in, m_out, i);
}

void fuzzy_gather_serial(const GatherPlan& plan, const double* c, const double* s,
                         const double* r_in, const double* r_out, const Mat& f, Mat& m_in,
                         Mat& m_out) {
    m_in = Mat(plan.n_nodes, f.cols);
    m_out = Mat(plan.n_nodes, f.cols);
    for (int i = 0; i < plan.n_nodes; ++i)
        gather_node(plan, c, s, r_in, r_out, f, m_in, m_out, i);
}

void fuzzy_gather_backward(const GatherPlan& plan, const double* c, const double* s,
                           const double* r_in, const double* r_out, const Mat& f,
                           const Mat& gm_in, const Mat& gm_out, Mat& gf, double* gc, double* gs,
                           double* gr_in, double* gr_out) {
    const int d = f.cols;

    // d(loss)/d(f): transpose of the gather; node-parallel over rows of gf.
#pragma omp parallel for schedule(static) if (plan.n_nodes > 255)
    for (int j = 0; j < plan.n_nodes; ++j) {
        double* gfj = gf.row(j);
        for (int k = plan.node_ptr[j]; k < plan.node_ptr[j + 1]; ++k) {
            const auto& inc = plan.incident[k];
            const int i = inc.nbr;  // message that consumed f[j]
            const double w_in = inc.fwd ? s[inc.edge] : c[inc.edge];
            const double w_out = inc.fwd ? c[inc.edge] : s[inc.edge];
            const double kin = r_in[i] * w_in * r_out[j];
            const double kout = r_out[i] * w_out * r_in[j];
            const double* gi = gm_in.row(i);
            const double* go = gm_out.row(i);
            for (int t = 0; t < d; ++t) gfj[t] += kin * gi[t] + kout * go[t];
        }
    }

    // d(loss)/d(c), d(loss)/d(s): edge-parallel, each edge owns its slots.
#pragma omp parallel for schedule(static) if (plan.n_edges > 511)
    for (int e = 0; e < plan.n_edges; ++e) {
        auto [i, j] = plan.edge_endpoints[e];
        // c contributes to m_in[i] (from f[j]) and m_out[j] (from f[i]).
        gc[e] = r_in[i] * r_out[j] * dot(gm_in.row(i), f.row(j), d) +
                r_out[j] * r_in[i] * dot(gm_out.row(j), f.row(i), d);
        // s contributes to m_in[j] (from f[i]) and m_out[i] (from f[j]).
        gs[e] = r_in[j] * r_out[i] * dot(gm_in.row(j), f.row(i), d) +
                r_out[i] * r_in[j] * dot(gm_out.row(i), f.row(j), d);
    }

    // d(loss)/d(r_in), d(loss)/d(r_out): node-parallel.
#pragma omp parallel for schedule(static) if (plan.n_nodes > 255)
    for (int i = 0; i < plan.n_nodes; ++i) {
        double acc_in = 0.0, acc_out = 0.0;
        const double* gi = gm_in.row(i);
        const double* go = gm_out.row(i);
        const double* fi = f.row(i);
        for (int k = plan.node_ptr[i]; k < plan.node_ptr[i + 1]; ++k) {
            const auto& inc = plan.incident[k];
            const int j = inc.nbr;
            const double w_in = inc.fwd ? c[inc.edge] : s[inc.edge];
            const double w_out = inc.fwd ? s[inc.edge] : c[inc.edge];
            // r_in[i] scales every term of m_in[i]; r_in[i] also appears in
            // m_out[j] as the neighbor-side factor (and symmetrically for
            // r_out).
            acc_in += w_in * r_out[j] * dot(gi, f.row(j), d);
            acc_in += r_out[j] * w_in * dot(gm_out.row(j), fi, d);
            acc_out += w_out * r_in[j] * dot(go, f.row(j), d);
            acc_out += r_in[j] * w_out * dot(gm_in.row(j), fi, d);
        }
        gr_in[i] = acc_in;
        gr_out[i] = acc_out;
    }
}

}  // namespace coed::kernels
