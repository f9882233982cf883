#pragma once

#include "coed/graph.hpp"

namespace coed::kernels {

// Dense matrix products. The OpenMP variants parallelize over output rows;
// each row is accumulated in the same order as the serial code, so results
// are bitwise identical for any thread count.

void gemm_nn(const Mat& a, const Mat& b, Mat& c);          // c = a * b
void gemm_nt(const Mat& a, const Mat& b, Mat& c);          // c = a * b^T
void gemm_tn(const Mat& a, const Mat& b, Mat& c);          // c = a^T * b

void gemm_nn_serial(const Mat& a, const Mat& b, Mat& c);
void gemm_nt_serial(const Mat& a, const Mat& b, Mat& c);
void gemm_tn_serial(const Mat& a, const Mat& b, Mat& c);

// Node-major view of the edge list: for every node, its incident edges with
// the canonical orientation flag and the opposite endpoint. Both the forward
// aggregation and every backward scatter loop over nodes (or edges) so no two
// threads write the same output.
struct GatherPlan {
    struct Incidence {
        int edge;  // index into the canonical edge list
        int nbr;   // opposite endpoint
        bool fwd;  // true when this node is the canonical i of the edge
    };
    int n_nodes = 0;
    int n_edges = 0;
    std::vector<int> node_ptr;        // size n_nodes + 1
    std::vector<Incidence> incident;  // grouped by node, edge-sorted

    std::vector<std::pair<int, int>> edge_endpoints;  // canonical (i, j)

    static GatherPlan build(const FuzzyDiGraph& graph);
};

// Degrees of the fuzzy adjacency split: d_in[i] = sum of Re entries of row i,
// d_out[i] = sum of Im entries. c and s hold cos(theta) / sin(theta) per
// canonical edge.
void fuzzy_degrees(const GatherPlan& plan, const double* c, const double* s, double* d_in,
                   double* d_out);

void fuzzy_degrees_backward(const GatherPlan& plan, const double* gd_in, const double* gd_out,
                            double* gc, double* gs);

// m_in = P_in * f and m_out = P_out * f where P_in/P_out are the degree
// normalized propagation matrices assembled on the fly from c, s and the
// inverse square-root degree vectors r_in, r_out.
void fuzzy_gather(const GatherPlan& plan, const double* c, const double* s, const double* r_in,
                  const double* r_out, const Mat& f, Mat& m_in, Mat& m_out);

void fuzzy_gather_serial(const GatherPlan& plan, const double* c, const double* s,
                         const double* r_in, const double* r_out, const Mat& f, Mat& m_in,
                         Mat& m_out);

// Accumulates gradients for every input of fuzzy_gather. Output buffers must
// be pre-sized; gf is accumulated into, the per-edge and per-node gradient
// buffers are overwritten.
void fuzzy_gather_backward(const GatherPlan& plan, const double* c, const double* s,
                           const double* r_in, const double* r_out, const Mat& f,
                           const Mat& gm_in, const Mat& gm_out, Mat& gf, double* gc, double* gs,
                           double* gr_in, double* gr_out);

}  // namespace coed::kernels
