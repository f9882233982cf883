#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "coed/kernels.hpp"
#include "coed/sparse.hpp"
#include "coed/tape.hpp"

using namespace coed;

namespace {

Mat random_mat(int r, int c, uint64_t seed, double scale = 1.0) {
    Mat m(r, c);
    Rng rng(seed);
    for (auto& v : m.d) v = scale * rng.normal();
    return m;
}

// Central-difference check of d(sum of f(inputs)) / d(inputs[which]) against
// the tape gradient. f rebuilds the graph from scratch on the given tape.
void check_grads(const std::vector<Mat>& inputs,
                 const std::function<Tape::TensorRef(Tape&, const std::vector<Tape::TensorRef>&)>& f,
                 double tol = 1e-6, double h = 1e-6) {
    Tape tape;
    std::vector<Tape::TensorRef> refs;
    for (const Mat& m : inputs) refs.push_back(tape.parameter(m));
    Tape::TensorRef loss = tape.sum(f(tape, refs));
    tape.backward(loss);

    for (size_t which = 0; which < inputs.size(); ++which) {
        const Mat& analytic = tape.grad(refs[which]);
        for (size_t k = 0; k < inputs[which].d.size(); ++k) {
            auto eval = [&](double delta) {
                std::vector<Mat> shifted = inputs;
                shifted[which].d[k] += delta;
                Tape t2;
                std::vector<Tape::TensorRef> r2;
                for (const Mat& m : shifted) r2.push_back(t2.constant(m));
                return t2.value(t2.sum(f(t2, r2)))(0, 0);
            };
            double numeric = (eval(h) - eval(-h)) / (2.0 * h);
            double denom = std::max({std::abs(analytic.d[k]), std::abs(numeric), 1.0});
            CHECK(std::abs(analytic.d[k] - numeric) / denom < tol);
        }
    }
}

}  // namespace

TEST_CASE("matmul gradients") {
    check_grads({random_mat(4, 3, 1), random_mat(3, 5, 2)},
                [](Tape& t, const std::vector<Tape::TensorRef>& r) {
                    return t.mul(t.matmul(r[0], r[1]), t.constant(random_mat(4, 5, 3)));
                });
}

TEST_CASE("add, mul, scale, add_row_broadcast gradients") {
    check_grads({random_mat(4, 4, 4), random_mat(4, 4, 5)},
                [](Tape& t, const std::vector<Tape::TensorRef>& r) {
                    return t.scale(t.mul(t.add(r[0], r[1]), r[0]), 0.7);
                });
    check_grads({random_mat(5, 3, 6), random_mat(1, 3, 7)},
                [](Tape& t, const std::vector<Tape::TensorRef>& r) {
                    return t.mul(t.add_row_broadcast(r[0], r[1]),
                                 t.constant(random_mat(5, 3, 8)));
                });
}

TEST_CASE("relu gradient away from the kink") {
    Mat a = random_mat(6, 6, 9);
    for (auto& v : a.d)
        if (std::abs(v) < 0.05) v = 0.1;  // keep clear of the nondifferentiable point
    check_grads({a}, [](Tape& t, const std::vector<Tape::TensorRef>& r) {
        return t.mul(t.relu(r[0]), t.constant(random_mat(6, 6, 10)));
    });
}

TEST_CASE("row_normalize gradient and forward") {
    Mat a = random_mat(5, 4, 11);
    Tape t;
    auto y = t.row_normalize(t.constant(a));
    for (int i = 0; i < 5; ++i) {
        double norm = 0.0;
        for (int j = 0; j < 4; ++j) norm += t.value(y)(i, j) * t.value(y)(i, j);
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    }
    check_grads({a}, [](Tape& t2, const std::vector<Tape::TensorRef>& r) {
        return t2.mul(t2.row_normalize(r[0]), t2.constant(random_mat(5, 4, 12)));
    });
}

TEST_CASE("trig and phase-squash gradients") {
    check_grads({random_mat(1, 7, 13)}, [](Tape& t, const std::vector<Tape::TensorRef>& r) {
        return t.mul(t.cos_of(r[0]), t.constant(random_mat(1, 7, 14)));
    });
    check_grads({random_mat(1, 7, 15)}, [](Tape& t, const std::vector<Tape::TensorRef>& r) {
        return t.mul(t.sin_of(r[0]), t.constant(random_mat(1, 7, 16)));
    });
    check_grads({random_mat(1, 7, 17)}, [](Tape& t, const std::vector<Tape::TensorRef>& r) {
        return t.mul(t.theta_from_raw(r[0]), t.constant(random_mat(1, 7, 18)));
    });
}

TEST_CASE("theta_from_raw maps into [0, pi/2] with pi/4 at zero") {
    Tape t;
    Mat raw(1, 3);
    raw(0, 0) = -50.0;
    raw(0, 1) = 0.0;
    raw(0, 2) = 50.0;
    const Mat& theta = t.value(t.theta_from_raw(t.constant(raw)));
    CHECK(theta(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(theta(0, 1) == doctest::Approx(kQuarterPi));
    CHECK(theta(0, 2) == doctest::Approx(kHalfPi).epsilon(1e-12));
}

TEST_CASE("rsqrt_floor gradient, with flat region below the floor") {
    Mat a(1, 4);
    a.d = {2.0, 0.5, 1e-15, 3.0};
    Tape t;
    auto ref = t.parameter(a);
    auto y = t.rsqrt_floor(ref, 1e-12);
    CHECK(t.value(y)(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(t.value(y)(0, 2) == doctest::Approx(1.0 / std::sqrt(1e-12)));
    t.backward(t.sum(y));
    CHECK(t.grad(ref)(0, 2) == 0.0);  // floored entries get no gradient
    CHECK(t.grad(ref)(0, 0) == doctest::Approx(-0.5 * std::pow(2.0, -1.5)).epsilon(1e-12));
}

TEST_CASE("fuzzy degree and gather gradients via finite differences") {
    FuzzyDiGraph g = random_fuzzy_graph(8, 0.4, 19);
    kernels::GatherPlan plan = kernels::GatherPlan::build(g);
    int m = g.n_edges(), n = g.n_nodes();
    Mat raw = random_mat(1, m, 20, 0.3);
    Mat f = random_mat(n, 3, 21);
    Mat weight = random_mat(n, 3, 22);
    check_grads({raw, f}, [&](Tape& t, const std::vector<Tape::TensorRef>& r) {
        auto theta = t.theta_from_raw(r[0]);
        auto c = t.cos_of(theta);
        auto s = t.sin_of(theta);
        auto deg = t.fuzzy_degrees(plan, c, s);
        auto r_in = t.rsqrt_floor(deg.d_in, kDegreeEpsilon);
        auto r_out = t.rsqrt_floor(deg.d_out, kDegreeEpsilon);
        auto msg = t.fuzzy_gather(plan, c, s, r_in, r_out, r[1]);
        return t.mul(t.add(msg.m_in, msg.m_out), t.constant(weight));
    });
}

TEST_CASE("masked_mse matches a plain loop and drops masked rows") {
    int n = 6, d = 3;
    Mat pred = random_mat(n, d, 23), target = random_mat(n, d, 24);
    std::vector<uint8_t> keep = {1, 0, 1, 1, 0, 1};
    Tape t;
    auto loss = t.masked_mse(t.constant(pred), t.constant(target), keep);
    double want = 0.0;
    int kept = 0;
    for (int i = 0; i < n; ++i) {
        if (!keep[i]) continue;
        ++kept;
        for (int j = 0; j < d; ++j) want += (pred(i, j) - target(i, j)) * (pred(i, j) - target(i, j));
    }
    want /= kept * d;
    CHECK(t.value(loss)(0, 0) == doctest::Approx(want).epsilon(1e-13));

    check_grads({pred}, [&](Tape& t2, const std::vector<Tape::TensorRef>& r) {
        return t2.masked_mse(r[0], t2.constant(target), keep);
    });

    // A masked row's prediction must not influence the gradient at all.
    Tape t3;
    auto p3 = t3.parameter(pred);
    t3.backward(t3.masked_mse(p3, t3.constant(target), keep));
    for (int j = 0; j < d; ++j) {
        CHECK(t3.grad(p3)(1, j) == 0.0);
        CHECK(t3.grad(p3)(4, j) == 0.0);
    }
}

TEST_CASE("pearson correlation oracle") {
    std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> y = {2.1, 3.9, 6.2, 8.0, 9.9};
    // Direct formula.
    double mx = 3.0, my = 0.0;
    for (double v : y) my += v / 5.0;
    double sxy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < 5; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    CHECK(pearson(x, y) == doctest::Approx(sxy / std::sqrt(sxx * syy)).epsilon(1e-14));
    CHECK(pearson(x, x) == doctest::Approx(1.0));
    std::vector<double> neg = {-1, -2, -3, -4, -5};
    CHECK(pearson(x, neg) == doctest::Approx(-1.0));
    std::vector<double> flat = {1, 1, 1, 1, 1};
    CHECK(pearson(x, flat) == 0.0);
}
