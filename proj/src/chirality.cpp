#include "chirality_lab/chirality.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <queue>

#include "chirality_lab/io.hpp"
#include "chirality_lab/spectral.hpp"
#include "json.hpp"

namespace chirality_lab {

namespace {

using Mat = Eigen::MatrixXd;

Mat node_matrix(const RealMatrixField& F, std::size_t i) {
    Mat M(F.rows, F.cols);
    for (int r = 0; r < F.rows; ++r)
        for (int c = 0; c < F.cols; ++c) M(r, c) = F(r, c)[i];
    return M;
}

void store(RealMatrixField& F, std::size_t i, const Mat& M) {
    for (int r = 0; r < F.rows; ++r)
        for (int c = 0; c < F.cols; ++c) F(r, c)[i] = M(r, c);
}

Mat s0(int n, int m) {
    Mat M = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) M(i, i) = i < m ? 1.0 : -1.0;
    return M;
}

// Rotate the columns of V (within its span) to best match T.
void procrustes_align(Eigen::Ref<Mat> V, const Eigen::Ref<const Mat>& T) {
    if (V.cols() == 0) return;
    Eigen::JacobiSVD<Mat> svd(V.transpose() * T, Eigen::ComputeFullU | Eigen::ComputeFullV);
    V = V * (svd.matrixU() * svd.matrixV().transpose());
}

void align_frame(Mat& frame, const Mat& target, int m) {
    const int n = static_cast<int>(frame.rows());
    procrustes_align(frame.leftCols(m), target.leftCols(m));
    procrustes_align(frame.rightCols(n - m), target.rightCols(n - m));
    if (frame.determinant() < 0) {
        // Flip the column that agrees least with the target.
        int worst = 0;
        double best = 1e300;
        for (int c = 0; c < n; ++c) {
            const double agree = frame.col(c).dot(target.col(c));
            if (agree < best) best = agree, worst = c;
        }
        frame.col(worst) *= -1.0;
    }
}

double rotation_gap(const Mat& a, const Mat& b) {
    Eigen::JacobiSVD<Mat> svd(a - b);
    const double s = std::min(1.0, svd.singularValues()(0) / 2.0);
    return 2.0 * std::asin(s);
}

}  // namespace

std::vector<double> s0_matrix(int n, int m) {
    if (n < 1 || m < 0 || m > n)
        throw std::invalid_argument("s0_matrix: need 0 <= m <= n, got n=" + std::to_string(n) +
                                    " m=" + std::to_string(m));
    std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) out[i * n + i] = i < m ? 1.0 : -1.0;
    return out;
}

InvariantReport check_invariants(const ChiralityField& c) {
    const int n = c.n();
    const double trace_target = 2.0 * c.m - n;
    const double det_target = (n - c.m) % 2 == 0 ? 1.0 : -1.0;
    const Mat I = Mat::Identity(n, n);
    InvariantReport r;
    for (std::size_t i = 0; i < c.grid().size(); ++i) {
        const Mat S = node_matrix(c.S, i);
        r.symmetry = std::max(r.symmetry, (S - S.transpose()).cwiseAbs().maxCoeff());
        r.orthogonality = std::max(r.orthogonality, (S.transpose() * S - I).cwiseAbs().maxCoeff());
        r.involution = std::max(r.involution, (S * S - I).cwiseAbs().maxCoeff());
        r.trace_deviation = std::max(r.trace_deviation, std::abs(S.trace() - trace_target));
        r.det_deviation = std::max(r.det_deviation, std::abs(S.determinant() - det_target));
    }
    return r;
}

ChiralityField make_chirality(const RealMatrixField& Q, int m) {
    if (Q.rows != Q.cols) throw NotOrthogonal("make_chirality: Q must be square");
    const int n = Q.rows;
    s0_matrix(n, m);
    const Mat base = s0(n, m);
    const Mat I = Mat::Identity(n, n);
    ChiralityField out;
    out.S = RealMatrixField(Q.grid, n, n);
    out.m = m;
    for (std::size_t i = 0; i < Q.grid.size(); ++i) {
        const Mat q = node_matrix(Q, i);
        const double orth = (q.transpose() * q - I).cwiseAbs().maxCoeff();
        const double det = q.determinant();
        if (orth > 1e-10 || std::abs(det - 1.0) > 1e-10)
            throw NotOrthogonal("make_chirality: Q is not in SO(n) at node " + std::to_string(i) +
                                " (|Q^T Q - I| = " + std::to_string(orth) + ", det = " + std::to_string(det) + ")");
        Mat S = q * base * q.transpose();
        S = 0.5 * (S + S.transpose());
        store(out.S, i, S);
    }
    out.Q = Q;
    return out;
}

RealMatrixField rotation_field(const RealField& angle) {
    RealMatrixField R(angle.grid, 2, 2);
    for (std::size_t i = 0; i < angle.size(); ++i) {
        const double c = std::cos(angle[i]), s = std::sin(angle[i]);
        R(0, 0)[i] = c;
        R(0, 1)[i] = -s;
        R(1, 0)[i] = s;
        R(1, 1)[i] = c;
    }
    return R;
}

ChiralityField chirality_from_angle(const RealField& angle) {
    ChiralityField c = make_chirality(rotation_field(angle), 1);
    c.alpha = angle;
    return c;
}

Projections projections(const ChiralityField& c) {
    const int n = c.n();
    Projections p{RealMatrixField(c.grid(), n, n), RealMatrixField(c.grid(), n, n)};
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const RealField& s = c.S(a, b);
            auto& L = p.left(a, b).values;
            auto& R = p.right(a, b).values;
            const double id = a == b ? 1.0 : 0.0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                L[i] = 0.5 * (id + s[i]);
                R[i] = 0.5 * (id - s[i]);
            }
        }
    return p;
}

std::pair<int, int> projector_rank_range(const RealMatrixField& P) {
    int lo = P.rows, hi = 0;
    for (std::size_t i = 0; i < P.grid.size(); ++i) {
        Eigen::SelfAdjointEigenSolver<Mat> es(node_matrix(P, i), Eigen::EigenvaluesOnly);
        const int r = static_cast<int>((es.eigenvalues().array() > 0.5).count());
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return {lo, hi};
}

double dirichlet_norm(const RealMatrixField& M) {
    double s = 0.0;
    for (const auto& e : M.entries) {
        const double a = l2(d1(e)), b = l2(d2(e));
        s += a * a + b * b;
    }
    return std::sqrt(s);
}

RealMatrixField random_rotation_field(const Grid2& g, int n, Rng& rng, int max_mode, double amplitude) {
    std::vector<RealField> gen;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            const RealField r = random_band_limited(g, rng, max_mode, 1.5, false);
            gen.push_back(scaled(r, 1.0 / std::max(max_abs(r), 1e-300)));
        }
    RealMatrixField Q(g, n, n);
    for (std::size_t i = 0; i < g.size(); ++i) {
        Mat A = Mat::Zero(n, n);
        int k = 0;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b, ++k) {
                A(a, b) = amplitude * gen[k][i];
                A(b, a) = -A(a, b);
            }
        store(Q, i, A.exp());
    }
    return Q;
}

FrameExtraction extract_frame(const ChiralityField& c, double energy_threshold) {
    const int n = c.n(), m = c.m;
    const Grid2& g = c.grid();
    const std::size_t N = g.size();
    std::vector<Mat> frames(N);

    // Eigenvalues come out ascending: the -1 block first. Reorder to (+1 block | -1 block).
    for (std::size_t i = 0; i < N; ++i) {
        Eigen::SelfAdjointEigenSolver<Mat> es(node_matrix(c.S, i));
        const Mat& V = es.eigenvectors();
        Mat F(n, n);
        F.leftCols(m) = V.rightCols(m);
        F.rightCols(n - m) = V.leftCols(n - m);
        frames[i] = F;
    }

    std::vector<char> seen(N, 0);
    std::queue<std::pair<int, int>> bfs;
    align_frame(frames[0], Mat::Identity(n, n), m);
    seen[0] = 1;
    bfs.push({0, 0});
    const int dp[4] = {1, -1, 0, 0}, dq[4] = {0, 0, 1, -1};
    while (!bfs.empty()) {
        const auto [p, q] = bfs.front();
        bfs.pop();
        const std::size_t here = g.index(p, q);
        for (int k = 0; k < 4; ++k) {
            const int pp = (p + dp[k] + g.n) % g.n, qq = (q + dq[k] + g.n) % g.n;
            const std::size_t there = g.index(pp, qq);
            if (seen[there]) continue;
            align_frame(frames[there], frames[here], m);
            seen[there] = 1;
            bfs.push({pp, qq});
        }
    }

    FrameExtraction out;
    out.Q = RealMatrixField(g, n, n);
    const Mat base = s0(n, m);
    for (std::size_t i = 0; i < N; ++i) {
        store(out.Q, i, frames[i]);
        const Mat back = frames[i] * base * frames[i].transpose();
        out.conjugation_residual =
            std::max(out.conjugation_residual, (back - node_matrix(c.S, i)).cwiseAbs().maxCoeff());
    }
    for (int p = 0; p < g.n; ++p)
        for (int q = 0; q < g.n; ++q) {
            const Mat& a = frames[g.index(p, q)];
            out.max_frame_jump = std::max(out.max_frame_jump, rotation_gap(a, frames[g.index((p + 1) % g.n, q)]));
            out.max_frame_jump = std::max(out.max_frame_jump, rotation_gap(a, frames[g.index(p, (q + 1) % g.n)]));
        }
    out.alignment_failure = out.max_frame_jump > std::numbers::pi / 2;
    out.energy_S = dirichlet_norm(c.S);
    out.energy_Q = dirichlet_norm(out.Q);
    out.energy_ratio = out.energy_S > 0 ? out.energy_Q / out.energy_S : 0.0;
    out.above_threshold = out.energy_S > energy_threshold;
    return out;
}

void save_chirality(const ChiralityField& c, const std::string& base) {
    const int n = c.n();
    const std::size_t N = c.grid().size();
    std::string blob(N * n * n * sizeof(double), '\0');
    auto* dst = reinterpret_cast<double*>(blob.data());
    for (std::size_t i = 0; i < N; ++i)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) *dst++ = c.S(a, b)[i];
    nlohmann::ordered_json h;
    h["n"] = n;
    h["m"] = c.m;
    h["grid_n"] = c.grid().n;
    h["length"] = c.grid().length;
    h["origin_singular"] = c.grid().origin_singular;
    atomic_write(base + ".bin", blob);
    atomic_write(base + ".json", h.dump(2) + "\n");
}

ChiralityField load_chirality(const std::string& base) {
    const auto h = nlohmann::json::parse(read_file(base + ".json"));
    const int n = h.at("n").get<int>();
    const Grid2 g(h.at("grid_n").get<int>(), h.at("length").get<double>(), h.value("origin_singular", false));
    const std::string blob = read_file(base + ".bin");
    if (blob.size() != g.size() * n * n * sizeof(double))
        throw std::runtime_error("load_chirality: blob size does not match header");
    ChiralityField c;
    c.m = h.at("m").get<int>();
    c.S = RealMatrixField(g, n, n);
    const char* src = blob.data();
    for (std::size_t i = 0; i < g.size(); ++i)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b, src += sizeof(double)) std::memcpy(&c.S(a, b)[i], src, sizeof(double));
    return c;
}

}  // namespace chirality_lab
