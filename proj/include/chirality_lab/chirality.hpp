#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chirality_lab/field.hpp"
#include "chirality_lab/random_fields.hpp"

namespace chirality_lab {

class NotOrthogonal : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// diag(+1 repeated m times, -1 repeated n - m times), row-major.
std::vector<double> s0_matrix(int n, int m);

// Symmetric orthogonal involution field with m eigenvalues +1.
struct ChiralityField {
    RealMatrixField S;
    int m = 0;
    std::optional<RealMatrixField> Q;  // S = Q S0 Q^T when present
    std::optional<RealField> alpha;    // n = 2 rotation angle of Q

    int n() const { return S.rows; }
    const Grid2& grid() const { return S.grid; }
};

struct InvariantReport {
    double symmetry = 0.0;      // max |S - S^T|
    double orthogonality = 0.0; // max |S^T S - I|
    double involution = 0.0;    // max |S^2 - I|
    double trace_deviation = 0.0;  // max |trace S - (2m - n)|
    double det_deviation = 0.0;    // max |det S - (-1)^(n-m)|

    bool holds(double tol = 1e-12) const {
        return symmetry <= tol && orthogonality <= tol && involution <= tol && trace_deviation <= tol &&
               det_deviation <= tol;
    }
};
InvariantReport check_invariants(const ChiralityField& c);

// S = Q S0 Q^T. Throws NotOrthogonal unless Q^T Q = I and det Q = 1 to 1e-10 at every node.
ChiralityField make_chirality(const RealMatrixField& Q, int m);

// Planar rotation field [[cos a, -sin a], [sin a, cos a]].
RealMatrixField rotation_field(const RealField& angle);
// make_chirality(rotation_field(angle), 1) with the angle attached.
ChiralityField chirality_from_angle(const RealField& angle);

struct Projections {
    RealMatrixField left;   // (I + S) / 2
    RealMatrixField right;  // (I - S) / 2
};
Projections projections(const ChiralityField& c);

// Pointwise matrix rank via eigenvalues above 1/2 (projector fields only); returns min and max over the grid.
std::pair<int, int> projector_rank_range(const RealMatrixField& P);

// (sum_ij ||grad M_ij||_2^2)^{1/2}, spectral derivatives.
double dirichlet_norm(const RealMatrixField& M);

// exp of a band-limited antisymmetric field whose entries have sup norm equal to amplitude.
RealMatrixField random_rotation_field(const Grid2& g, int n, Rng& rng, int max_mode, double amplitude);

struct FrameExtraction {
    RealMatrixField Q;
    double conjugation_residual = 0.0;  // max |Q S0 Q^T - S|
    double max_frame_jump = 0.0;        // largest rotation angle between neighbouring frames (radians)
    bool alignment_failure = false;     // some neighbouring jump exceeds pi/2
    double energy_S = 0.0;              // ||grad S||_2
    double energy_Q = 0.0;              // ||grad Q||_2
    double energy_ratio = 0.0;          // energy_Q / energy_S
    bool above_threshold = false;       // energy_S exceeds the smallness threshold
};

// Per-node eigendecomposition, then breadth-first Procrustes alignment from the origin node.
FrameExtraction extract_frame(const ChiralityField& c, double energy_threshold = 0.5);

// <base>.json header and <base>.bin with one row-major n x n matrix per node.
void save_chirality(const ChiralityField& c, const std::string& base);
ChiralityField load_chirality(const std::string& base);

}  // namespace chirality_lab
