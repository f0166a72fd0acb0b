#pragma once

// Passive completion: singular value thresholding (SVT) and alternating
// minimisation (AltMin) over a fixed observation mask.

#include <functional>
#include <vector>

#include "mclab/core.hpp"

namespace mclab::passive {

struct SvtConfig {
    double tau = 0.0;       // shrinkage threshold
    double delta = 1.0;     // step size, must lie in (0, 2)
    double epsilon = 1e-4;  // stop when ||P_Ω(Y - X)||_F / ||Y_obs||_F < epsilon
    int max_iters = 500;

    // tau = 5 (n + m) / 2, the remaining fields at their defaults.
    static SvtConfig defaults_for(int n, int m);
    // 1.2 n m / |Ω|; usually > 2 at moderate sampling rates, which validate() rejects.
    static double accelerated_step(int n, int m, std::size_t observed);

    void validate() const;
};

struct AltMinConfig {
    int rank = 1;
    int max_iters = 50;
    double ridge = 1e-8;  // added to each normal-equation diagonal
    double tol = 1e-9;    // stop when the relative objective change drops below this

    void validate() const;
};

struct FactorPair {
    Matrix U;  // n x r
    Matrix V;  // m x r

    int rank() const { return static_cast<int>(U.cols()); }
    Matrix product() const { return U * V.transpose(); }
};

struct TraceRecord {
    int iter = 0;
    double value = 0.0;  // relative residual (SVT) or objective (AltMin)
    double seconds = 0.0;
};

struct SolveTrace {
    std::vector<TraceRecord> records;
    bool converged = false;
    int iters_used = 0;
};

struct Completion {
    Matrix estimate;
    SolveTrace trace;
};

// U diag((σ_i - tau)_+) V^T from the SVD of x.
Matrix shrink_singular(const Matrix& x, double tau);

Completion svt_complete(const MaskedMatrix& obs, const SvtConfig& cfg);

// Rank-r truncated SVD of the zero-filled observations: U = U0, V = V0 Σ0.
FactorPair altmin_init(const MaskedMatrix& obs, int r);

// Each column j: argmin_v sum_{i in I_j} (u_i^T v - Y_ij)^2 + ridge ||v||^2.
// Columns with no observations keep their row of v_prev.
Matrix altmin_step_V(const MaskedMatrix& obs, const Matrix& U, const Matrix& v_prev, double ridge);
// Row-wise mirror of altmin_step_V.
Matrix altmin_step_U(const MaskedMatrix& obs, const Matrix& V, const Matrix& u_prev, double ridge);

// ||P_Ω(U V^T - Y_obs)||_F^2
double altmin_objective(const MaskedMatrix& obs, const FactorPair& factors);

// Called after every full V/U sweep with the 1-based iteration number.
using AltMinObserver = std::function<void(int iter, const FactorPair& factors)>;

Completion altmin_complete(const MaskedMatrix& obs, const AltMinConfig& cfg, const AltMinObserver& observer = {});
// Same, returning the factors as well as U V^T.
Completion altmin_complete(const MaskedMatrix& obs, const AltMinConfig& cfg, FactorPair& factors_out,
                           const AltMinObserver& observer = {});

}  // namespace mclab::passive
