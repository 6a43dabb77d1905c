#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hemskit/var.hpp"

namespace hemskit::var {

struct AdmmOptions {
    double tol = 1e-6;    // absolute and relative residual tolerance
    int max_iter = 5000;
    int inner_max_sweeps = 500;   // coordinate-descent budget per worker update
    double inner_tol = 1e-12;
};

/// One synchronized round of the simulated hub protocol. The broadcast holds
/// exactly what every worker receives to run its next local update; the
/// uploads are summarized by digests.
struct RoundRecord {
    int k = 0;
    std::vector<std::uint64_t> upload_digests;  // one per worker
    Eigen::MatrixXd consensus;   // H-bar after round k (n x T)
    Eigen::MatrixXd mean_partial;  // averaged worker predictions BZ-bar (n x T)
    Eigen::MatrixXd dual;        // U after round k (n x T)
};

struct RoundLog {
    int n_workers = 0;
    double rho = 1.0;
    std::vector<RoundRecord> rounds;
};

/// FNV-1a over the little-endian bytes of a matrix, used as upload digest.
std::uint64_t matrix_digest(const Eigen::MatrixXd& m);

/// Centralized ADMM for the VAR-LASSO: ridge-type B-update against a cached
/// factorization, elementwise soft-threshold H-update, dual U-update. Returns
/// the H iterate as the sparse estimate.
VarModel fit_centralized(const VarDesign& design, double lambda, double rho,
                         const AdmmOptions& opts = {});

/// Row-block partition of Z across workers for the split across predictors.
/// Worker w owns the lag rows of the series assigned to it (series j goes to
/// worker j % n_workers), so no raw series leaves its node via Z.
std::vector<std::vector<int>> predictor_partition(int n_series, int p, int n_workers);

/// Contiguous column blocks (examples) for the split across examples.
std::vector<std::pair<int, int>> example_partition(int t_eff, int n_workers);

/// Split across predictors (consensus over the averaged partial predictions).
/// Workers solve local L1-penalized updates against the consensus gap; the hub
/// averages partial predictions and runs the shared H/U updates. When `log` is
/// given, every round's uploads and broadcast are recorded.
VarModel fit_consensus_predictors(const VarDesign& design, int n_workers, double lambda,
                                  double rho, const AdmmOptions& opts = {},
                                  RoundLog* log = nullptr);

/// Split across examples: per-worker ridge updates on column blocks, hub
/// soft-threshold of the averaged coefficients, per-worker dual updates.
VarModel fit_sharing_examples(const VarDesign& design, int n_workers, double lambda,
                              double rho, const AdmmOptions& opts = {});

/// Inverts the consensus H-update from one logged round: a worker holding the
/// broadcast of round k (and the previous round's dual) recovers the full
/// response matrix Y exactly.
Eigen::MatrixXd curious_node_reconstruct(const RoundLog& log, std::size_t round_index);

struct SharingAudit {
    bool raw_data_crossed = false;
    // (worker, foreign series index) pairs: lag rows of that series appear in
    // the worker's Z block although the worker does not own the series.
    std::vector<std::pair<int, int>> exposures;
};

/// Data-flow audit of the split across examples: each worker's Z_i block
/// carries specific lags of all series, so raw data crosses node boundaries.
SharingAudit audit_sharing_examples(const VarDesign& design, int n_workers);

}  // namespace hemskit::var
