#include "hemskit/admm.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace hemskit::var {

namespace {

void check_penalties(double lambda, double rho) {
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be > 0");
}

}  // namespace

std::uint64_t matrix_digest(const Eigen::MatrixXd& m) {
    std::uint64_t hash = 1469598103934665603ull;  // FNV-1a
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            std::uint64_t bits = 0;
            const double v = m(i, j);
            std::memcpy(&bits, &v, sizeof(bits));
            for (int b = 0; b < 8; ++b) {
                hash ^= (bits >> (8 * b)) & 0xffu;
                hash *= 1099511628211ull;
            }
        }
    return hash;
}

VarModel fit_centralized(const VarDesign& design, double lambda, double rho,
                         const AdmmOptions& opts) {
    check_penalties(lambda, rho);
    const Eigen::Index np = design.Z.rows();
    const Eigen::Index n = design.Y.rows();

    Eigen::MatrixXd gram = design.Z * design.Z.transpose();
    gram.diagonal().array() += rho;
    const Eigen::LDLT<Eigen::MatrixXd> solver(gram);
    const Eigen::MatrixXd yzt = design.Y * design.Z.transpose();

    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(n, np);     // ridge iterate
    Eigen::MatrixXd shrunk = Eigen::MatrixXd::Zero(n, np);     // thresholded copy
    Eigen::MatrixXd dual_u = Eigen::MatrixXd::Zero(n, np);

    VarModel model;
    model.lambda = lambda;
    model.rho = rho;
    model.n = design.n;
    model.p = design.p;
    model.means = design.means;

    const double sqrt_size = std::sqrt(static_cast<double>(n * np));
    int k = 0;
    for (; k < opts.max_iter; ++k) {
        coeffs = solver.solve((yzt + rho * (shrunk - dual_u)).transpose()).transpose();
        const Eigen::MatrixXd shrunk_prev = shrunk;
        shrunk = soft_threshold(coeffs + dual_u, lambda / rho);
        dual_u += coeffs - shrunk;

        const double primal = (coeffs - shrunk).norm();
        const double dual = rho * (shrunk - shrunk_prev).norm();
        const double eps_pri =
            sqrt_size * opts.tol + opts.tol * std::max(coeffs.norm(), shrunk.norm());
        const double eps_dual = sqrt_size * opts.tol + opts.tol * (rho * dual_u).norm();
        model.primal_residual = primal;
        model.dual_residual = dual;
        model.primal_history.push_back(primal);
        model.dual_history.push_back(dual);
        if (primal <= eps_pri && dual <= eps_dual) {
            model.converged = true;
            ++k;
            break;
        }
    }
    model.iterations = k;
    model.B = shrunk;
    return model;
}

std::vector<std::vector<int>> predictor_partition(int n_series, int p, int n_workers) {
    if (n_workers < 1 || n_workers > n_series)
        throw std::invalid_argument("predictor split needs 1 <= N <= n");
    std::vector<std::vector<int>> rows(n_workers);
    for (int j = 0; j < n_series; ++j) {
        const int w = j % n_workers;
        for (int lag = 0; lag < p; ++lag) rows[w].push_back(lag * n_series + j);
    }
    return rows;
}

std::vector<std::pair<int, int>> example_partition(int t_eff, int n_workers) {
    if (n_workers < 1 || n_workers > t_eff)
        throw std::invalid_argument("example split needs 1 <= N <= T");
    std::vector<std::pair<int, int>> blocks;
    const int base = t_eff / n_workers;
    const int extra = t_eff % n_workers;
    int begin = 0;
    for (int w = 0; w < n_workers; ++w) {
        const int len = base + (w < extra ? 1 : 0);
        blocks.push_back({begin, len});
        begin += len;
    }
    return blocks;
}

namespace {

/// Coordinate descent on min_B lambda*||B||_1 + rho/2 ||B Zi - V||_F^2 using a
/// cached Gram matrix. Rows of B decouple; warm-started from the current B.
void solve_worker_lasso(Eigen::MatrixXd& B, const Eigen::MatrixXd& gram,
                        const Eigen::MatrixXd& q, double lambda, double rho,
                        const AdmmOptions& opts) {
    const Eigen::Index rows = B.rows();
    const Eigen::Index dim = B.cols();
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (int sweep = 0; sweep < opts.inner_max_sweeps; ++sweep) {
            double max_delta = 0.0;
            for (Eigen::Index c = 0; c < dim; ++c) {
                const double g_cc = gram(c, c);
                if (g_cc <= 0.0) {
                    B(r, c) = 0.0;
                    continue;
                }
                double partial = q(r, c);
                for (Eigen::Index c2 = 0; c2 < dim; ++c2)
                    if (c2 != c) partial -= gram(c, c2) * B(r, c2);
                const double updated = soft_threshold(rho * partial, lambda) / (rho * g_cc);
                max_delta = std::max(max_delta, std::fabs(updated - B(r, c)));
                B(r, c) = updated;
            }
            if (max_delta < opts.inner_tol) break;
        }
    }
}

}  // namespace

VarModel fit_consensus_predictors(const VarDesign& design, int n_workers, double lambda,
                                  double rho, const AdmmOptions& opts, RoundLog* log) {
    check_penalties(lambda, rho);
    const Eigen::Index n = design.Y.rows();
    const Eigen::Index t_eff = design.Y.cols();
    const auto partition = predictor_partition(design.n, design.p, n_workers);

    struct Worker {
        std::vector<int> rows;
        Eigen::MatrixXd lags;     // this worker's Z rows, r_i x T
        Eigen::MatrixXd gram;     // lags * lags^T
        Eigen::MatrixXd coeffs;   // n x r_i
        Eigen::MatrixXd partial;  // coeffs * lags, n x T
    };
    std::vector<Worker> workers(n_workers);
    for (int w = 0; w < n_workers; ++w) {
        auto& wk = workers[w];
        wk.rows = partition[w];
        wk.lags.resize(wk.rows.size(), t_eff);
        for (std::size_t r = 0; r < wk.rows.size(); ++r) wk.lags.row(r) = design.Z.row(wk.rows[r]);
        wk.gram = wk.lags * wk.lags.transpose();
        wk.coeffs = Eigen::MatrixXd::Zero(n, wk.rows.size());
        wk.partial = Eigen::MatrixXd::Zero(n, t_eff);
    }

    Eigen::MatrixXd consensus = Eigen::MatrixXd::Zero(n, t_eff);   // H-bar
    Eigen::MatrixXd mean_partial = Eigen::MatrixXd::Zero(n, t_eff);  // BZ-bar
    Eigen::MatrixXd dual = Eigen::MatrixXd::Zero(n, t_eff);        // U

    if (log) {
        log->n_workers = n_workers;
        log->rho = rho;
        log->rounds.clear();
    }

    VarModel model;
    model.lambda = lambda;
    model.rho = rho;
    model.n = design.n;
    model.p = design.p;
    model.means = design.means;

    const double sqrt_size = std::sqrt(static_cast<double>(n * t_eff));
    int k = 0;
    for (; k < opts.max_iter; ++k) {
        // Workers update against the consensus gap, then upload B_i Z_i.
        std::vector<std::uint64_t> digests(n_workers);
        for (int w = 0; w < n_workers; ++w) {
            auto& wk = workers[w];
            const Eigen::MatrixXd target = wk.partial + consensus - mean_partial - dual;
            const Eigen::MatrixXd q = target * wk.lags.transpose();
            solve_worker_lasso(wk.coeffs, wk.gram, q, lambda, rho, opts);
            wk.partial = wk.coeffs * wk.lags;
            digests[w] = matrix_digest(wk.partial);
        }

        // Hub barrier: average the partials, update H-bar and U, broadcast.
        mean_partial.setZero();
        for (const auto& wk : workers) mean_partial += wk.partial;
        mean_partial /= static_cast<double>(n_workers);

        const Eigen::MatrixXd consensus_prev = consensus;
        consensus =
            (design.Y + rho * mean_partial + rho * dual) / (static_cast<double>(n_workers) + rho);
        dual += mean_partial - consensus;

        if (log) {
            RoundRecord rec;
            rec.k = k + 1;
            rec.upload_digests = digests;
            rec.consensus = consensus;
            rec.mean_partial = mean_partial;
            rec.dual = dual;
            log->rounds.push_back(std::move(rec));
        }

        const double primal = (mean_partial - consensus).norm();
        const double dual_res = rho * (consensus - consensus_prev).norm();
        const double eps_pri = sqrt_size * opts.tol +
                               opts.tol * std::max(mean_partial.norm(), consensus.norm());
        const double eps_dual = sqrt_size * opts.tol + opts.tol * (rho * dual).norm();
        model.primal_residual = primal;
        model.dual_residual = dual_res;
        model.primal_history.push_back(primal);
        model.dual_history.push_back(dual_res);
        if (primal <= eps_pri && dual_res <= eps_dual) {
            model.converged = true;
            ++k;
            break;
        }
    }
    model.iterations = k;

    model.B = Eigen::MatrixXd::Zero(n, design.Z.rows());
    for (const auto& wk : workers)
        for (std::size_t r = 0; r < wk.rows.size(); ++r) model.B.col(wk.rows[r]) = wk.coeffs.col(r);
    return model;
}

VarModel fit_sharing_examples(const VarDesign& design, int n_workers, double lambda, double rho,
                              const AdmmOptions& opts) {
    check_penalties(lambda, rho);
    const Eigen::Index n = design.Y.rows();
    const Eigen::Index np = design.Z.rows();
    const auto blocks = example_partition(static_cast<int>(design.Y.cols()), n_workers);

    struct Worker {
        Eigen::MatrixXd yzt;  // response-lag cross moment of this block
        Eigen::LDLT<Eigen::MatrixXd> solver;
        Eigen::MatrixXd coeffs;
        Eigen::MatrixXd dual_u;
    };
    std::vector<Worker> workers(n_workers);
    for (int w = 0; w < n_workers; ++w) {
        const auto [begin, len] = blocks[w];
        const Eigen::MatrixXd z_block = design.Z.middleCols(begin, len);
        const Eigen::MatrixXd y_block = design.Y.middleCols(begin, len);
        Eigen::MatrixXd gram = z_block * z_block.transpose();
        gram.diagonal().array() += rho;
        workers[w].solver.compute(gram);
        workers[w].yzt = y_block * z_block.transpose();
        workers[w].coeffs = Eigen::MatrixXd::Zero(n, np);
        workers[w].dual_u = Eigen::MatrixXd::Zero(n, np);
    }

    Eigen::MatrixXd consensus = Eigen::MatrixXd::Zero(n, np);

    VarModel model;
    model.lambda = lambda;
    model.rho = rho;
    model.n = design.n;
    model.p = design.p;
    model.means = design.means;

    const double sqrt_size = std::sqrt(static_cast<double>(n * np * n_workers));
    int k = 0;
    for (; k < opts.max_iter; ++k) {
        for (auto& wk : workers)
            wk.coeffs =
                wk.solver.solve((wk.yzt + rho * (consensus - wk.dual_u)).transpose()).transpose();

        Eigen::MatrixXd b_bar = Eigen::MatrixXd::Zero(n, np);
        Eigen::MatrixXd u_bar = Eigen::MatrixXd::Zero(n, np);
        for (const auto& wk : workers) {
            b_bar += wk.coeffs;
            u_bar += wk.dual_u;
        }
        b_bar /= static_cast<double>(n_workers);
        u_bar /= static_cast<double>(n_workers);

        const Eigen::MatrixXd consensus_prev = consensus;
        consensus =
            soft_threshold(b_bar + u_bar, lambda / (static_cast<double>(n_workers) * rho));

        double primal_sq = 0.0, b_norm_sq = 0.0, u_norm_sq = 0.0;
        for (auto& wk : workers) {
            wk.dual_u += wk.coeffs - consensus;
            primal_sq += (wk.coeffs - consensus).squaredNorm();
            b_norm_sq += wk.coeffs.squaredNorm();
            u_norm_sq += wk.dual_u.squaredNorm();
        }
        const double primal = std::sqrt(primal_sq);
        const double dual =
            rho * std::sqrt(static_cast<double>(n_workers)) * (consensus - consensus_prev).norm();
        const double eps_pri =
            sqrt_size * opts.tol +
            opts.tol * std::max(std::sqrt(b_norm_sq),
                                std::sqrt(static_cast<double>(n_workers)) * consensus.norm());
        const double eps_dual = sqrt_size * opts.tol + opts.tol * rho * std::sqrt(u_norm_sq);
        model.primal_residual = primal;
        model.dual_residual = dual;
        model.primal_history.push_back(primal);
        model.dual_history.push_back(dual);
        if (primal <= eps_pri && dual <= eps_dual) {
            model.converged = true;
            ++k;
            break;
        }
    }
    model.iterations = k;
    model.B = consensus;
    return model;
}

Eigen::MatrixXd curious_node_reconstruct(const RoundLog& log, std::size_t round_index) {
    if (round_index >= log.rounds.size())
        throw std::invalid_argument("round index outside the log");
    const auto& rec = log.rounds[round_index];
    const double n_workers = static_cast<double>(log.n_workers);
    const double rho = log.rho;
    // Y = (N + rho) * Hbar_k - rho * BZbar_k - rho * U_{k-1}; the first round
    // starts from U_0 = 0.
    Eigen::MatrixXd prev_dual = Eigen::MatrixXd::Zero(rec.consensus.rows(), rec.consensus.cols());
    if (round_index > 0) prev_dual = log.rounds[round_index - 1].dual;
    return (n_workers + rho) * rec.consensus - rho * rec.mean_partial - rho * prev_dual;
}

SharingAudit audit_sharing_examples(const VarDesign& design, int n_workers) {
    SharingAudit audit;
    const auto blocks = example_partition(static_cast<int>(design.Y.cols()), n_workers);
    for (int w = 0; w < n_workers; ++w) {
        const auto [begin, len] = blocks[w];
        if (len == 0) continue;
        for (int j = 0; j < design.n; ++j) {
            if (j == w % design.n) continue;  // the worker's own series
            // The worker's Z block carries the lag rows of series j: verify at
            // least one entry is the series' actual sample (lag-1 row at column
            // t equals the response row at t-1).
            bool crossed = begin == 0 && len > 0;  // pre-sample lags, not in Y
            for (int t = std::max(begin, 1); t < begin + len && !crossed; ++t)
                crossed = design.Z(j, t) == design.Y(j, t - 1);
            if (crossed) {
                audit.raw_data_crossed = true;
                audit.exposures.push_back({w, j});
            }
        }
    }
    return audit;
}

}  // namespace hemskit::var
