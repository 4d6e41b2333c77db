#include "miace/clustering.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>

namespace miace {

namespace {

void check_points(const Eigen::MatrixXd& points, int k) {
    if (k < 1) throw ValidationError("cluster count must be positive");
    if (points.rows() < k) {
        throw ValidationError("need at least K points (" + std::to_string(points.rows()) +
                              " < " + std::to_string(k) + ")");
    }
    if (!points.allFinite()) throw ValidationError("points contain non-finite values");
}

// Squared Euclidean distance of every point to one center.
Eigen::VectorXd sq_dist_to(const Eigen::MatrixXd& points, const Eigen::RowVectorXd& c) {
    return (points.rowwise() - c).rowwise().squaredNorm();
}

Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& points, int k, Rng& rng) {
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd centers(k, points.cols());
    std::vector<bool> chosen(n, false);

    const std::size_t first = rng.index(static_cast<std::size_t>(n));
    centers.row(0) = points.row(first);
    chosen[first] = true;

    Eigen::VectorXd best_sq = sq_dist_to(points, centers.row(0));
    for (int c = 1; c < k; ++c) {
        const double total = best_sq.sum();
        Eigen::Index pick = -1;
        if (total > 0.0) {
            double r = rng.uniform() * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                r -= best_sq[i];
                if (r <= 0.0) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = n - 1;
        }
        if (pick < 0 || chosen[pick]) {
            // All remaining mass sits on duplicates; take the first unchosen point.
            pick = -1;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = 0;
        }
        centers.row(c) = points.row(pick);
        chosen[pick] = true;
        best_sq = best_sq.cwiseMin(sq_dist_to(points, centers.row(c)));
    }
    return centers;
}

// Nearest center per point (ties to the lowest index) and the distance to it.
// Distances come from the expansion |p|^2 - 2 p.c + |c|^2 so the dominant
// work is one N x K product; clamped at zero against cancellation.
struct AssignWorkspace {
    Eigen::MatrixXd cross;        // n x k
    Eigen::VectorXd point_sq;     // n

    explicit AssignWorkspace(const Eigen::MatrixXd& points, int k)
        : cross(points.rows(), k), point_sq(points.rowwise().squaredNorm()) {}
};

void assign_points(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers,
                   AssignWorkspace& ws, std::vector<int>& assignment,
                   Eigen::VectorXd& dist_to_own) {
    const Eigen::Index n = points.rows();
    const int k = static_cast<int>(centers.rows());
    ws.cross.noalias() = points * centers.transpose();
    const Eigen::VectorXd center_sq = centers.rowwise().squaredNorm();
    for (Eigen::Index i = 0; i < n; ++i) {
        int best_c = 0;
        double best = ws.point_sq[i] - 2.0 * ws.cross(i, 0) + center_sq[0];
        for (int c = 1; c < k; ++c) {
            const double sq = ws.point_sq[i] - 2.0 * ws.cross(i, c) + center_sq[c];
            if (sq < best) {
                best = sq;
                best_c = c;
            }
        }
        assignment[i] = best_c;
        dist_to_own[i] = std::max(best, 0.0);
    }
}

} // namespace

KMeansModel kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                   int max_iter, double tol) {
    check_points(points, k);
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();

    Rng rng(seed);
    Eigen::MatrixXd centers = kmeanspp_seed(points, k, rng);
    std::vector<int> assignment(n, 0);
    Eigen::VectorXd dist_to_own(n);
    AssignWorkspace ws(points, k);

    // The stopping rule follows common practice: squared Frobenius norm of
    // the center shift, relative to the mean per-feature variance.
    const Eigen::RowVectorXd col_mean = points.colwise().mean();
    const double mean_var =
        (points.rowwise() - col_mean).array().square().mean();
    const double shift_tol = tol * std::max(mean_var, 1e-300);

    int iter = 0;
    for (; iter < max_iter; ++iter) {
        assign_points(points, centers, ws, assignment, dist_to_own);

        // Re-seed empty clusters to the point farthest from its center.
        std::vector<Eigen::Index> counts(k, 0);
        for (Eigen::Index i = 0; i < n; ++i) ++counts[assignment[i]];
        for (int c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            Eigen::Index far = 0;
            double far_sq = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (counts[assignment[i]] <= 1) continue;  // keep donors nonempty
                if (dist_to_own[i] > far_sq) {
                    far_sq = dist_to_own[i];
                    far = i;
                }
            }
            --counts[assignment[far]];
            assignment[far] = c;
            counts[c] = 1;
            dist_to_own[far] = 0.0;
            centers.row(c) = points.row(far);
        }

        // Update step.
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, d);
        for (Eigen::Index i = 0; i < n; ++i) next.row(assignment[i]) += points.row(i);
        for (int c = 0; c < k; ++c) next.row(c) /= static_cast<double>(counts[c]);

        const double shift_sq = (next - centers).squaredNorm();
        centers = next;
        if (shift_sq <= shift_tol) {
            ++iter;
            break;
        }
    }

    KMeansModel model;
    model.centers = std::move(centers);
    model.iterations = iter;
    model.assignment.assign(n, 0);
    assign_points(points, model.centers, ws, model.assignment, dist_to_own);
    model.inertia = dist_to_own.sum();
    return model;
}

namespace {

struct ComponentCache {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double log_norm = 0.0;  // log weight - 0.5*(d log 2pi + log det)
};

ComponentCache make_cache(double weight, const Eigen::MatrixXd& cov, Eigen::Index d) {
    ComponentCache cache;
    cache.llt.compute(cov);
    if (cache.llt.info() != Eigen::Success) {
        throw NumericError("GMM covariance lost positive-definiteness");
    }
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        log_det += 2.0 * std::log(cache.llt.matrixL()(i, i));
    }
    cache.log_norm = std::log(weight) -
                     0.5 * (static_cast<double>(d) * std::log(2.0 * M_PI) + log_det);
    return cache;
}

// Shared E-step buffers, reused across iterations.
struct EmWorkspace {
    Eigen::MatrixXd centered;  // n x d
    Eigen::MatrixXd solved;    // d x n
    Eigen::MatrixXd joint;     // n x k, log pi_c N(x | mu_c, Sigma_c)
    Eigen::VectorXd row_max;   // n
    Eigen::VectorXd row_sum;   // n

    EmWorkspace(Eigen::Index n, Eigen::Index d, int k)
        : centered(n, d), solved(d, n), joint(n, k), row_max(n), row_sum(n) {}
};

// Log joint densities for all points, then a row-wise log-space softmax.
// Fills `resp` and returns the total log-likelihood.
double e_step(const std::vector<ComponentCache>& caches, const Eigen::MatrixXd& means,
              const Eigen::MatrixXd& points, EmWorkspace& ws, Eigen::MatrixXd& resp) {
    const int k = static_cast<int>(caches.size());
    for (int c = 0; c < k; ++c) {
        ws.solved = (points.rowwise() - means.row(c)).transpose();
        caches[c].llt.matrixL().solveInPlace(ws.solved);
        ws.joint.col(c) =
            (-0.5 * ws.solved.colwise().squaredNorm().transpose().array() +
             caches[c].log_norm)
                .matrix();
    }
    ws.row_max = ws.joint.rowwise().maxCoeff();
    resp = (ws.joint.colwise() - ws.row_max).array().exp();
    ws.row_sum = resp.rowwise().sum();
    resp.array().colwise() /= ws.row_sum.array();
    return (ws.row_max.array() + ws.row_sum.array().log()).sum();
}

} // namespace

GmmModel gmm_fit(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                 int max_iter, double tol, double cov_ridge) {
    check_points(points, k);
    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();

    // Initialize from a k-means partition.
    const KMeansModel km = kmeans(points, k, seed);
    GmmModel model;
    model.weights.resize(k);
    model.means = km.centers;
    model.covariances.assign(k, Eigen::MatrixXd::Zero(d, d));

    const double global_floor =
        1e-12 * std::max(points.array().square().mean(), 1.0);
    std::vector<Eigen::Index> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) ++counts[km.assignment[i]];
    for (Eigen::Index i = 0; i < n; ++i) {
        const int c = km.assignment[i];
        const Eigen::VectorXd diff = points.row(i).transpose() - model.means.row(c).transpose();
        model.covariances[c].noalias() += diff * diff.transpose();
    }
    for (int c = 0; c < k; ++c) {
        model.weights[c] = static_cast<double>(counts[c]) / static_cast<double>(n);
        model.covariances[c] /= std::max<double>(1.0, static_cast<double>(counts[c]));
        const double ridge =
            cov_ridge * model.covariances[c].trace() / static_cast<double>(d) + global_floor;
        model.covariances[c] += ridge * Eigen::MatrixXd::Identity(d, d);
    }

    double prev_ll = -std::numeric_limits<double>::infinity();
    EmWorkspace ws(n, d, k);
    Eigen::MatrixXd resp(n, k), weighted(n, d), scatter(d, d);
    std::vector<ComponentCache> caches(static_cast<std::size_t>(k));

    int iter = 0;
    for (; iter < max_iter; ++iter) {
        // E step in log space.
        for (int c = 0; c < k; ++c) {
            caches[c] = make_cache(model.weights[c], model.covariances[c], d);
        }
        const double ll =
            e_step(caches, model.means, points, ws, resp) / static_cast<double>(n);
        if (!std::isfinite(ll)) throw NumericError("GMM log-likelihood diverged");
        model.log_likelihood_trace.push_back(ll);
        if (ll - prev_ll < tol && iter > 0) {
            ++iter;
            break;
        }
        prev_ll = ll;

        // M step.
        Eigen::VectorXd mass = resp.colwise().sum();
        mass = mass.cwiseMax(1e-12);
        model.weights = mass / mass.sum();
        model.means = resp.transpose() * points;
        for (int c = 0; c < k; ++c) model.means.row(c) /= mass[c];
        for (int c = 0; c < k; ++c) {
            ws.centered = points.rowwise() - model.means.row(c);
            weighted = ws.centered.array().colwise() * resp.col(c).array();
            scatter.noalias() = weighted.transpose() * ws.centered;
            scatter /= mass[c];
            scatter = 0.5 * (scatter + scatter.transpose().eval());
            const double ridge =
                cov_ridge * scatter.trace() / static_cast<double>(d) + global_floor;
            model.covariances[c] =
                scatter + ridge * Eigen::MatrixXd::Identity(d, d);
        }
    }
    model.iterations = iter;
    return model;
}

Eigen::MatrixXd gmm_posteriors(const GmmModel& model, const Eigen::MatrixXd& points) {
    const int k = static_cast<int>(model.weights.size());
    const Eigen::Index d = model.means.cols();
    if (points.cols() != d) {
        throw DimensionError("points have dimensionality " + std::to_string(points.cols()) +
                             ", model expects " + std::to_string(d));
    }
    std::vector<ComponentCache> caches(model.weights.size());
    for (int c = 0; c < k; ++c) {
        caches[c] = make_cache(model.weights[c], model.covariances[c], d);
    }
    EmWorkspace ws(points.rows(), d, k);
    Eigen::MatrixXd resp(points.rows(), k);
    e_step(caches, model.means, points, ws, resp);
    return resp;
}

MeanShiftResult mean_shift(const std::vector<Eigen::Vector2d>& points,
                           const std::vector<double>& weights, double bandwidth,
                           double merge_radius, int max_iter) {
    if (bandwidth <= 0.0) throw ValidationError("bandwidth must be positive");
    if (merge_radius < 0.0) throw ValidationError("merge radius must be nonnegative");
    if (points.size() != weights.size()) {
        throw DimensionError("points and weights differ in length");
    }
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) {
            throw ValidationError("weights must be finite and nonnegative");
        }
    }

    MeanShiftResult result;
    result.assignment.assign(points.size(), -1);

    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (weights[i] > 0.0) active.push_back(i);
    }
    if (active.empty()) return result;

    const double bw_sq = bandwidth * bandwidth;
    const double tol = 1e-6 * bandwidth;

    std::vector<Eigen::Vector2d> converged(active.size());
    for (std::size_t a = 0; a < active.size(); ++a) {
        Eigen::Vector2d y = points[active[a]];
        for (int it = 0; it < max_iter; ++it) {
            Eigen::Vector2d num = Eigen::Vector2d::Zero();
            double den = 0.0;
            for (std::size_t j : active) {
                if ((points[j] - y).squaredNorm() <= bw_sq) {
                    num += weights[j] * points[j];
                    den += weights[j];
                }
            }
            if (den <= 0.0) break;  // ball drifted off all weighted points
            const Eigen::Vector2d next = num / den;
            const double step = (next - y).norm();
            y = next;
            if (step < tol) break;
        }
        converged[a] = y;
    }

    // Greedy merge in point order; modes end up pairwise >= merge_radius apart.
    for (std::size_t a = 0; a < active.size(); ++a) {
        int mode = -1;
        for (std::size_t m = 0; m < result.modes.size(); ++m) {
            if ((converged[a] - result.modes[m]).norm() <= merge_radius) {
                mode = static_cast<int>(m);
                break;
            }
        }
        if (mode < 0) {
            mode = static_cast<int>(result.modes.size());
            result.modes.push_back(converged[a]);
        }
        result.assignment[active[a]] = mode;
    }
    return result;
}

} // namespace miace
