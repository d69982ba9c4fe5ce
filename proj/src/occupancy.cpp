#include "sensepath/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sensepath {

void HingeSet::build_index() {
    index = PointGridIndex(points, std::max(cutoff_radius, 1e-6));
}

namespace {

std::vector<int> divisors(int n) {
    std::vector<int> out;
    for (int d = 1; d <= n; ++d)
        if (n % d == 0) out.push_back(d);
    return out;
}

}  // namespace

HingeSet make_hinge_lattice(const Aabb& bounds, int count, double gamma) {
    if (count < 8) throw std::invalid_argument("make_hinge_lattice: count too small");
    const Vec3 ext = bounds.extent();
    if ((ext.array() <= 0.0).any())
        throw std::invalid_argument("make_hinge_lattice: degenerate bounds");

    // factor count into nx*ny*nz with spacings as isotropic as the box allows
    int best_nx = count, best_ny = 1, best_nz = 1;
    double best_score = std::numeric_limits<double>::infinity();
    for (int nx : divisors(count))
        for (int ny : divisors(count / nx)) {
            const int nz = count / nx / ny;
            const double sx = ext.x() / nx, sy = ext.y() / ny, sz = ext.z() / nz;
            const double score = std::max({sx, sy, sz}) / std::min({sx, sy, sz});
            if (score < best_score) {
                best_score = score;
                best_nx = nx; best_ny = ny; best_nz = nz;
            }
        }

    HingeSet hinges;
    hinges.points.reserve(count);
    const double sx = ext.x() / best_nx, sy = ext.y() / best_ny, sz = ext.z() / best_nz;
    for (int iz = 0; iz < best_nz; ++iz)
        for (int iy = 0; iy < best_ny; ++iy)
            for (int ix = 0; ix < best_nx; ++ix)
                hinges.points.emplace_back(bounds.min.x() + (ix + 0.5) * sx,
                                           bounds.min.y() + (iy + 0.5) * sy,
                                           bounds.min.z() + (iz + 0.5) * sz);

    // Keep the kernel compact: support ends near one hinge spacing so that
    // saturated weights in sensed regions cannot bleed into distant,
    // still-unexplored ones and flatten the acquisition signal there.
    const double mean_spacing = std::cbrt(sx * sy * sz);
    const double support = mean_spacing;
    hinges.gamma = (gamma > 0.0) ? gamma : std::log(1e4) / (support * support);
    hinges.cutoff_radius = std::sqrt(std::log(1e4) / hinges.gamma);
    hinges.build_index();
    return hinges;
}

WeightPosterior init_posterior(int num_hinges, double prior_var, double bias_prior_var) {
    if (prior_var <= 0.0) throw std::invalid_argument("init_posterior: prior_var must be > 0");
    WeightPosterior p;
    p.mu = Eigen::VectorXd::Zero(num_hinges + 1);
    p.sigma_sq = Eigen::VectorXd::Constant(num_hinges + 1, prior_var);
    if (bias_prior_var > 0.0) p.sigma_sq(num_hinges) = bias_prior_var;
    return p;
}

SparseFeature features_sparse(const Vec3& x, const HingeSet& hinges) {
    SparseFeature f;
    const double rc = hinges.cutoff_radius;
    static thread_local std::vector<int> candidates;
    hinges.index.query_box(x - Vec3::Constant(rc), x + Vec3::Constant(rc), candidates);
    const double rc2 = rc * rc;
    for (int j : candidates) {
        const double d2 = (x - hinges.points[j]).squaredNorm();
        if (d2 > rc2) continue;
        f.idx.push_back(j);
        f.val.push_back(std::exp(-hinges.gamma * d2));
    }
    f.idx.push_back(hinges.size());  // bias
    f.val.push_back(1.0);
    return f;
}

Eigen::VectorXd features(const Vec3& x, const HingeSet& hinges) {
    Eigen::VectorXd f(hinges.size() + 1);
    for (int j = 0; j < hinges.size(); ++j)
        f(j) = std::exp(-hinges.gamma * (x - hinges.points[j]).squaredNorm());
    f(hinges.size()) = 1.0;
    return f;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double moderated_sigmoid(double mean, double std) {
    const double kappa = 1.0 / std::sqrt(1.0 + M_PI * std * std / 8.0);
    const double p = sigmoid(kappa * mean);
    return std::clamp(p, 1e-15, 1.0 - 1e-15);
}

namespace {

double lambda_jj(double xi) {
    if (xi < 1e-8) return 0.125;
    return std::tanh(0.5 * xi) / (4.0 * xi);
}

}  // namespace

void learn_params(WeightPosterior& posterior, const std::vector<LabeledSample>& samples,
                  const HingeSet& hinges, double tol, int max_iters) {
    if (samples.empty()) throw std::invalid_argument("learn_params: empty batch");
    if (posterior.size() != hinges.size() + 1)
        throw std::invalid_argument("learn_params: posterior/hinge size mismatch");

    const int n = static_cast<int>(samples.size());
    std::vector<SparseFeature> feats(n);
    std::vector<char> touched_flag(posterior.size(), 0);
    std::vector<int> touched;
    for (int i = 0; i < n; ++i) {
        feats[i] = features_sparse(samples[i].point, hinges);
        for (int j : feats[i].idx)
            if (!touched_flag[j]) {
                touched_flag[j] = 1;
                touched.push_back(j);
            }
    }

    const Eigen::VectorXd prior_mu = posterior.mu;
    const Eigen::VectorXd prior_sigma_sq = posterior.sigma_sq;
    Eigen::VectorXd& mu = posterior.mu;
    Eigen::VectorXd& sigma_sq = posterior.sigma_sq;

    auto datum_moments = [&](int i, double& m, double& s2) {
        m = 0.0;
        s2 = 0.0;
        const auto& f = feats[i];
        for (std::size_t k = 0; k < f.idx.size(); ++k) {
            m += mu(f.idx[k]) * f.val[k];
            s2 += sigma_sq(f.idx[k]) * f.val[k] * f.val[k];
        }
    };

    std::vector<double> xi(n);
    for (int i = 0; i < n; ++i) {
        double m, s2;
        datum_moments(i, m, s2);
        xi[i] = std::sqrt(m * m + s2);
    }

    // evidence term B is fixed across the fixed-point loop
    Eigen::VectorXd evidence = Eigen::VectorXd::Zero(posterior.size());
    for (int i = 0; i < n; ++i) {
        const auto& f = feats[i];
        const double y_term = samples[i].label - 0.5;
        for (std::size_t k = 0; k < f.idx.size(); ++k)
            evidence(f.idx[k]) += y_term * f.val[k];
    }

    Eigen::VectorXd precision_add(posterior.size());
    for (int iter = 0; iter < max_iters; ++iter) {
        for (int j : touched) precision_add(j) = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto& f = feats[i];
            const double two_lam = 2.0 * lambda_jj(xi[i]);
            for (std::size_t k = 0; k < f.idx.size(); ++k)
                precision_add(f.idx[k]) += two_lam * f.val[k] * f.val[k];
        }

        double max_delta = 0.0;
        for (int j : touched) {
            const double prec = 1.0 / prior_sigma_sq(j) + precision_add(j);
            const double new_sigma_sq = 1.0 / prec;
            const double new_mu =
                new_sigma_sq * (prior_mu(j) / prior_sigma_sq(j) + evidence(j));
            if (!std::isfinite(new_mu) || !std::isfinite(new_sigma_sq) || new_sigma_sq <= 0.0)
                throw std::runtime_error("learn_params: non-finite variational update");
            max_delta = std::max(max_delta, std::abs(new_mu - mu(j)));
            mu(j) = new_mu;
            sigma_sq(j) = new_sigma_sq;
        }

        for (int i = 0; i < n; ++i) {
            double m, s2;
            datum_moments(i, m, s2);
            xi[i] = std::sqrt(m * m + s2);
        }
        if (max_delta < tol) break;
    }
}

void learn_params(WeightPosterior& posterior, const std::vector<SenseBatch>& batches,
                  const HingeSet& hinges, double tol, int max_iters) {
    // One chained update per scan: each batch re-linearizes the variational
    // bound around the tightened posterior, which keeps the per-datum bound
    // parameters in their informative regime.
    for (const auto& b : batches)
        if (!b.samples.empty()) learn_params(posterior, b.samples, hinges, tol, max_iters);
}

OccupancyQuery query(const Vec3& x_star, const WeightPosterior& posterior,
                     const HingeSet& hinges) {
    const SparseFeature f = features_sparse(x_star, hinges);
    OccupancyQuery q;
    double var = 0.0;
    q.mean = 0.0;
    for (std::size_t k = 0; k < f.idx.size(); ++k) {
        q.mean += posterior.mu(f.idx[k]) * f.val[k];
        var += posterior.sigma_sq(f.idx[k]) * f.val[k] * f.val[k];
    }
    q.std = std::sqrt(std::max(var, 0.0));
    q.prob = moderated_sigmoid(q.mean, q.std);
    return q;
}

Vec3 OccupancyGrid::cell_center(int ix, int iy, int iz) const {
    const Vec3 ext = bounds.extent();
    return Vec3(bounds.min.x() + (ix + 0.5) * ext.x() / dims.x(),
                bounds.min.y() + (iy + 0.5) * ext.y() / dims.y(),
                bounds.min.z() + (iz + 0.5) * ext.z() / dims.z());
}

OccupancyGrid export_grid(const WeightPosterior& posterior, const HingeSet& hinges,
                          const Aabb& bounds, double resolution) {
    if (resolution <= 0.0) throw std::invalid_argument("export_grid: resolution must be > 0");
    OccupancyGrid grid;
    grid.bounds = bounds;
    const Vec3 ext = bounds.extent();
    for (int a = 0; a < 3; ++a)
        grid.dims(a) = std::max(1, static_cast<int>(std::ceil(ext(a) / resolution - 1e-9)));
    grid.values.reserve(static_cast<std::size_t>(grid.dims.prod()));
    for (int iz = 0; iz < grid.dims.z(); ++iz)
        for (int iy = 0; iy < grid.dims.y(); ++iy)
            for (int ix = 0; ix < grid.dims.x(); ++ix)
                grid.values.push_back(query(grid.cell_center(ix, iy, iz), posterior, hinges).prob);
    return grid;
}

void save_grid(const OccupancyGrid& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    char buf[64];
    out << grid.dims.x() << " " << grid.dims.y() << " " << grid.dims.z();
    for (int a = 0; a < 3; ++a) {
        std::snprintf(buf, sizeof(buf), " %.17g", grid.bounds.min(a));
        out << buf;
    }
    for (int a = 0; a < 3; ++a) {
        std::snprintf(buf, sizeof(buf), " %.17g", grid.bounds.max(a));
        out << buf;
    }
    out << "\n";
    for (double v : grid.values) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", v);
        out << buf;
    }
}

OccupancyGrid load_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open grid file: " + path);
    OccupancyGrid grid;
    in >> grid.dims.x() >> grid.dims.y() >> grid.dims.z();
    for (int a = 0; a < 3; ++a) in >> grid.bounds.min(a);
    for (int a = 0; a < 3; ++a) in >> grid.bounds.max(a);
    if (!in || grid.dims.minCoeff() <= 0)
        throw std::runtime_error("malformed grid file header: " + path);
    const std::size_t n = static_cast<std::size_t>(grid.dims.prod());
    grid.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) in >> grid.values[i];
    if (!in) throw std::runtime_error("malformed grid file values: " + path);
    return grid;
}

}  // namespace sensepath
