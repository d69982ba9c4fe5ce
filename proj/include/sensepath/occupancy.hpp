#pragma once

#include <string>
#include <vector>

#include "sensepath/geometry.hpp"
#include "sensepath/sensor.hpp"

namespace sensepath {

// Fixed kernel centers on an equally spaced lattice filling the bounds.
// Features of a query point are RBF similarities to every hinge plus a
// constant bias component, so the weight vector has length M+1.
struct HingeSet {
    std::vector<Vec3> points;
    double gamma = 1.0;          // exp(-gamma * d^2)
    double cutoff_radius = 0.0;  // kernel treated as zero beyond this distance

    int size() const { return static_cast<int>(points.size()); }

    PointGridIndex index;  // spatial index over points, for sparse featurization
    void build_index();
};

// gamma <= 0 selects a default with kernel support ending near one hinge
// spacing, which keeps learned weights local. The lattice dims are the
// factorization of `count` that best matches the bounds aspect ratio.
HingeSet make_hinge_lattice(const Aabb& bounds, int count, double gamma = 0.0);

// Diagonal Gaussian posterior over the M+1 weights (bias last).
struct WeightPosterior {
    Eigen::VectorXd mu;
    Eigen::VectorXd sigma_sq;

    int size() const { return static_cast<int>(mu.size()); }
};

// bias_prior_var <= 0 keeps the bias weight at the common prior variance.
// A tight bias prior anchors the global offset so that one-class batches
// cannot shift the probability of unobserved regions.
WeightPosterior init_posterior(int num_hinges, double prior_var, double bias_prior_var = 0.0);

struct SparseFeature {
    std::vector<int> idx;     // hinge indices, bias index (M) always last
    std::vector<double> val;
};

SparseFeature features_sparse(const Vec3& x, const HingeSet& hinges);
Eigen::VectorXd features(const Vec3& x, const HingeSet& hinges);  // dense, length M+1

// One variational update of the Bayesian logistic regression, chaining the
// incoming posterior as the prior. Quadratic-bound (tanh) fixed point on the
// per-datum variational parameters, diagonal covariance throughout.
void learn_params(WeightPosterior& posterior, const std::vector<LabeledSample>& samples,
                  const HingeSet& hinges, double tol = 1e-4, int max_iters = 100);
void learn_params(WeightPosterior& posterior, const std::vector<SenseBatch>& batches,
                  const HingeSet& hinges, double tol = 1e-4, int max_iters = 100);

struct OccupancyQuery {
    double mean = 0.0;  // latent mean mu(x*)
    double std = 0.0;   // latent std
    double prob = 0.5;  // probit-moderated predictive occupancy probability
};

OccupancyQuery query(const Vec3& x_star, const WeightPosterior& posterior, const HingeSet& hinges);

double sigmoid(double z);
double moderated_sigmoid(double mean, double std);

struct OccupancyGrid {
    Eigen::Vector3i dims{0, 0, 0};  // nx, ny, nz
    Aabb bounds;
    std::vector<double> values;  // row-major, x fastest, z slowest

    Vec3 cell_center(int ix, int iy, int iz) const;
};

// Occupancy probabilities on a regular lattice with cells of size
// <= resolution, covering the bounds.
OccupancyGrid export_grid(const WeightPosterior& posterior, const HingeSet& hinges,
                          const Aabb& bounds, double resolution);

void save_grid(const OccupancyGrid& grid, const std::string& path);
OccupancyGrid load_grid(const std::string& path);

}  // namespace sensepath
