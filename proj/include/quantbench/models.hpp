#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "quantbench/errors.hpp"

namespace quantbench::models {

struct EmptyMatrix : ModelError { using ModelError::ModelError; };
struct TooFewRows : ModelError { using ModelError::ModelError; };
struct SingularSystem : ModelError { using ModelError::ModelError; };
struct DegenerateInput : ModelError { using ModelError::ModelError; };
struct KTooLarge : ModelError { using ModelError::ModelError; };
struct DimensionMismatch : ModelError { using ModelError::ModelError; };
struct ZeroVariance : ModelError { using ModelError::ModelError; };
struct InvalidCandidate : ModelError { using ModelError::ModelError; };
struct TooFewRowsForFolds : ModelError { using ModelError::ModelError; };

struct FeatureMatrix {
    std::vector<std::vector<double>> rows;
    std::vector<double> targets; // empty = absent; otherwise aligned 1:1 with rows

    std::size_t row_count() const { return rows.size(); }
    std::size_t col_count() const { return rows.empty() ? 0 : rows.front().size(); }
    bool has_targets() const { return !targets.empty(); }
};

enum class ScalerKind { Standardize, MinMax };

struct ScalerParams {
    ScalerKind kind = ScalerKind::Standardize;
    std::vector<double> offset; // column mean, or min
    std::vector<double> spread; // population SD, or max - min; 0 marks a constant column
};

ScalerParams fit_scaler(ScalerKind kind, const FeatureMatrix& x);
FeatureMatrix apply_scaler(const ScalerParams& params, const FeatureMatrix& x);
std::vector<double> apply_scaler(const ScalerParams& params, const std::vector<double>& row);

struct SplitResult {
    FeatureMatrix train;
    FeatureMatrix test;
};

SplitResult train_test_split(const FeatureMatrix& x, double test_fraction, std::uint64_t seed);

struct LinearModel {
    std::vector<double> weights;
    double intercept = 0;
};

inline constexpr double kDefaultRidge = 1e-8;

// OLS via Householder QR on the internally standardized design. A numerically
// full-rank design is solved exactly; rank deficiency falls back to ridge
// (feature columns only). Pass ridge <= 0 to disable the fallback, in which
// case rank deficiency raises SingularSystem.
LinearModel fit_linear(const FeatureMatrix& x, double ridge = kDefaultRidge);
double predict_linear(const LinearModel& model, const std::vector<double>& row);

struct QuadraticFit {
    double a = 0;
    double b = 0;
    double c = 0;
    double vertex_x = 0;
    double vertex_y = 0;
};

QuadraticFit fit_quadratic(const std::vector<std::pair<double, double>>& points);

struct KnnModel {
    FeatureMatrix data;
    int k = 1;
};

KnnModel fit_knn(FeatureMatrix x, int k);
double predict_knn(const KnnModel& model, const std::vector<double>& row);

double r2_score(const std::vector<double>& predicted, const std::vector<double>& actual);

struct CvGridResult {
    struct Candidate {
        int k = 0;
        double mean_score = 0;
    };
    std::vector<Candidate> candidates;
    int chosen_k = 0;
};

// Mean R2 of k-NN regression over seeded contiguous-block folds; ties between
// candidates go to the smallest k.
CvGridResult grid_search_k(const FeatureMatrix& x, const std::vector<int>& candidates, int folds,
                           std::uint64_t seed);

} // namespace quantbench::models
