#include "quantbench/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>

#include "quantbench/rand.hpp"

namespace quantbench::models {

namespace {

void check_shape(const FeatureMatrix& x, const char* context) {
    for (const auto& row : x.rows) {
        if (row.size() != x.col_count()) {
            throw DimensionMismatch(std::string(context) + ": ragged feature rows");
        }
    }
    if (x.has_targets() && x.targets.size() != x.rows.size()) {
        throw DimensionMismatch(std::string(context) + ": " + std::to_string(x.targets.size()) +
                                " targets for " + std::to_string(x.rows.size()) + " rows");
    }
}

struct ColumnStats {
    std::vector<double> mean;
    std::vector<double> pop_sd;
};

ColumnStats column_stats(const FeatureMatrix& x) {
    const std::size_t n = x.row_count();
    const std::size_t p = x.col_count();
    ColumnStats stats;
    stats.mean.assign(p, 0);
    stats.pop_sd.assign(p, 0);
    for (std::size_t j = 0; j < p; ++j) {
        long double sum = 0;
        for (const auto& row : x.rows) sum += row[j];
        const double mean = static_cast<double>(sum / n);
        long double sq = 0;
        for (const auto& row : x.rows) {
            const long double d = row[j] - mean;
            sq += d * d;
        }
        stats.mean[j] = mean;
        stats.pop_sd[j] = static_cast<double>(std::sqrt(static_cast<double>(sq / n)));
    }
    return stats;
}

// Householder QR least squares on a row-major n x p system, n >= p.
// Returns nullopt when the triangular factor is numerically rank-deficient.
std::optional<std::vector<double>> qr_solve(std::vector<std::vector<double>> a,
                                            std::vector<double> y) {
    const std::size_t n = a.size();
    const std::size_t p = a.front().size();
    std::vector<double> diag(p, 0);

    for (std::size_t j = 0; j < p; ++j) {
        long double norm_sq = 0;
        for (std::size_t i = j; i < n; ++i) norm_sq += a[i][j] * a[i][j];
        double sigma = static_cast<double>(std::sqrt(static_cast<double>(norm_sq)));
        if (sigma == 0) return std::nullopt;
        if (a[j][j] < 0) sigma = -sigma;
        for (std::size_t i = j; i < n; ++i) a[i][j] /= sigma;
        a[j][j] += 1;

        for (std::size_t k = j + 1; k < p; ++k) {
            long double dot = 0;
            for (std::size_t i = j; i < n; ++i) dot += a[i][j] * a[i][k];
            const double t = static_cast<double>(-dot) / a[j][j];
            for (std::size_t i = j; i < n; ++i) a[i][k] += t * a[i][j];
        }
        long double dot = 0;
        for (std::size_t i = j; i < n; ++i) dot += a[i][j] * y[i];
        const double t = static_cast<double>(-dot) / a[j][j];
        for (std::size_t i = j; i < n; ++i) y[i] += t * a[i][j];

        diag[j] = -sigma;
    }

    double max_diag = 0;
    for (const double d : diag) max_diag = std::max(max_diag, std::abs(d));
    for (const double d : diag) {
        if (std::abs(d) <= 1e-10 * max_diag) return std::nullopt;
    }

    std::vector<double> w(p, 0);
    for (std::size_t jj = p; jj > 0; --jj) {
        const std::size_t j = jj - 1;
        long double acc = y[j];
        for (std::size_t k = j + 1; k < p; ++k) acc -= a[j][k] * w[k];
        w[j] = static_cast<double>(acc) / diag[j];
    }
    return w;
}

using Neighbor = std::pair<double, std::size_t>; // squared distance, stored index

bool neighbor_less(const Neighbor& a, const Neighbor& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        sum += d * d;
    }
    return sum;
}

} // namespace

ScalerParams fit_scaler(ScalerKind kind, const FeatureMatrix& x) {
    if (x.rows.empty() || x.col_count() == 0) throw EmptyMatrix("fit_scaler requires a non-empty matrix");
    check_shape(x, "fit_scaler");

    ScalerParams params;
    params.kind = kind;
    const std::size_t p = x.col_count();
    if (kind == ScalerKind::Standardize) {
        const auto stats = column_stats(x);
        params.offset = stats.mean;
        params.spread = stats.pop_sd;
    } else {
        params.offset.assign(p, 0);
        params.spread.assign(p, 0);
        for (std::size_t j = 0; j < p; ++j) {
            double lo = x.rows.front()[j];
            double hi = lo;
            for (const auto& row : x.rows) {
                lo = std::min(lo, row[j]);
                hi = std::max(hi, row[j]);
            }
            params.offset[j] = lo;
            params.spread[j] = hi - lo;
        }
    }
    return params;
}

std::vector<double> apply_scaler(const ScalerParams& params, const std::vector<double>& row) {
    if (row.size() != params.offset.size()) {
        throw DimensionMismatch("apply_scaler: row has " + std::to_string(row.size()) +
                                " features, scaler has " + std::to_string(params.offset.size()));
    }
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        out[j] = params.spread[j] == 0 ? 0 : (row[j] - params.offset[j]) / params.spread[j];
    }
    return out;
}

FeatureMatrix apply_scaler(const ScalerParams& params, const FeatureMatrix& x) {
    check_shape(x, "apply_scaler");
    FeatureMatrix out;
    out.rows.reserve(x.rows.size());
    for (const auto& row : x.rows) out.rows.push_back(apply_scaler(params, row));
    out.targets = x.targets;
    return out;
}

SplitResult train_test_split(const FeatureMatrix& x, double test_fraction, std::uint64_t seed) {
    check_shape(x, "train_test_split");
    const std::size_t n = x.row_count();
    if (n < 2) throw TooFewRows("train_test_split requires at least 2 rows");
    if (!(test_fraction > 0 && test_fraction < 1)) {
        throw UsageError("test fraction must be in (0, 1)");
    }

    std::size_t test_n = static_cast<std::size_t>(
        std::ceil(static_cast<double>(n) * test_fraction));
    test_n = std::clamp<std::size_t>(test_n, 1, n - 1);

    const auto order = shuffled_indices(n, seed);
    std::vector<std::size_t> test_idx(order.begin(), order.begin() + static_cast<long>(test_n));
    std::vector<std::size_t> train_idx(order.begin() + static_cast<long>(test_n), order.end());
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());

    SplitResult out;
    auto gather = [&x](const std::vector<std::size_t>& idx) {
        FeatureMatrix m;
        m.rows.reserve(idx.size());
        for (const auto i : idx) m.rows.push_back(x.rows[i]);
        if (x.has_targets()) {
            m.targets.reserve(idx.size());
            for (const auto i : idx) m.targets.push_back(x.targets[i]);
        }
        return m;
    };
    out.train = gather(train_idx);
    out.test = gather(test_idx);
    return out;
}

LinearModel fit_linear(const FeatureMatrix& x, double ridge) {
    if (x.rows.empty()) throw EmptyMatrix("fit_linear requires rows");
    if (!x.has_targets()) throw DimensionMismatch("fit_linear requires targets");
    check_shape(x, "fit_linear");
    const std::size_t n = x.row_count();
    const std::size_t p = x.col_count();
    if (n < p + 1) {
        throw TooFewRows("fit_linear requires at least " + std::to_string(p + 1) + " rows, got " +
                         std::to_string(n));
    }

    const auto stats = column_stats(x);
    auto standardized = [&](std::size_t i, std::size_t j) {
        return stats.pop_sd[j] == 0 ? 0.0 : (x.rows[i][j] - stats.mean[j]) / stats.pop_sd[j];
    };

    std::vector<std::vector<double>> design(n, std::vector<double>(p + 1, 0));
    for (std::size_t i = 0; i < n; ++i) {
        design[i][0] = 1;
        for (std::size_t j = 0; j < p; ++j) design[i][j + 1] = standardized(i, j);
    }

    auto w = qr_solve(design, x.targets);
    if (!w && ridge > 0) {
        // Penalize the feature columns only, never the intercept.
        auto augmented = design;
        auto y = x.targets;
        const double lambda = std::sqrt(ridge);
        for (std::size_t j = 0; j < p; ++j) {
            std::vector<double> row(p + 1, 0);
            row[j + 1] = lambda;
            augmented.push_back(std::move(row));
            y.push_back(0);
        }
        w = qr_solve(augmented, y);
    }
    if (!w) throw SingularSystem("design matrix is rank-deficient");

    LinearModel model;
    model.weights.assign(p, 0);
    model.intercept = (*w)[0];
    for (std::size_t j = 0; j < p; ++j) {
        if (stats.pop_sd[j] == 0) continue;
        model.weights[j] = (*w)[j + 1] / stats.pop_sd[j];
        model.intercept -= (*w)[j + 1] * stats.mean[j] / stats.pop_sd[j];
    }
    for (const double v : model.weights) {
        if (!std::isfinite(v)) throw SingularSystem("non-finite coefficients");
    }
    if (!std::isfinite(model.intercept)) throw SingularSystem("non-finite intercept");
    return model;
}

double predict_linear(const LinearModel& model, const std::vector<double>& row) {
    if (row.size() != model.weights.size()) {
        throw DimensionMismatch("predict_linear: row has " + std::to_string(row.size()) +
                                " features, model has " + std::to_string(model.weights.size()));
    }
    long double acc = model.intercept;
    for (std::size_t j = 0; j < row.size(); ++j) acc += model.weights[j] * row[j];
    return static_cast<double>(acc);
}

QuadraticFit fit_quadratic(const std::vector<std::pair<double, double>>& points) {
    std::set<double> distinct;
    for (const auto& [px, py] : points) distinct.insert(px);
    if (points.size() < 3 || distinct.size() < 3) {
        throw DegenerateInput("fit_quadratic requires >= 3 points with >= 3 distinct x values");
    }

    FeatureMatrix x;
    x.rows.reserve(points.size());
    x.targets.reserve(points.size());
    for (const auto& [px, py] : points) {
        x.rows.push_back({px * px, px});
        x.targets.push_back(py);
    }
    const auto model = fit_linear(x);

    QuadraticFit fit;
    fit.a = model.weights[0];
    fit.b = model.weights[1];
    fit.c = model.intercept;
    if (fit.a != 0) {
        fit.vertex_x = -fit.b / (2 * fit.a);
        fit.vertex_y = fit.c - fit.b * fit.b / (4 * fit.a);
    } else {
        fit.vertex_x = std::numeric_limits<double>::quiet_NaN();
        fit.vertex_y = std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

KnnModel fit_knn(FeatureMatrix x, int k) {
    if (x.rows.empty()) throw EmptyMatrix("fit_knn requires rows");
    if (!x.has_targets()) throw DimensionMismatch("fit_knn requires targets");
    check_shape(x, "fit_knn");
    if (k < 1 || static_cast<std::size_t>(k) > x.row_count()) {
        throw KTooLarge("k must be between 1 and " + std::to_string(x.row_count()) + ", got " +
                        std::to_string(k));
    }
    KnnModel model;
    model.data = std::move(x);
    model.k = k;
    return model;
}

double predict_knn(const KnnModel& model, const std::vector<double>& row) {
    if (row.size() != model.data.col_count()) {
        throw DimensionMismatch("predict_knn: row has " + std::to_string(row.size()) +
                                " features, model has " + std::to_string(model.data.col_count()));
    }
    std::vector<Neighbor> neighbors;
    neighbors.reserve(model.data.row_count());
    for (std::size_t i = 0; i < model.data.row_count(); ++i) {
        neighbors.emplace_back(squared_distance(model.data.rows[i], row), i);
    }
    const auto k = static_cast<std::size_t>(model.k);
    std::partial_sort(neighbors.begin(), neighbors.begin() + static_cast<long>(k),
                      neighbors.end(), neighbor_less);
    long double sum = 0;
    for (std::size_t i = 0; i < k; ++i) sum += model.data.targets[neighbors[i].second];
    return static_cast<double>(sum / k);
}

double r2_score(const std::vector<double>& predicted, const std::vector<double>& actual) {
    if (predicted.size() != actual.size() || actual.empty()) {
        throw DimensionMismatch("r2_score requires equal non-empty lists");
    }
    long double mean = 0;
    for (const double v : actual) mean += v;
    mean /= static_cast<long double>(actual.size());

    long double ss_res = 0;
    long double ss_tot = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const long double r = actual[i] - predicted[i];
        const long double t = actual[i] - mean;
        ss_res += r * r;
        ss_tot += t * t;
    }
    if (ss_tot == 0) throw ZeroVariance("actual values are constant");
    return static_cast<double>(1 - ss_res / ss_tot);
}

CvGridResult grid_search_k(const FeatureMatrix& x, const std::vector<int>& candidates, int folds,
                           std::uint64_t seed) {
    if (x.rows.empty()) throw EmptyMatrix("grid_search_k requires rows");
    if (!x.has_targets()) throw DimensionMismatch("grid_search_k requires targets");
    check_shape(x, "grid_search_k");
    if (folds < 2) throw UsageError("grid_search_k requires at least 2 folds");
    if (candidates.empty()) throw InvalidCandidate("candidate list is empty");

    const std::size_t n = x.row_count();
    if (n < static_cast<std::size_t>(folds)) {
        throw TooFewRowsForFolds(std::to_string(n) + " rows cannot fill " +
                                 std::to_string(folds) + " folds");
    }

    // Contiguous blocks over a seeded shuffle; first (n mod folds) are larger.
    const auto order = shuffled_indices(n, seed);
    const std::size_t base = n / static_cast<std::size_t>(folds);
    const std::size_t extra = n % static_cast<std::size_t>(folds);
    const std::size_t largest_fold = base + (extra > 0 ? 1 : 0);
    const std::size_t smallest_train = n - largest_fold;

    int max_k = 0;
    for (const int k : candidates) {
        if (k < 1 || static_cast<std::size_t>(k) > smallest_train) {
            throw InvalidCandidate("candidate k=" + std::to_string(k) +
                                   " exceeds the smallest training fold (" +
                                   std::to_string(smallest_train) + " rows)");
        }
        max_k = std::max(max_k, k);
    }

    std::vector<long double> score_sum(candidates.size(), 0);
    std::vector<std::size_t> score_count(candidates.size(), 0);

    std::size_t fold_start = 0;
    for (int f = 0; f < folds; ++f) {
        const std::size_t fold_size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        const std::size_t fold_end = fold_start + fold_size;

        std::vector<std::size_t> train_idx;
        train_idx.reserve(n - fold_size);
        train_idx.insert(train_idx.end(), order.begin(), order.begin() + static_cast<long>(fold_start));
        train_idx.insert(train_idx.end(), order.begin() + static_cast<long>(fold_end), order.end());

        std::vector<double> actual;
        actual.reserve(fold_size);
        for (std::size_t t = fold_start; t < fold_end; ++t) actual.push_back(x.targets[order[t]]);

        bool constant = true;
        for (const double v : actual) {
            if (v != actual.front()) {
                constant = false;
                break;
            }
        }
        fold_start = fold_end;
        if (constant) continue; // R2 undefined on this fold; skip it for every candidate

        // Distances are shared across candidates: sort each test row's
        // neighbors once, then read prefix means per k.
        std::vector<std::vector<double>> prefix_means(actual.size());
        for (std::size_t t = 0; t < actual.size(); ++t) {
            const auto& query = x.rows[order[fold_end - fold_size + t]];
            std::vector<Neighbor> neighbors;
            neighbors.reserve(train_idx.size());
            for (std::size_t i = 0; i < train_idx.size(); ++i) {
                neighbors.emplace_back(squared_distance(x.rows[train_idx[i]], query), i);
            }
            const auto kk = std::min<std::size_t>(static_cast<std::size_t>(max_k), neighbors.size());
            std::partial_sort(neighbors.begin(), neighbors.begin() + static_cast<long>(kk),
                              neighbors.end(), neighbor_less);
            prefix_means[t].resize(kk);
            long double sum = 0;
            for (std::size_t i = 0; i < kk; ++i) {
                sum += x.targets[train_idx[neighbors[i].second]];
                prefix_means[t][i] = static_cast<double>(sum / (i + 1));
            }
        }

        for (std::size_t c = 0; c < candidates.size(); ++c) {
            std::vector<double> predicted;
            predicted.reserve(actual.size());
            for (const auto& means : prefix_means) {
                predicted.push_back(means[static_cast<std::size_t>(candidates[c]) - 1]);
            }
            score_sum[c] += r2_score(predicted, actual);
            ++score_count[c];
        }
    }

    CvGridResult result;
    result.candidates.reserve(candidates.size());
    double best_score = -std::numeric_limits<double>::infinity();
    int best_k = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const double mean = score_count[c] > 0
                                ? static_cast<double>(score_sum[c] / score_count[c])
                                : -std::numeric_limits<double>::infinity();
        result.candidates.push_back({candidates[c], mean});
        if (mean > best_score || (mean == best_score && candidates[c] < best_k) || best_k == 0) {
            best_score = mean;
            best_k = candidates[c];
        }
    }
    result.chosen_k = best_k;
    return result;
}

} // namespace quantbench::models
