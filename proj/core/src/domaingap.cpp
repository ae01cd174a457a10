#include "uwimf/domaingap.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

namespace uwimf {

FeatureVector extract_features(const LinearImage& img) {
    validate(img);
    FeatureVector f{};
    const std::size_t n = img.pixel_count();
    for (int c = 0; c < 3; ++c) {
        double mean = 0.0;
        double m2 = 0.0;
        std::array<std::size_t, kHistogramBins> hist{};
        for (std::size_t p = 0; p < n; ++p) {
            const double v = img.at(p, c);
            const double delta = v - mean;
            mean += delta / static_cast<double>(p + 1);
            m2 += delta * (v - mean);
            const double clamped_v = std::clamp(v, 0.0, 1.0);
            const int bin = std::min(static_cast<int>(clamped_v * kHistogramBins), kHistogramBins - 1);
            ++hist[bin];
        }
        f[c] = mean;
        f[3 + c] = std::sqrt(m2 / static_cast<double>(n));
        for (int b = 0; b < kHistogramBins; ++b) {
            f[6 + c * kHistogramBins + b] = static_cast<double>(hist[b]) / static_cast<double>(n);
        }
    }
    return f;
}

Embedding2D embed_2d(std::span<const FeatureVector> features) {
    const auto n = static_cast<Eigen::Index>(features.size());
    if (n < 3) throw InvalidInput("embed_2d: need at least 3 feature vectors");

    Eigen::MatrixXd x(n, kFeatureDims);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int d = 0; d < kFeatureDims; ++d) x(i, d) = features[static_cast<std::size_t>(i)][d];
    }

    std::vector<Eigen::Index> kept;
    for (int d = 0; d < kFeatureDims; ++d) {
        const double mean = x.col(d).mean();
        x.col(d).array() -= mean;
        const double var = x.col(d).squaredNorm() / static_cast<double>(n);
        const double scale = std::max(1.0, std::abs(mean));
        if (var > 1e-24 * scale * scale) {
            x.col(d) /= std::sqrt(var);
            kept.push_back(d);
        }
    }

    Embedding2D out;
    out.points.resize(static_cast<std::size_t>(n));
    if (kept.empty()) return out;

    Eigen::MatrixXd z(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) z.col(static_cast<Eigen::Index>(k)) = x.col(kept[k]);

    const Eigen::MatrixXd cov = (z.transpose() * z) / static_cast<double>(n);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    const Eigen::Index dims = cov.rows();
    // Eigenvalues ascend; take the last two.
    for (int comp = 0; comp < 2 && comp < dims; ++comp) {
        Eigen::VectorXd axis = solver.eigenvectors().col(dims - 1 - comp);
        Eigen::Index arg = 0;
        axis.cwiseAbs().maxCoeff(&arg);
        if (axis(arg) < 0.0) axis = -axis;
        const Eigen::VectorXd proj = z * axis;
        for (Eigen::Index i = 0; i < n; ++i) {
            auto& pt = out.points[static_cast<std::size_t>(i)];
            (comp == 0 ? pt.u : pt.v) = proj(i);
        }
    }
    return out;
}

double intersection_ratio(const Embedding2D& a, const Embedding2D& b, int grid) {
    if (a.points.empty() || b.points.empty()) throw InvalidInput("intersection_ratio: empty embedding");
    if (grid < 1) throw InvalidInput("intersection_ratio: grid must be positive");
    double u_lo = std::numeric_limits<double>::infinity();
    double u_hi = -u_lo;
    double v_lo = u_lo;
    double v_hi = -u_lo;
    for (const auto* set : {&a, &b}) {
        for (const Point2& p : set->points) {
            if (!std::isfinite(p.u) || !std::isfinite(p.v)) {
                throw InvalidInput("intersection_ratio: non-finite embedding coordinate");
            }
            u_lo = std::min(u_lo, p.u);
            u_hi = std::max(u_hi, p.u);
            v_lo = std::min(v_lo, p.v);
            v_hi = std::max(v_hi, p.v);
        }
    }
    auto cell = [grid](double value, double lo, double hi) {
        if (hi <= lo) return 0;
        const int k = static_cast<int>(std::floor((value - lo) / (hi - lo) * grid));
        return std::clamp(k, 0, grid - 1);
    };
    auto occupied = [&](const Embedding2D& e) {
        std::set<std::pair<int, int>> cells;
        for (const Point2& p : e.points) cells.emplace(cell(p.u, u_lo, u_hi), cell(p.v, v_lo, v_hi));
        return cells;
    };
    const auto cells_a = occupied(a);
    const auto cells_b = occupied(b);
    std::size_t shared = 0;
    for (const auto& c : cells_a) shared += cells_b.count(c);
    return 100.0 * static_cast<double>(shared) / static_cast<double>(cells_a.size());
}

double center_distance(const Embedding2D& a, const Embedding2D& b) {
    if (a.points.empty() || b.points.empty()) throw InvalidInput("center_distance: empty embedding");
    auto centroid = [](const Embedding2D& e) {
        Point2 c;
        for (const Point2& p : e.points) {
            c.u += p.u;
            c.v += p.v;
        }
        c.u /= static_cast<double>(e.points.size());
        c.v /= static_cast<double>(e.points.size());
        return c;
    };
    const Point2 ca = centroid(a);
    const Point2 cb = centroid(b);
    return std::hypot(ca.u - cb.u, ca.v - cb.v);
}

}  // namespace uwimf
