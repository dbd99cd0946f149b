#pragma once

// Radio tomographic imaging: ellipse weight model, exponential spatial prior,
// regularized least-squares image reconstruction, and peak localization.

#include "uwbdfl/channel_sim.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace uwbdfl {

class VoxelGrid {
public:
    VoxelGrid(Point2 origin, double voxel_size, int nx, int ny);

    /// Grid over `area` padded by `margin_voxels` on every side.
    static VoxelGrid covering(const Bounds& area, double voxel_size, int margin_voxels = 1);

    const Point2& origin() const { return origin_; }
    double voxel_size() const { return voxel_size_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }

    /// Row-major: index = iy * nx + ix.
    std::size_t index(int ix, int iy) const;
    int ix(std::size_t index) const { return static_cast<int>(index % static_cast<std::size_t>(nx_)); }
    int iy(std::size_t index) const { return static_cast<int>(index / static_cast<std::size_t>(nx_)); }
    Point2 centroid(std::size_t index) const;

private:
    Point2 origin_;
    double voxel_size_;
    int nx_, ny_;
};

struct LinkGeometry {
    Point2 tx = Point2::Zero();
    Point2 rx = Point2::Zero();
    double excess = 0.05;  // lambda, m

    LinkGeometry() = default;
    LinkGeometry(Point2 tx, Point2 rx, double excess);

    double length() const { return (tx - rx).norm(); }
    double semi_major() const { return (length() + excess) / 2.0; }
    double semi_minor() const;
    double area() const;
};

struct RTIParams {
    double excess = 0.05;        // lambda, m
    double voxel_size = 0.15;    // m
    double sigma2_m = 0.1;       // regularization weight
    double sigma2_x = 1.0;       // prior voxel variance
    double correlation = 0.5;    // delta_c, m

    void validate() const;
};

/// L x M ellipse weights: w_{l,i} = 1/A_l inside the ellipse, 0 elsewhere.
class WeightMatrix {
public:
    WeightMatrix(std::size_t cols, std::vector<std::vector<int>> rows, std::vector<double> row_values);

    std::size_t rows() const { return rows_.size(); }
    std::size_t cols() const { return cols_; }
    const std::vector<int>& row_indices(std::size_t l) const { return rows_[l]; }
    double row_value(std::size_t l) const { return values_[l]; }
    double at(std::size_t l, std::size_t i) const;
    std::size_t nonzeros() const;

    Eigen::SparseMatrix<double, Eigen::RowMajor> sparse() const;
    Eigen::MatrixXd dense() const;

private:
    std::size_t cols_;
    std::vector<std::vector<int>> rows_;
    std::vector<double> values_;
};

WeightMatrix build_weights(const std::vector<LinkGeometry>& links, const VoxelGrid& grid);

/// [C]_{jk} = sigma2_x exp(-d_jk / delta_c) over voxel centroids.
Eigen::MatrixXd build_prior_covariance(const VoxelGrid& grid, double sigma2_x, double correlation);

/// Factorizes (W^T W + sigma2_M C^{-1}) once; solve() applies it to any y.
class ImageSolver {
public:
    ImageSolver(const Eigen::MatrixXd& w, const Eigen::MatrixXd& prior_cov, double sigma2_m);
    ImageSolver(const WeightMatrix& w, const VoxelGrid& grid, const RTIParams& params);

    Eigen::VectorXd solve(const Eigen::VectorXd& y) const;
    std::size_t links() const { return static_cast<std::size_t>(w_.rows()); }
    std::size_t voxels() const { return static_cast<std::size_t>(w_.cols()); }

private:
    void factorize(const Eigen::MatrixXd& prior_cov, double sigma2_m);

    Eigen::MatrixXd w_;
    Eigen::LLT<Eigen::MatrixXd> normal_;
};

struct ImageVector {
    Eigen::VectorXd values;
    VoxelGrid grid;
};

ImageVector solve_image(const WeightMatrix& w, const std::vector<double>& y, const VoxelGrid& grid,
                        const RTIParams& params);

struct Localization {
    Point2 position = Point2::Zero();
    double peak = 0.0;
    std::size_t voxel = 0;
};

/// Centroid of the brightest voxel, lowest index on ties.
Localization localize(const ImageVector& image);

double localization_error(const Point2& estimate, const Point2& truth);

void write_image_csv(std::ostream& out, const ImageVector& image);
/// Min-max normalized 8-bit PGM with the top image row at the largest y.
void write_image_pgm(const std::filesystem::path& path, const ImageVector& image);

struct LocalizationRow {
    std::string position_id;
    Point2 truth = Point2::Zero();
    Point2 estimate = Point2::Zero();
    double error = 0.0;
};

inline constexpr const char* kLocalizationReportHeader = "position_id,true_x,true_y,est_x,est_y,error_m";

/// Per-position rows followed by a "mean" row carrying the average error.
void write_localization_report(std::ostream& out, const std::vector<LocalizationRow>& rows);

}  // namespace uwbdfl
