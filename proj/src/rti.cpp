#include "uwbdfl/rti.hpp"

#include "uwbdfl/errors.hpp"
#include "uwbdfl/output.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace uwbdfl {

VoxelGrid::VoxelGrid(Point2 origin, double voxel_size, int nx, int ny)
    : origin_(std::move(origin)), voxel_size_(voxel_size), nx_(nx), ny_(ny)
{
    if (!(voxel_size_ > 0.0)) throw InvalidParameter("voxel size must be > 0");
    if (nx_ <= 0 || ny_ <= 0) throw InvalidParameter("grid dimensions must be positive");
}

VoxelGrid VoxelGrid::covering(const Bounds& area, double voxel_size, int margin_voxels)
{
    if (!(voxel_size > 0.0)) throw InvalidParameter("voxel size must be > 0");
    if (!(area.width() > 0.0 && area.height() > 0.0)) throw InvalidParameter("monitored area is degenerate");
    const int nx = static_cast<int>(std::ceil(area.width() / voxel_size - 1e-9)) + 2 * margin_voxels;
    const int ny = static_cast<int>(std::ceil(area.height() / voxel_size - 1e-9)) + 2 * margin_voxels;
    const Point2 origin(area.xmin - margin_voxels * voxel_size, area.ymin - margin_voxels * voxel_size);
    return VoxelGrid(origin, voxel_size, nx, ny);
}

std::size_t VoxelGrid::index(int ix, int iy) const
{
    if (ix < 0 || ix >= nx_ || iy < 0 || iy >= ny_) throw InvalidParameter("voxel coordinates out of range");
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(ix);
}

Point2 VoxelGrid::centroid(std::size_t index) const
{
    return origin_ + Point2((ix(index) + 0.5) * voxel_size_, (iy(index) + 0.5) * voxel_size_);
}

LinkGeometry::LinkGeometry(Point2 tx_, Point2 rx_, double excess_) : tx(std::move(tx_)), rx(std::move(rx_)), excess(excess_)
{
    if (!(length() > 0.0)) throw InvalidParameter("link endpoints must differ");
    if (!(excess > 0.0)) throw InvalidParameter("ellipse excess length must be > 0");
}

double LinkGeometry::semi_minor() const
{
    const double d = length();
    const double major = d + excess;
    return std::sqrt(major * major - d * d) / 2.0;
}

double LinkGeometry::area() const { return std::numbers::pi * semi_major() * semi_minor(); }

void RTIParams::validate() const
{
    if (!(excess > 0.0)) throw InvalidParameter("rti excess must be > 0");
    if (!(voxel_size > 0.0)) throw InvalidParameter("rti voxel size must be > 0");
    if (!(sigma2_m >= 0.0)) throw InvalidParameter("rti sigma2_M must be >= 0");
    if (!(sigma2_x > 0.0)) throw InvalidParameter("rti sigma2_x must be > 0");
    if (!(correlation > 0.0)) throw InvalidParameter("rti correlation distance must be > 0");
}

WeightMatrix::WeightMatrix(std::size_t cols, std::vector<std::vector<int>> rows, std::vector<double> row_values)
    : cols_(cols), rows_(std::move(rows)), values_(std::move(row_values))
{
    if (rows_.size() != values_.size()) throw InvalidParameter("weight rows and values disagree in length");
}

double WeightMatrix::at(std::size_t l, std::size_t i) const
{
    const auto& r = rows_[l];
    return std::binary_search(r.begin(), r.end(), static_cast<int>(i)) ? values_[l] : 0.0;
}

std::size_t WeightMatrix::nonzeros() const
{
    std::size_t n = 0;
    for (const auto& r : rows_) n += r.size();
    return n;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> WeightMatrix::sparse() const
{
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(nonzeros());
    for (std::size_t l = 0; l < rows_.size(); ++l)
        for (int i : rows_[l]) triplets.emplace_back(static_cast<int>(l), i, values_[l]);
    Eigen::SparseMatrix<double, Eigen::RowMajor> m(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols_));
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

Eigen::MatrixXd WeightMatrix::dense() const { return Eigen::MatrixXd(sparse()); }

WeightMatrix build_weights(const std::vector<LinkGeometry>& links, const VoxelGrid& grid)
{
    std::vector<std::vector<int>> rows(links.size());
    std::vector<double> values(links.size());
    const double s = grid.voxel_size();

    for (std::size_t l = 0; l < links.size(); ++l) {
        const LinkGeometry& link = links[l];
        const double d = link.length();
        const double reach = d + link.excess;
        values[l] = 1.0 / link.area();

        // Every in-ellipse point lies within the semi-major axis of the midpoint.
        const Point2 mid = 0.5 * (link.tx + link.rx);
        const double r = link.semi_major() + s;
        const int ix0 = std::max(0, static_cast<int>(std::floor((mid.x() - r - grid.origin().x()) / s)));
        const int ix1 = std::min(grid.nx() - 1, static_cast<int>(std::ceil((mid.x() + r - grid.origin().x()) / s)));
        const int iy0 = std::max(0, static_cast<int>(std::floor((mid.y() - r - grid.origin().y()) / s)));
        const int iy1 = std::min(grid.ny() - 1, static_cast<int>(std::ceil((mid.y() + r - grid.origin().y()) / s)));

        for (int iy = iy0; iy <= iy1; ++iy)
            for (int ix = ix0; ix <= ix1; ++ix) {
                const std::size_t i = grid.index(ix, iy);
                const Point2 c = grid.centroid(i);
                if ((c - link.tx).norm() + (c - link.rx).norm() < reach) rows[l].push_back(static_cast<int>(i));
            }
    }
    return WeightMatrix(grid.size(), std::move(rows), std::move(values));
}

Eigen::MatrixXd build_prior_covariance(const VoxelGrid& grid, double sigma2_x, double correlation)
{
    if (!(sigma2_x > 0.0) || !(correlation > 0.0)) throw InvalidParameter("prior variance and correlation must be > 0");
    const auto m = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd c(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Point2 pj = grid.centroid(static_cast<std::size_t>(j));
        c(j, j) = sigma2_x;
        for (Eigen::Index k = j + 1; k < m; ++k) {
            const double v = sigma2_x * std::exp(-(pj - grid.centroid(static_cast<std::size_t>(k))).norm() / correlation);
            c(j, k) = v;
            c(k, j) = v;
        }
    }
    return c;
}

ImageSolver::ImageSolver(const Eigen::MatrixXd& w, const Eigen::MatrixXd& prior_cov, double sigma2_m) : w_(w)
{
    factorize(prior_cov, sigma2_m);
}

ImageSolver::ImageSolver(const WeightMatrix& w, const VoxelGrid& grid, const RTIParams& params) : w_(w.dense())
{
    params.validate();
    if (w.cols() != grid.size()) throw InvalidParameter("weight matrix does not match grid");
    factorize(build_prior_covariance(grid, params.sigma2_x, params.correlation), params.sigma2_m);
}

void ImageSolver::factorize(const Eigen::MatrixXd& prior_cov, double sigma2_m)
{
    const Eigen::Index m = w_.cols();
    if (prior_cov.rows() != m || prior_cov.cols() != m) throw InvalidParameter("prior covariance has wrong size");
    if (!(sigma2_m >= 0.0)) throw InvalidParameter("sigma2_M must be >= 0");

    Eigen::MatrixXd normal = w_.transpose() * w_;
    if (sigma2_m > 0.0) {
        // C^{-1} is applied through the Cholesky factor of C.
        const Eigen::LLT<Eigen::MatrixXd> prior(prior_cov);
        if (prior.info() != Eigen::Success) throw SingularSystem("prior covariance is not positive definite");
        normal += sigma2_m * prior.solve(Eigen::MatrixXd::Identity(m, m));
        normal = 0.5 * (normal + normal.transpose()).eval();
    } else {
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(w_);
        if (qr.rank() < m) throw SingularSystem("W^T W is rank deficient and regularization is disabled");
    }
    normal_.compute(normal);
    if (normal_.info() != Eigen::Success) throw SingularSystem("normal equations are not positive definite");
}

Eigen::VectorXd ImageSolver::solve(const Eigen::VectorXd& y) const
{
    if (y.size() != w_.rows()) throw InvalidParameter("measurement vector length does not match link count");
    return normal_.solve(w_.transpose() * y);
}

ImageVector solve_image(const WeightMatrix& w, const std::vector<double>& y, const VoxelGrid& grid,
                        const RTIParams& params)
{
    const ImageSolver solver(w, grid, params);
    const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    return ImageVector{solver.solve(yv), grid};
}

Localization localize(const ImageVector& image)
{
    if (image.values.size() == 0) throw InvalidParameter("image is empty");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < image.values.size(); ++i)
        if (image.values[i] > image.values[best]) best = i;
    const auto idx = static_cast<std::size_t>(best);
    return Localization{image.grid.centroid(idx), image.values[best], idx};
}

double localization_error(const Point2& estimate, const Point2& truth) { return (estimate - truth).norm(); }

void write_image_csv(std::ostream& out, const ImageVector& image)
{
    out << "x,y,intensity\n";
    for (std::size_t i = 0; i < image.grid.size(); ++i) {
        const Point2 c = image.grid.centroid(i);
        out << format_number(c.x()) << ',' << format_number(c.y()) << ','
            << format_number(image.values[static_cast<Eigen::Index>(i)]) << '\n';
    }
}

void write_image_pgm(const std::filesystem::path& path, const ImageVector& image)
{
    const int nx = image.grid.nx();
    const int ny = image.grid.ny();
    const double lo = image.values.minCoeff();
    const double hi = image.values.maxCoeff();
    std::vector<unsigned char> pixels(image.grid.size(), 0);
    if (hi > lo) {
        for (int row = 0; row < ny; ++row) {
            const int iy = ny - 1 - row;
            for (int ix = 0; ix < nx; ++ix) {
                const double v = image.values[static_cast<Eigen::Index>(image.grid.index(ix, iy))];
                pixels[static_cast<std::size_t>(row) * nx + ix] =
                    static_cast<unsigned char>(std::lround(255.0 * (v - lo) / (hi - lo)));
            }
        }
    }
    write_pgm(path, nx, ny, pixels);
}

void write_localization_report(std::ostream& out, const std::vector<LocalizationRow>& rows)
{
    out << kLocalizationReportHeader << '\n';
    double sum = 0.0;
    for (const auto& r : rows) {
        out << r.position_id << ',' << format_number(r.truth.x()) << ',' << format_number(r.truth.y()) << ','
            << format_number(r.estimate.x()) << ',' << format_number(r.estimate.y()) << ','
            << format_number(r.error) << '\n';
        sum += r.error;
    }
    if (!rows.empty()) out << "mean,,,,," << format_number(sum / static_cast<double>(rows.size())) << '\n';
}

}  // namespace uwbdfl
