#include "uwbdfl/errors.hpp"
#include "uwbdfl/rti.hpp"

#include <doctest.h>

#include <Eigen/QR>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

using namespace uwbdfl;

namespace {

Eigen::MatrixXd random_full_rank(std::mt19937_64& rng, int rows, int cols)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd w(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) w(r, c) = u(rng);
    return w;
}

}  // namespace

TEST_CASE("grid: index bijection and centroids")
{
    const VoxelGrid g(Point2(-1.0, 2.0), 0.15, 7, 5);
    CHECK(g.size() == 35);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(g.index(g.ix(i), g.iy(i)) == i);
        const Point2 c = g.centroid(i);
        CHECK(c.x() == doctest::Approx(-1.0 + 0.15 * (g.ix(i) + 0.5)));
        CHECK(c.y() == doctest::Approx(2.0 + 0.15 * (g.iy(i) + 0.5)));
    }
    CHECK(g.index(3, 2) == 17);
    CHECK_THROWS_AS(g.index(7, 0), InvalidParameter);
    CHECK_THROWS_AS(VoxelGrid(Point2(0, 0), 0.0, 1, 1), InvalidParameter);

    const auto cover = VoxelGrid::covering(Bounds{0, 0, 4, 4.4}, 0.15);
    CHECK(cover.origin().isApprox(Point2(-0.15, -0.15)));
    CHECK(cover.origin().x() + cover.voxel_size() * cover.nx() >= 4.0 + 0.15 - 1e-9);
    CHECK(cover.origin().y() + cover.voxel_size() * cover.ny() >= 4.4 + 0.15 - 1e-9);
}

TEST_CASE("link geometry: ellipse area")
{
    const LinkGeometry l(Point2(0, 0), Point2(4, 0), 0.05);
    const double a = 4.05 / 2, b = std::sqrt(4.05 * 4.05 - 16.0) / 2;
    CHECK(l.semi_major() == doctest::Approx(a));
    CHECK(l.semi_minor() == doctest::Approx(b));
    CHECK(l.area() == doctest::Approx(std::numbers::pi * a * b));
    CHECK_THROWS_AS(LinkGeometry(Point2(1, 1), Point2(1, 1), 0.05), InvalidParameter);
    CHECK_THROWS_AS(LinkGeometry(Point2(0, 0), Point2(1, 1), 0.0), InvalidParameter);
}

TEST_CASE("weights: midpoint inside, far voxel outside")
{
    // Voxel centroids at x = 0.05 + 0.1 k, y = -0.05 + 0.1 k; one centroid at (2, 0.05).
    const VoxelGrid g(Point2(-1.0, -10.0), 0.1, 60, 201);
    const LinkGeometry link(Point2(0.0, 0.05), Point2(4.0, 0.05), 0.05);
    const auto w = build_weights({link}, g);
    const auto mid = g.index(30, 100);
    CHECK(g.centroid(mid).isApprox(Point2(2.05, 0.05)));
    CHECK(w.at(0, mid) == doctest::Approx(1.0 / link.area()));
    const auto far = g.index(30, 0);
    CHECK(g.centroid(far).y() < -9.0);
    CHECK(w.at(0, far) == 0.0);
}

TEST_CASE("weights: brute-force ellipse test on random links and grids")
{
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const VoxelGrid g(Point2(-1 + u(rng), -1 + u(rng)), 0.1 + 0.2 * u(rng), 5 + trial % 20, 5 + (trial * 7) % 20);
        std::vector<LinkGeometry> links;
        for (int l = 0; l < 8; ++l)
            links.emplace_back(Point2(5 * u(rng) - 1, 5 * u(rng) - 1), Point2(5 * u(rng) - 1, 5 * u(rng) - 1),
                               0.02 + 0.3 * u(rng));
        const auto w = build_weights(links, g);
        REQUIRE(w.rows() == links.size());
        REQUIRE(w.cols() == g.size());
        for (std::size_t l = 0; l < links.size(); ++l) {
            const double area = std::numbers::pi * (links[l].length() + links[l].excess) / 2.0 *
                                std::sqrt(std::pow(links[l].length() + links[l].excess, 2) - std::pow(links[l].length(), 2)) /
                                2.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const Point2 c = g.centroid(i);
                const bool inside = std::hypot(c.x() - links[l].tx.x(), c.y() - links[l].tx.y()) +
                                        std::hypot(c.x() - links[l].rx.x(), c.y() - links[l].rx.y()) <
                                    links[l].length() + links[l].excess;
                CHECK(w.at(l, i) == doctest::Approx(inside ? 1.0 / area : 0.0));
            }
        }
    }
}

TEST_CASE("property: weights are symmetric in tx/rx and grow with the excess length")
{
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    const VoxelGrid g(Point2(0, 0), 0.15, 27, 27);
    for (int trial = 0; trial < 30; ++trial) {
        const Point2 a(u(rng), u(rng)), b(u(rng), u(rng));
        const auto fwd = build_weights({LinkGeometry(a, b, 0.05)}, g);
        const auto rev = build_weights({LinkGeometry(b, a, 0.05)}, g);
        CHECK(fwd.row_indices(0) == rev.row_indices(0));
        CHECK(fwd.row_value(0) == rev.row_value(0));
        std::size_t prev = 0;
        std::vector<int> prev_idx;
        for (double lambda : {0.01, 0.05, 0.1, 0.3, 1.0}) {
            const auto w = build_weights({LinkGeometry(a, b, lambda)}, g);
            const auto& idx = w.row_indices(0);
            CHECK(idx.size() >= prev);
            CHECK(std::includes(idx.begin(), idx.end(), prev_idx.begin(), prev_idx.end()));
            prev = idx.size();
            prev_idx = idx;
        }
    }
}

TEST_CASE("prior covariance: diagonal, decay, positive definite")
{
    const VoxelGrid g(Point2(0, 0), 0.5, 3, 3);
    const auto c = build_prior_covariance(g, 2.0, 0.5);
    for (int i = 0; i < 9; ++i) CHECK(c(i, i) == 2.0);
    // Neighbours along x are exactly delta_c apart.
    CHECK(c(0, 1) == doctest::Approx(2.0 * std::exp(-1.0)));
    CHECK(c(0, 8) == doctest::Approx(2.0 * std::exp(-std::sqrt(2.0) * 2.0)));
    CHECK(c.isApprox(c.transpose()));

    // Unpivoted Gaussian elimination: every pivot positive.
    Eigen::MatrixXd a = c;
    for (int k = 0; k < 9; ++k) {
        CHECK(a(k, k) > 0.0);
        for (int i = k + 1; i < 9; ++i) {
            const double f = a(i, k) / a(k, k);
            for (int j = k; j < 9; ++j) a(i, j) -= f * a(k, j);
        }
    }
}

TEST_CASE("solver: scalar closed form")
{
    Eigen::MatrixXd w(1, 1), c(1, 1);
    w << 2.0;
    c << 1.0;
    const ImageSolver s(w, c, 0.5);
    Eigen::VectorXd y(1);
    y << 3.0;
    CHECK(s.solve(y)(0) == doctest::Approx(6.0 / 4.5));
}

TEST_CASE("solver: vanishing regularization matches the pseudoinverse")
{
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 5, l = 5 + trial % 6;
        const Eigen::MatrixXd w = random_full_rank(rng, l, m);
        const VoxelGrid g(Point2(0, 0), 0.3, 5, 1);
        const auto c = build_prior_covariance(g, 1.0, 0.5);
        const ImageSolver s(w, c, 1e-12);
        const Eigen::VectorXd y = Eigen::VectorXd::Random(l);
        const Eigen::VectorXd oracle = w.completeOrthogonalDecomposition().pseudoInverse() * y;
        const Eigen::VectorXd x = s.solve(y);
        CHECK((x - oracle).norm() <= 1e-6 * oracle.norm());

        // Fixed point: consistent data is reproduced.
        Eigen::VectorXd x_true = Eigen::VectorXd::Zero(m);
        x_true(trial % m) = 1.5;
        CHECK((s.solve(w * x_true) - x_true).norm() < 1e-6);
        CHECK(s.solve(Eigen::VectorXd::Zero(l)).norm() == 0.0);
    }
}

TEST_CASE("solver: singular system without regularization")
{
    Eigen::MatrixXd w(2, 3);
    w << 1, 0, 0, 0, 1, 0;
    const VoxelGrid g(Point2(0, 0), 0.3, 3, 1);
    const auto c = build_prior_covariance(g, 1.0, 0.5);
    CHECK_THROWS_AS(ImageSolver(w, c, 0.0), SingularSystem);
    CHECK_NOTHROW(ImageSolver(w, c, 0.1));
}

TEST_CASE("property: damping and argmax invariance")
{
    const auto g = VoxelGrid::covering(Bounds{0, 0, 2, 2}, 0.2);
    std::vector<LinkGeometry> links;
    for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= 10; j += 5) {
            links.emplace_back(Point2(-0.5, 0.2 * i), Point2(2.5, 0.2 * j), 0.05);
            links.emplace_back(Point2(0.2 * i, -0.5), Point2(0.2 * j, 2.5), 0.05);
        }
    const auto w = build_weights(links, g);
    std::mt19937_64 rng(73);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    std::vector<double> y(links.size());
    for (auto& v : y) v = u(rng);

    double prev = INFINITY;
    for (double s2 : {1e-4, 1e-2, 0.1, 1.0, 10.0, 100.0}) {
        RTIParams p;
        p.voxel_size = 0.2;
        p.sigma2_m = s2;
        const auto img = solve_image(w, y, g, p);
        CHECK(img.values.norm() <= prev * (1 + 1e-12));
        prev = img.values.norm();
        for (double scale : {0.01, 3.0, 250.0}) {
            std::vector<double> ys = y;
            for (auto& v : ys) v *= scale;
            const auto scaled = solve_image(w, ys, g, p);
            CHECK((scaled.values - scale * img.values).norm() <= 1e-9 * scale * img.values.norm());
            CHECK(localize(scaled).voxel == localize(img).voxel);
        }
    }
}

TEST_CASE("localize: single voxel, unique max, ties")
{
    const VoxelGrid one(Point2(1, 1), 0.5, 1, 1);
    ImageVector img{Eigen::VectorXd::Constant(1, -3.0), one};
    CHECK(localize(img).position.isApprox(Point2(1.25, 1.25)));

    const VoxelGrid g(Point2(0, 0), 0.1, 10, 10);
    ImageVector x{Eigen::VectorXd::Zero(100), g};
    x.values(static_cast<Eigen::Index>(g.index(3, 7))) = 2.0;
    const auto loc = localize(x);
    CHECK(loc.voxel == g.index(3, 7));
    CHECK(loc.position.isApprox(Point2(0.35, 0.75)));
    CHECK(loc.peak == 2.0);

    x.values(static_cast<Eigen::Index>(g.index(1, 2))) = 2.0;
    CHECK(localize(x).voxel == g.index(1, 2));
}

TEST_CASE("localization error")
{
    CHECK(localization_error(Point2(1, 2), Point2(1, 2)) == 0.0);
    CHECK(localization_error(Point2(0, 0), Point2(0.3, 0.4)) == doctest::Approx(0.5));
}

TEST_CASE("image outputs")
{
    const VoxelGrid g(Point2(0, 0), 1.0, 3, 2);
    ImageVector img{Eigen::VectorXd(6), g};
    img.values << 0.0, 1.0, 2.0, 3.0, 4.0, 5.0;
    std::ostringstream csv;
    write_image_csv(csv, img);
    CHECK(csv.str() == "x,y,intensity\n0.5,0.5,0\n1.5,0.5,1\n2.5,0.5,2\n0.5,1.5,3\n1.5,1.5,4\n2.5,1.5,5\n");

    const auto path = std::filesystem::temp_directory_path() / "uwbdfl_rti_test.pgm";
    write_image_pgm(path, img);
    std::ifstream in(path, std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string header = "P5\n3 2\n255\n";
    REQUIRE(bytes.size() == header.size() + 6);
    CHECK(bytes.substr(0, header.size()) == header);
    // Top row is the largest y.
    const auto px = [&](std::size_t k) { return static_cast<unsigned char>(bytes[header.size() + k]); };
    CHECK(px(0) == 153);
    CHECK(px(2) == 255);
    CHECK(px(3) == 0);
    CHECK(px(5) == 102);
    std::filesystem::remove(path);

    std::ostringstream rep;
    write_localization_report(rep, {{"P1", Point2(0, 0), Point2(0.3, 0.4), 0.5}, {"P2", Point2(1, 1), Point2(1, 1), 0.0}});
    CHECK(rep.str() == "position_id,true_x,true_y,est_x,est_y,error_m\nP1,0,0,0.3,0.4,0.5\nP2,1,1,1,1,0\nmean,,,,,0.25\n");
}
