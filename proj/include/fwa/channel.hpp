// SPDX-License-Identifier: Apache-2.0
//
// Home placement, rural-macro LoS path loss, UPA geometry, exponential
// antenna correlation, and the tapped-delay-line MIMO channel.

#ifndef FWA_CHANNEL_HPP
#define FWA_CHANNEL_HPP

#include "fwa/rng.hpp"
#include "fwa/scenario.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace fwa {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using Point3 = Eigen::Vector3d;

struct HomePlacement
{
    double x_m = 0.0;
    double y_m = 0.0;
    double distance_2d_m = 0.0;
    double distance_3d_m = 0.0;
    double rician_factor_linear = 1.0;
    double large_scale_gain = 0.0;
    double path_loss_db = 0.0; // including shadowing
    double shadowing_db = 0.0;
};

/// Power delay profile of the tapped delay line.
struct TapProfile
{
    std::vector<double> delays_ns;
    std::vector<double> powers;

    static TapProfile standard()
    {
        return {{0.0, 51.33, 54.40, 56.30, 54.40, 71.12, 190.92, 192.93},
                {0.9209, 0.0244, 0.0144, 0.0097, 0.0048, 0.0053, 0.0128, 0.0077}};
    }

    static TapProfile flat() { return {{0.0}, {1.0}}; }

    std::size_t size() const { return delays_ns.size(); }
};

struct TapSet
{
    std::vector<CMatrix> taps; // M_H x M_BS each
    std::vector<double> delays_ns;
    std::vector<double> powers;
};

/// Uniform-by-area positions on the annulus [min_distance, radius] plus a
/// Rician factor per home. large_scale_gain is left for rma_los_path_loss.
inline std::vector<HomePlacement> sample_positions(const CellScenario &cell, int count, Rng &rng)
{
    if (count < 1)
        throw std::invalid_argument("sample_positions: count must be >= 1");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> kappa_db(cell.rician_mean_db, cell.rician_std_db);
    const double r0 = cell.min_distance_m * cell.min_distance_m;
    const double r1 = cell.radius_m * cell.radius_m;
    const double dh = cell.bs_height_m - cell.home_height_m;

    std::vector<HomePlacement> homes(static_cast<std::size_t>(count));
    for (auto &h : homes)
    {
        const double d = std::sqrt(r0 + (r1 - r0) * unit(rng));
        const double phi = 2.0 * std::numbers::pi * unit(rng);
        h.x_m = d * std::cos(phi);
        h.y_m = d * std::sin(phi);
        h.distance_2d_m = d;
        h.distance_3d_m = std::sqrt(d * d + dh * dh);
        const double kdb = cell.rician_std_db > 0.0 ? kappa_db(rng) : cell.rician_mean_db;
        h.rician_factor_linear = std::pow(10.0, kdb / 10.0);
    }
    return homes;
}

inline double rma_breakpoint_m(const CellScenario &cell, const SystemSetting &s)
{
    return 2.0 * std::numbers::pi * cell.bs_height_m * cell.home_height_m * s.carrier_frequency_hz /
           speed_of_light_mps;
}

/// Deterministic RMa LoS path loss (dB) below the breakpoint distance.
inline double rma_los_path_loss_db(double distance_3d_m, double building_height_m, double carrier_frequency_hz)
{
    const double fc = carrier_frequency_hz / 1e9;
    const double h = building_height_m;
    const double hp = std::pow(h, 1.72);
    return 20.0 * std::log10(40.0 * std::numbers::pi * distance_3d_m * fc / 3.0) +
           std::min(0.03 * hp, 10.0) * std::log10(distance_3d_m) - std::min(0.044 * hp, 14.77) +
           0.002 * std::log10(h) * distance_3d_m;
}

/// Fills path loss, shadowing and large-scale gain of `home`; returns the gain.
inline double rma_los_path_loss(HomePlacement &home, const CellScenario &cell, const SystemSetting &s, Rng &rng)
{
    if (home.distance_2d_m < 10.0)
        throw std::domain_error("rma_los_path_loss: 2D distance below 10 m");
    const double d_bp = rma_breakpoint_m(cell, s);
    if (home.distance_2d_m > d_bp)
        throw std::domain_error("rma_los_path_loss: 2D distance " + std::to_string(home.distance_2d_m) +
                                " m exceeds breakpoint " + std::to_string(d_bp) + " m");
    double pl = rma_los_path_loss_db(home.distance_3d_m, cell.building_height_m, s.carrier_frequency_hz);
    home.shadowing_db = 0.0;
    if (cell.shadowing && cell.shadowing_std_db > 0.0)
    {
        std::normal_distribution<double> sf(0.0, cell.shadowing_std_db);
        home.shadowing_db = sf(rng);
    }
    pl += home.shadowing_db;
    home.path_loss_db = pl;
    home.large_scale_gain = std::pow(10.0, -pl / 10.0);
    return home.large_scale_gain;
}

struct UpaShape
{
    int rows = 1; // vertical
    int cols = 1; // horizontal
};

/// q x q for M = q^2, q x 2q for M = 2 q^2 (e.g. 128 = 8 x 16, 8 = 2 x 4).
inline UpaShape upa_shape(int antennas)
{
    if (detail::is_perfect_square(antennas))
    {
        const int q = static_cast<int>(std::lround(std::sqrt(static_cast<double>(antennas))));
        return {q, q};
    }
    if (antennas % 2 == 0 && detail::is_perfect_square(antennas / 2))
    {
        const int q = static_cast<int>(std::lround(std::sqrt(static_cast<double>(antennas / 2))));
        return {q, 2 * q};
    }
    throw std::invalid_argument("UPA antenna count must be q^2 or 2 q^2, got " + std::to_string(antennas));
}

/// rows x cols grid in the plane spanned by `horizontal` and the z axis,
/// centered on `center`. Element m sits at row m / cols, column m % cols.
inline std::vector<Point3> upa_positions(int antennas, double spacing_m, const Point3 &center,
                                         const Point3 &horizontal = Point3::UnitX())
{
    const auto [rows, cols] = upa_shape(antennas);
    const double mid_v = 0.5 * (rows - 1), mid_h = 0.5 * (cols - 1);
    const Point3 hx = horizontal.normalized();
    std::vector<Point3> out;
    out.reserve(static_cast<std::size_t>(antennas));
    for (int m = 0; m < antennas; ++m)
    {
        const int v = m / cols, h = m % cols;
        out.push_back(center + (h - mid_h) * spacing_m * hx + (v - mid_v) * spacing_m * Point3::UnitZ());
    }
    return out;
}

/// Exponential correlation over UPA grid indices.
inline RMatrix correlation_matrix(int antennas, double phi)
{
    if (!(phi >= 0.0 && phi <= 1.0))
        throw std::invalid_argument("correlation coefficient must lie in [0, 1]");
    const int cols = upa_shape(antennas).cols;
    RMatrix r(antennas, antennas);
    for (int i = 0; i < antennas; ++i)
        for (int j = 0; j < antennas; ++j)
        {
            const int e = std::abs(i / cols - j / cols) + std::abs(i % cols - j % cols);
            r(i, j) = e == 0 ? 1.0 : std::pow(phi, e);
        }
    return r;
}

/// Symmetric PSD square root via eigen-decomposition; eigenvalues down to
/// -tol are treated as rounding and clamped to zero.
inline RMatrix psd_sqrt(const RMatrix &r, double tol = 1e-10)
{
    Eigen::SelfAdjointEigenSolver<RMatrix> es(r);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("psd_sqrt: eigen-decomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    if (ev.size() > 0 && ev.minCoeff() < -tol)
        throw std::domain_error("psd_sqrt: matrix is not positive semidefinite (eigenvalue " +
                                std::to_string(ev.minCoeff()) + ")");
    ev = ev.cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

/// Pure-phase LoS matrix, entry (n, m) = exp(2 pi j |u_n - a_m| / lambda).
inline CMatrix los_matrix(std::span<const Point3> bs_antennas, std::span<const Point3> home_antennas,
                          double wavelength_m)
{
    CMatrix h(static_cast<Eigen::Index>(home_antennas.size()), static_cast<Eigen::Index>(bs_antennas.size()));
    const double k = 2.0 * std::numbers::pi / wavelength_m;
    for (std::size_t n = 0; n < home_antennas.size(); ++n)
        for (std::size_t m = 0; m < bs_antennas.size(); ++m)
            h(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)) =
                std::polar(1.0, k * (home_antennas[n] - bs_antennas[m]).norm());
    return h;
}

/// Circularly-symmetric complex Gaussian matrix with unit-variance entries.
inline CMatrix complex_gaussian(Eigen::Index rows, Eigen::Index cols, Rng &rng)
{
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    CMatrix g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
        {
            const double re = n(rng);
            g(i, j) = cplx(re, n(rng));
        }
    return g;
}

/// Tap 1 is Rician (correlated scattered part plus LoS), the rest Rayleigh.
/// The correlation roots are passed already factored.
inline TapSet sample_taps(const HomePlacement &home, const CMatrix &los, const RMatrix &sqrt_r_bs,
                          const RMatrix &sqrt_r_h, const TapProfile &profile, Rng &rng)
{
    const Eigen::Index mh = sqrt_r_h.rows(), mbs = sqrt_r_bs.rows();
    if (los.rows() != mh || los.cols() != mbs)
        throw std::invalid_argument("sample_taps: LoS matrix shape does not match the correlation matrices");
    const CMatrix rbs = sqrt_r_bs.cast<cplx>();
    const CMatrix rh = sqrt_r_h.cast<cplx>();
    const double kappa = home.rician_factor_linear;
    const double w_scatter = 1.0 / std::sqrt(1.0 + kappa);
    const double w_los = std::isinf(kappa) ? 1.0 : std::sqrt(kappa / (1.0 + kappa));

    TapSet out;
    out.delays_ns = profile.delays_ns;
    out.powers = profile.powers;
    out.taps.reserve(profile.size());
    for (std::size_t d = 0; d < profile.size(); ++d)
    {
        const double scale = std::sqrt(profile.powers[d] * home.large_scale_gain);
        CMatrix scattered = rh * complex_gaussian(mh, mbs, rng) * rbs;
        if (d == 0)
            out.taps.push_back(scale * (w_scatter * scattered + w_los * los));
        else
            out.taps.push_back(scale * scattered);
    }
    return out;
}

/// Frequency response of the tap set on subchannel c of C spanning bandwidth B.
inline CMatrix channel_at_subchannel(const TapSet &taps, int c, int subchannel_count, double bandwidth_hz)
{
    if (c < 0 || c >= subchannel_count)
        throw std::out_of_range("channel_at_subchannel: subchannel index out of range");
    if (taps.taps.empty())
        throw std::invalid_argument("channel_at_subchannel: empty tap set");
    CMatrix g = CMatrix::Zero(taps.taps.front().rows(), taps.taps.front().cols());
    for (std::size_t d = 0; d < taps.taps.size(); ++d)
    {
        const double tau = taps.delays_ns[d] * 1e-9 * bandwidth_hz;
        g += std::polar(1.0, -2.0 * std::numbers::pi * tau * c / subchannel_count) * taps.taps[d];
    }
    return g;
}

struct Home
{
    HomePlacement placement;
    TapSet taps;
};

/// Geometry and correlation factors shared by every draw of one scenario.
class ChannelModel
{
  public:
    ChannelModel(const SystemSetting &s, const CellScenario &cell, TapProfile profile = TapProfile::standard())
        : setting_(s), cell_(cell), profile_(std::move(profile))
    {
        const double lambda = s.wavelength_m();
        bs_antennas_ = upa_positions(s.bs_antennas, cell.bs_antenna_spacing_wavelengths * lambda,
                                     Point3(0.0, 0.0, cell.bs_height_m));
        sqrt_r_bs_ = psd_sqrt(correlation_matrix(s.bs_antennas, cell.bs_correlation));
        sqrt_r_h_ = psd_sqrt(correlation_matrix(s.home_antennas, cell.home_correlation));
    }

    const SystemSetting &setting() const { return setting_; }
    const CellScenario &cell() const { return cell_; }
    const TapProfile &profile() const { return profile_; }
    const std::vector<Point3> &bs_antennas() const { return bs_antennas_; }

    /// Home array faces the BS: its horizontal axis is perpendicular to the
    /// ground projection of the home-to-BS direction.
    std::vector<Point3> home_antennas(const HomePlacement &p) const
    {
        Point3 axis(-p.y_m, p.x_m, 0.0);
        if (axis.norm() == 0.0)
            axis = Point3::UnitX();
        return upa_positions(setting_.home_antennas, cell_.home_antenna_spacing_m,
                             Point3(p.x_m, p.y_m, cell_.home_height_m), axis);
    }

    std::vector<Home> sample_homes(int count, Rng &rng) const
    {
        auto placements = sample_positions(cell_, count, rng);
        std::vector<Home> homes;
        homes.reserve(placements.size());
        for (auto &p : placements)
        {
            rma_los_path_loss(p, cell_, setting_, rng);
            const auto ua = home_antennas(p);
            const CMatrix los = los_matrix(bs_antennas_, ua, setting_.wavelength_m());
            homes.push_back({p, sample_taps(p, los, sqrt_r_bs_, sqrt_r_h_, profile_, rng)});
        }
        return homes;
    }

    CMatrix channel(const Home &home, int c) const
    {
        return channel_at_subchannel(home.taps, c, setting_.subchannel_count, setting_.bandwidth_hz);
    }

  private:
    SystemSetting setting_;
    CellScenario cell_;
    TapProfile profile_;
    std::vector<Point3> bs_antennas_;
    RMatrix sqrt_r_bs_;
    RMatrix sqrt_r_h_;
};

} // namespace fwa

#endif
