// SPDX-License-Identifier: Apache-2.0
//
// Block-diagonalization precoding for one group on one subchannel.
//
// Two routes produce the same per-stream effective channels E = lambda^2 / sigma^2:
//  - bd_precoding: explicit nullspace SVD per home, returns precoders and combiners.
//  - bd_effective_channels: QR of the stacked channel. Block k of (A A^H)^-1 has
//    eigenvalues 1 / lambda_{k,l}^2, so only a triangular inverse is needed.
//    Falls back to the SVD route when the stack is not full row rank.

#ifndef FWA_BD_HPP
#define FWA_BD_HPP

#include "fwa/channel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fwa {

/// Thrown when some home's nullspace is too small to carry the requested streams.
class BdRankError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct EffectiveChannelSet
{
    std::vector<Eigen::VectorXd> gains;  // per home, L values, nonincreasing
    std::vector<int> nullspace_dims;     // R_k per home
    std::vector<CMatrix> precoders;      // W_k, M_BS x L (SVD route only)
    std::vector<CMatrix> combiners;      // U_k, L x M_H (SVD route only)
};

namespace detail {

inline void check_group(std::span<const CMatrix> group, int streams)
{
    if (group.empty())
        throw std::invalid_argument("bd: empty group");
    const auto mh = group.front().rows(), mbs = group.front().cols();
    for (const auto &g : group)
        if (g.rows() != mh || g.cols() != mbs)
            throw std::invalid_argument("bd: channel matrices of one group must share a shape");
    if (static_cast<Eigen::Index>(group.size() - 1) * mh >= mbs)
        throw std::invalid_argument("bd: group of " + std::to_string(group.size()) +
                                    " homes leaves no nullspace (needs (size-1)*M_H < M_BS)");
    if (streams < 1 || streams > mh)
        throw std::invalid_argument("bd: streams must lie in [1, M_H]");
}

inline int numerical_rank(const Eigen::VectorXd &sv, Eigen::Index rows, Eigen::Index cols)
{
    if (sv.size() == 0)
        return 0;
    const double tol = static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * sv(0);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol)
            ++r;
    return r;
}

inline Eigen::VectorXd su_mimo_gains(const CMatrix &g, double noise_w, int streams)
{
    Eigen::JacobiSVD<CMatrix> svd(g);
    const Eigen::VectorXd sv = svd.singularValues();
    Eigen::VectorXd e = Eigen::VectorXd::Zero(streams);
    for (int l = 0; l < streams && l < sv.size(); ++l)
        e(l) = sv(l) * sv(l) / noise_w;
    return e;
}

} // namespace detail

/// Nullspace-SVD route with explicit precoders W_k and combiners U_k.
inline EffectiveChannelSet bd_precoding(std::span<const CMatrix> group, double noise_w, int streams)
{
    detail::check_group(group, streams);
    const auto size = static_cast<Eigen::Index>(group.size());
    const Eigen::Index mh = group.front().rows(), mbs = group.front().cols();

    EffectiveChannelSet out;
    for (Eigen::Index k = 0; k < size; ++k)
    {
        CMatrix v0;
        if (size == 1)
            v0 = CMatrix::Identity(mbs, mbs);
        else
        {
            CMatrix others((size - 1) * mh, mbs);
            for (Eigen::Index i = 0, row = 0; i < size; ++i)
                if (i != k)
                {
                    others.middleRows(row, mh) = group[static_cast<std::size_t>(i)];
                    row += mh;
                }
            Eigen::BDCSVD<CMatrix> svd(others, Eigen::ComputeFullV);
            const int rank = detail::numerical_rank(svd.singularValues(), others.rows(), others.cols());
            v0 = svd.matrixV().rightCols(mbs - rank);
        }
        const int rk = static_cast<int>(v0.cols());
        if (rk < streams)
            throw BdRankError("bd: home " + std::to_string(k) + " has nullspace dimension " + std::to_string(rk) +
                              " < " + std::to_string(streams) + " streams");

        const CMatrix ge = group[static_cast<std::size_t>(k)] * v0;
        Eigen::JacobiSVD<CMatrix> svd(ge, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Eigen::VectorXd sv = svd.singularValues();
        Eigen::VectorXd e = Eigen::VectorXd::Zero(streams);
        for (int l = 0; l < streams && l < sv.size(); ++l)
            e(l) = sv(l) * sv(l) / noise_w;

        out.gains.push_back(std::move(e));
        out.nullspace_dims.push_back(rk);
        out.precoders.push_back(v0 * svd.matrixV().leftCols(streams));
        out.combiners.push_back(svd.matrixU().leftCols(streams).adjoint());
    }
    return out;
}

/// Effective channels only. Uses the stacked-QR identity when the group's
/// stacked channel has full row rank, the SVD route otherwise.
inline EffectiveChannelSet bd_effective_channels(std::span<const CMatrix> group, double noise_w, int streams)
{
    detail::check_group(group, streams);
    const auto size = static_cast<Eigen::Index>(group.size());
    const Eigen::Index mh = group.front().rows(), mbs = group.front().cols();

    if (size == 1)
    {
        EffectiveChannelSet out;
        out.gains.push_back(detail::su_mimo_gains(group.front(), noise_w, streams));
        out.nullspace_dims.push_back(static_cast<int>(mbs));
        return out;
    }
    const Eigen::Index rows = size * mh;
    if (rows > mbs)
        return bd_precoding(group, noise_w, streams);

    CMatrix ah(mbs, rows);
    for (Eigen::Index k = 0; k < size; ++k)
        ah.middleCols(k * mh, mh) = group[static_cast<std::size_t>(k)].adjoint();
    Eigen::HouseholderQR<CMatrix> qr(ah);
    const CMatrix r = qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();

    const Eigen::VectorXd diag = r.diagonal().cwiseAbs();
    const double dmax = diag.maxCoeff();
    if (!(diag.minCoeff() > 1e-10 * dmax))
        return bd_precoding(group, noise_w, streams);

    const CMatrix rinv = r.triangularView<Eigen::Upper>().solve(CMatrix::Identity(rows, rows));

    EffectiveChannelSet out;
    out.gains.reserve(static_cast<std::size_t>(size));
    for (Eigen::Index k = 0; k < size; ++k)
    {
        const CMatrix blk = rinv.middleRows(k * mh, mh);
        const CMatrix d = blk * blk.adjoint();
        Eigen::SelfAdjointEigenSolver<CMatrix> es(d, Eigen::EigenvaluesOnly);
        const Eigen::VectorXd mu = es.eigenvalues(); // ascending
        Eigen::VectorXd e(streams);
        for (int l = 0; l < streams; ++l)
            e(l) = mu(l) > 0.0 ? 1.0 / (noise_w * mu(l)) : 0.0;
        out.gains.push_back(std::move(e));
        out.nullspace_dims.push_back(static_cast<int>(mbs - (size - 1) * mh));
    }
    return out;
}

} // namespace fwa

#endif
