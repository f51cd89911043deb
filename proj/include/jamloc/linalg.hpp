// SPDX-License-Identifier: Apache-2.0
//
// jamloc: simulation and direction-finding toolkit for GNSS jammer localization
// Copyright (C) 2025 jamloc developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef JAMLOC_LINALG_HPP
#define JAMLOC_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "jamloc/errors.hpp"
#include "jamloc/spectral.hpp"

namespace jamloc
{

// Dense row-major complex matrix; only small sizes are used (4x4 spatial
// covariances), so simplicity beats blocking.
struct CMatrix
{
    std::size_t rows = 0, cols = 0;
    std::vector<cplx> data;

    CMatrix() = default;
    CMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, cplx{0.0, 0.0}) {}

    cplx &at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const cplx &at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    static CMatrix identity(std::size_t n)
    {
        CMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m.at(i, i) = 1.0;
        return m;
    }

    double frobenius_norm() const
    {
        double s = 0.0;
        for (const auto &v : data)
            s += std::norm(v);
        return std::sqrt(s);
    }

    cplx trace() const
    {
        cplx t{0.0, 0.0};
        for (std::size_t i = 0; i < std::min(rows, cols); ++i)
            t += at(i, i);
        return t;
    }
};

struct HermitianEig
{
    std::vector<double> eigenvalues; // descending
    CMatrix eigenvectors;            // columns match eigenvalue order
};

// Cyclic Jacobi diagonalization for Hermitian matrices. Each sweep zeroes
// every off-diagonal entry with a complex plane rotation; convergence is
// quadratic and a handful of sweeps suffices at 4x4.
inline HermitianEig hermitian_eig(const CMatrix &input, int max_sweeps = 60)
{
    if (input.rows != input.cols || input.rows == 0)
        throw ShapeError("hermitian_eig requires a square matrix");
    const std::size_t n = input.rows;

    CMatrix a = input;
    // enforce exact Hermitian symmetry before iterating
    for (std::size_t r = 0; r < n; ++r)
    {
        a.at(r, r) = cplx{a.at(r, r).real(), 0.0};
        for (std::size_t c = r + 1; c < n; ++c)
        {
            const cplx m = 0.5 * (a.at(r, c) + std::conj(a.at(c, r)));
            a.at(r, c) = m;
            a.at(c, r) = std::conj(m);
        }
    }

    CMatrix v = CMatrix::identity(n);
    const double scale = std::max(a.frobenius_norm(), 1e-300);

    for (int sweep = 0; sweep < max_sweeps; ++sweep)
    {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off += std::norm(a.at(p, q));
        if (std::sqrt(2.0 * off) <= 1e-15 * scale)
            break;

        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
            {
                const cplx apq = a.at(p, q);
                if (std::abs(apq) <= 1e-300)
                    continue;
                const double app = a.at(p, p).real();
                const double aqq = a.at(q, q).real();
                // factor out the phase of a_pq, then rotate like the real case
                const cplx phase = apq / std::abs(apq);
                const double theta = 0.5 * std::atan2(2.0 * std::abs(apq), app - aqq);
                const double c = std::cos(theta);
                const cplx s = std::sin(theta) * std::conj(phase);

                for (std::size_t k = 0; k < n; ++k)
                {
                    const cplx akp = a.at(k, p);
                    const cplx akq = a.at(k, q);
                    a.at(k, p) = c * akp + s * akq;
                    a.at(k, q) = -std::conj(s) * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k)
                {
                    const cplx apk = a.at(p, k);
                    const cplx aqk = a.at(q, k);
                    a.at(p, k) = c * apk + std::conj(s) * aqk;
                    a.at(q, k) = -s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k)
                {
                    const cplx vkp = v.at(k, p);
                    const cplx vkq = v.at(k, q);
                    v.at(k, p) = c * vkp + s * vkq;
                    v.at(k, q) = -std::conj(s) * vkp + c * vkq;
                }
            }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> evals(n);
    for (std::size_t i = 0; i < n; ++i)
        evals[i] = a.at(i, i).real();
    std::sort(order.begin(), order.end(),
              [&evals](std::size_t l, std::size_t r) { return evals[l] > evals[r]; });

    HermitianEig out;
    out.eigenvalues.resize(n);
    out.eigenvectors = CMatrix(n, n);
    for (std::size_t c = 0; c < n; ++c)
    {
        out.eigenvalues[c] = evals[order[c]];
        for (std::size_t r = 0; r < n; ++r)
            out.eigenvectors.at(r, c) = v.at(r, order[c]);
    }
    return out;
}

// Inverse of a Hermitian positive definite matrix via its eigensystem.
inline CMatrix hermitian_inverse(const CMatrix &m, double min_eigenvalue_ratio = 1e-13)
{
    const auto eig = hermitian_eig(m);
    const double lambda_max = eig.eigenvalues.front();
    if (!(lambda_max > 0.0))
        throw NumericalError("matrix is not positive definite");
    const std::size_t n = m.rows;
    CMatrix inv(n, n);
    for (std::size_t c = 0; c < n; ++c)
    {
        const double lambda = eig.eigenvalues[c];
        if (lambda <= min_eigenvalue_ratio * lambda_max)
            throw NumericalError("matrix is numerically singular");
        const double w = 1.0 / lambda;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t k = 0; k < n; ++k)
                inv.at(r, k) += w * eig.eigenvectors.at(r, c) *
                                std::conj(eig.eigenvectors.at(k, c));
    }
    return inv;
}

} // namespace jamloc

#endif
