#pragma once

// Dense sector matrices of K_{beta,mu} + V and of the Birman-Schwinger
// operator V_-^{1/2} (K + V_+ + e)^{-1} V_-^{1/2} in the symmetrized basis
// c_i = p_i sqrt(w_i) h(p_i).

#include <future>
#include <memory>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "bcslab/error.hpp"
#include "bcslab/grid.hpp"
#include "bcslab/potential.hpp"
#include "bcslab/sector_kernel.hpp"
#include "bcslab/symbols.hpp"

namespace bcslab {

// Temperature-independent pieces of one angular-momentum sector on a grid.
struct SectorData {
    int ell = 0;
    Eigen::MatrixXd kernel;           // s_i W(p_i, p_j) s_j
    Eigen::MatrixXd kernel_positive;  // same for V_+
    Eigen::MatrixXd negative_factor;  // N with N N^T the kernel of V_-
};

inline SectorData build_sector_data(const RadialGrid& grid, const PotentialSpec& spec, int ell) {
    const SectorKernel kernel(spec, ell, PotentialPart::full, grid.p_max);
    const RadialFactor f = kernel.factor(grid.nodes, grid.basis_scale());
    SectorData data;
    data.ell = ell;
    data.kernel_positive = SectorKernel::symmetrized(f.positive * f.positive.transpose());
    const Eigen::MatrixXd negative = f.negative * f.negative.transpose();
    data.kernel = SectorKernel::symmetrized(data.kernel_positive - negative);
    data.negative_factor = f.negative;
    return data;
}

// A potential discretized on a grid for sectors 0..ell_max. Sectors are built
// concurrently unless `parallel` is false; results do not depend on it.
class Discretization {
public:
    Discretization(PotentialSpec spec, RadialGrid grid, int ell_max, bool parallel = true)
        : spec_(std::move(spec)), grid_(std::move(grid)) {
        if (ell_max < 0) throw DomainError("ell_max must be non-negative");
        sectors_.resize(static_cast<std::size_t>(ell_max) + 1);
        if (parallel && ell_max > 0) {
            std::vector<std::future<SectorData>> jobs;
            for (int ell = 0; ell <= ell_max; ++ell)
                jobs.push_back(std::async(std::launch::async, [this, ell] { return build_sector_data(grid_, spec_, ell); }));
            for (int ell = 0; ell <= ell_max; ++ell) sectors_[static_cast<std::size_t>(ell)] = jobs[static_cast<std::size_t>(ell)].get();
        } else {
            for (int ell = 0; ell <= ell_max; ++ell)
                sectors_[static_cast<std::size_t>(ell)] = build_sector_data(grid_, spec_, ell);
        }
    }

    const PotentialSpec& potential() const { return spec_; }
    const RadialGrid& grid() const { return grid_; }
    int ell_max() const { return static_cast<int>(sectors_.size()) - 1; }
    const SectorData& sector(int ell) const {
        if (ell < 0 || ell > ell_max()) throw DomainError("sector index out of range");
        return sectors_[static_cast<std::size_t>(ell)];
    }

private:
    PotentialSpec spec_;
    RadialGrid grid_;
    std::vector<SectorData> sectors_;
};

struct SectorOperator {
    int ell = 0;
    RadialGrid grid;
    ThermoParams params;
    Eigen::MatrixXd matrix;
};

inline Eigen::VectorXd k_symbol_on_grid(const RadialGrid& grid, const ThermoParams& params) {
    Eigen::VectorXd k(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i)
        k(static_cast<Eigen::Index>(i)) = k_symbol(grid.nodes[i] * grid.nodes[i], params);
    return k;
}

inline SectorOperator assemble_sector_operator(const RadialGrid& grid, const SectorData& data,
                                               const ThermoParams& params) {
    SectorOperator op{data.ell, grid, params, data.kernel};
    op.matrix.diagonal() += k_symbol_on_grid(grid, params);
    return op;
}

inline SectorOperator assemble_sector_operator(const RadialGrid& grid, const PotentialSpec& spec, int ell,
                                               const ThermoParams& params) {
    return assemble_sector_operator(grid, build_sector_data(grid, spec, ell), params);
}

inline SectorOperator assemble_sector_operator(const Discretization& disc, int ell, const ThermoParams& params) {
    return assemble_sector_operator(disc.grid(), disc.sector(ell), params);
}

// B = N^T (K + V_+ + e)^{-1} N represented by the congruent n x n matrix
// L^{-1} N N^T L^{-T}, where L L^T = K + V_+ + e. Both share their nonzero
// spectrum, and the n x n form is smaller than the radial one.
inline SectorOperator assemble_birman_schwinger(const RadialGrid& grid, const SectorData& data,
                                                const ThermoParams& params, double e_shift) {
    if (!(e_shift >= 0.0) || !std::isfinite(e_shift))
        throw DomainError("assemble_birman_schwinger: e_shift must be non-negative");
    if (params.is_zero_temperature() && !(e_shift > 0.0))
        throw DomainError("assemble_birman_schwinger: e_shift must be positive at zero temperature");
    Eigen::MatrixXd inner = data.kernel_positive;
    inner.diagonal() += k_symbol_on_grid(grid, params);
    inner.diagonal().array() += e_shift;
    const Eigen::LLT<Eigen::MatrixXd> chol(inner);
    if (chol.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "assemble_birman_schwinger: K + V_+ + e is not positive definite (e = " << e_shift << ")";
        throw DomainError(msg.str());
    }
    const Eigen::MatrixXd c = chol.matrixL().solve(data.negative_factor);
    SectorOperator op{data.ell, grid, params, SectorKernel::symmetrized(c * c.transpose())};
    return op;
}

inline SectorOperator assemble_birman_schwinger(const RadialGrid& grid, const PotentialSpec& spec, int ell,
                                                const ThermoParams& params, double e_shift) {
    return assemble_birman_schwinger(grid, build_sector_data(grid, spec, ell), params, e_shift);
}

inline SectorOperator assemble_birman_schwinger(const Discretization& disc, int ell, const ThermoParams& params,
                                                double e_shift) {
    return assemble_birman_schwinger(disc.grid(), disc.sector(ell), params, e_shift);
}

} // namespace bcslab
