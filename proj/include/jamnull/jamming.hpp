#pragma once

// Correlated jamming: time-varying correlation schedules, per-sample jamming
// covariance, sampling of jamming blocks, and the virtual-change factor that
// measures how a correlation drift distorts the apparent jamming channel.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jamnull/numerics.hpp"

namespace jamnull::jamming {

enum class ScheduleKind { constant, sawtooth_down, sawtooth_up, table };

inline std::string to_string(ScheduleKind k) {
    switch (k) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::sawtooth_down: return "sawtooth-down";
    case ScheduleKind::sawtooth_up: return "sawtooth-up";
    case ScheduleKind::table: return "table";
    }
    return "?";
}

inline ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "constant") return ScheduleKind::constant;
    if (s == "sawtooth-down") return ScheduleKind::sawtooth_down;
    if (s == "sawtooth-up") return ScheduleKind::sawtooth_up;
    if (s == "table") return ScheduleKind::table;
    throw InputError("unknown schedule kind '" + s + "'");
}

/// Pairwise jamming correlation as a function of the global sample index.
/// Sawtooth schedules ramp linearly over one period and restart; after
/// `switch_sample` a sawtooth reverses direction, restarting its ramp at the
/// switch point. A table schedule cycles through `table` one entry per sample.
struct CorrelationSchedule {
    ScheduleKind kind = ScheduleKind::sawtooth_down;
    std::int64_t period_samples = 5000;
    double rho_max = 1.0;
    double rho_min = 0.8;
    std::optional<std::int64_t> switch_sample;
    std::vector<double> table;

    void validate() const {
        if (period_samples < 1) throw ScheduleError("schedule period must be >= 1");
        if (std::abs(rho_max) > 1.0 || std::abs(rho_min) > 1.0)
            throw ScheduleError("schedule bounds must satisfy |rho| <= 1");
        if (kind == ScheduleKind::table) {
            if (table.empty()) throw ScheduleError("table schedule needs at least one entry");
            for (double r : table)
                if (!(std::abs(r) <= 1.0)) throw ScheduleError("table entries must satisfy |rho| <= 1");
        }
    }
};

namespace detail {

inline double ramp(ScheduleKind kind, const CorrelationSchedule& s, std::int64_t offset) {
    const double frac = static_cast<double>(offset % s.period_samples) / static_cast<double>(s.period_samples);
    const double span = s.rho_max - s.rho_min;
    return kind == ScheduleKind::sawtooth_down ? s.rho_max - span * frac : s.rho_min + span * frac;
}

inline ScheduleKind flipped(ScheduleKind k) {
    if (k == ScheduleKind::sawtooth_down) return ScheduleKind::sawtooth_up;
    if (k == ScheduleKind::sawtooth_up) return ScheduleKind::sawtooth_down;
    return k;
}

} // namespace detail

inline double rho_at(const CorrelationSchedule& s, std::int64_t p) {
    if (p < 0) throw InputError("rho_at: sample index must be >= 0");
    ScheduleKind kind = s.kind;
    std::int64_t offset = p;
    if (s.switch_sample && p >= *s.switch_sample) {
        kind = detail::flipped(kind);
        offset = p - *s.switch_sample;
    }
    switch (kind) {
    case ScheduleKind::constant: return s.rho_max;
    case ScheduleKind::table: return s.table[static_cast<std::size_t>(p) % s.table.size()];
    default: return detail::ramp(kind, s, offset);
    }
}

struct JammerModel {
    std::size_t n_jammers = 2;
    std::vector<double> variances{1.0, 1.0}; // linear power per jammer
    ComplexVector mean;                      // empty means zero mean
    CorrelationSchedule schedule;
    double rho_cap = 0.9999;                 // applied when sampling

    void validate() const {
        if (variances.size() != n_jammers) throw ShapeError("JammerModel: variances size != n_jammers");
        for (double v : variances)
            if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("JammerModel: variances must be >= 0");
        if (mean.size() != 0 && static_cast<std::size_t>(mean.size()) != n_jammers)
            throw ShapeError("JammerModel: mean size != n_jammers");
        schedule.validate();
    }

    ComplexVector mean_or_zero() const {
        return mean.size() == 0 ? ComplexVector::Zero(static_cast<Eigen::Index>(n_jammers)) : mean;
    }
};

/// Covariance with diagonal sigma_j^2 and off-diagonals rho * sigma_i * sigma_j.
inline ComplexMatrix sigma_from_rho(const JammerModel& model, double rho) {
    const auto n = static_cast<Eigen::Index>(model.n_jammers);
    ComplexMatrix sigma(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double si = std::sqrt(model.variances[static_cast<std::size_t>(i)]);
            const double sj = std::sqrt(model.variances[static_cast<std::size_t>(j)]);
            sigma(i, j) = i == j ? cplx(si * si, 0.0) : cplx(rho * si * sj, 0.0);
        }
    }
    if (n > 1) {
        const double top = sigma.diagonal().real().maxCoeff();
        if (top > 0.0) {
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(sigma, Eigen::EigenvaluesOnly);
            if (eig.eigenvalues()(0) < -1e-8 * top)
                throw ScheduleError("correlation " + std::to_string(rho) + " gives a non-PSD covariance");
        }
    }
    return sigma;
}

/// Model covariance at sample p (uncapped correlation).
inline ComplexMatrix build_sigma_j(const JammerModel& model, std::int64_t p) {
    return sigma_from_rho(model, rho_at(model.schedule, p));
}

/// Correlation actually used by the sampler at sample p.
inline double sampled_rho(const JammerModel& model, std::int64_t p) {
    const double r = rho_at(model.schedule, p);
    return std::clamp(r, -model.rho_cap, model.rho_cap);
}

/// Mean of the sampled covariance over samples [p_start, p_start + n).
inline ComplexMatrix average_sigma_j(const JammerModel& model, std::int64_t p_start, std::size_t n) {
    if (n < 1) throw InputError("average_sigma_j: n must be >= 1");
    double rho_sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) rho_sum += sampled_rho(model, p_start + static_cast<std::int64_t>(c));
    return sigma_from_rho(model, rho_sum / static_cast<double>(n));
}

/// N_J x n block whose column c has covariance Sigma_J at sample p_start + c.
inline ComplexMatrix sample_jamming_block(Rng& rng, const JammerModel& model, std::int64_t p_start,
                                          std::size_t n) {
    if (n < 1) throw InputError("sample_jamming_block: n must be >= 1");
    const auto nj = static_cast<Eigen::Index>(model.n_jammers);
    const ComplexVector mu = model.mean_or_zero();
    ComplexMatrix out(nj, static_cast<Eigen::Index>(n));
    ComplexVector z(nj);
    double cached_rho = std::nan("");
    ComplexMatrix factor;
    for (std::size_t c = 0; c < n; ++c) {
        const double rho = sampled_rho(model, p_start + static_cast<std::int64_t>(c));
        if (!(rho == cached_rho)) {
            factor = psd_factor(sigma_from_rho(model, rho));
            cached_rho = rho;
        }
        for (Eigen::Index r = 0; r < nj; ++r) z(r) = rng.complex_normal();
        out.col(static_cast<Eigen::Index>(c)) = mu + factor * z;
    }
    return out;
}

struct VirtualChange {
    ComplexMatrix D;
    double max_abs_entry = 0.0;
};

/// D = V^d sqrt(S^d (S^e)^+) (V^e)^H from the SVDs of the estimation-phase
/// and data-phase jamming covariances.
inline VirtualChange virtual_change_factor(const ComplexMatrix& sigma_e, const ComplexMatrix& sigma_d,
                                           double rcond = kDefaultRcond) {
    if (sigma_e.rows() != sigma_e.cols() || sigma_d.rows() != sigma_d.cols() ||
        sigma_e.rows() != sigma_d.rows())
        throw ShapeError("virtual_change_factor: covariances must be square and equal-sized");
    const SvdResult de = svd(sigma_e);
    const SvdResult dd = svd(sigma_d);
    const Eigen::Index n = sigma_e.rows();
    const double cutoff = rcond * (de.S.size() ? de.S(0) : 0.0);
    RealVector middle(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double inv_e = de.S(i) > cutoff && de.S(i) > 0.0 ? 1.0 / de.S(i) : 0.0;
        middle(i) = std::sqrt(dd.S(i) * inv_e);
    }
    VirtualChange out;
    out.D = dd.U * middle.asDiagonal() * de.U.adjoint();
    out.max_abs_entry = out.D.cwiseAbs().maxCoeff();
    return out;
}

/// Real part of the sample Pearson correlation between rows i and j of a
/// zero-mean block.
inline double empirical_correlation(const ComplexMatrix& block, Eigen::Index i, Eigen::Index j) {
    const cplx cross = (block.row(i).array() * block.row(j).conjugate().array()).sum();
    const double pi = block.row(i).squaredNorm();
    const double pj = block.row(j).squaredNorm();
    return cross.real() / std::sqrt(pi * pj);
}

} // namespace jamnull::jamming
