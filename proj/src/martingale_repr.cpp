#include "bsekit/martingale_repr.hpp"

#include <Eigen/Cholesky>

#include <cstdio>
#include <ostream>

namespace bsekit {

MatrixXd MartingaleDecomposition::z_at(Index level, Index node) const {
    return Eigen::Map<const MatrixXd>(Z.at(static_cast<std::size_t>(level)).col(node).data(), dim, brownian_dim);
}

MatrixXd MartingaleDecomposition::u_at(Index level, Index node) const {
    return Eigen::Map<const MatrixXd>(U.at(static_cast<std::size_t>(level)).col(node).data(), dim, mark_count);
}

MartingaleDecomposition represent(const Martingaled& m, const NoiseModel& model) {
    const FiniteFilteredSpace& space = model.space();
    if (m.steps() != space.steps()) throw DimensionError("martingale lives on a different space");
    for (Index k = 0; k <= space.steps(); ++k) detail::check_node_count(space, k, m.level(k).cols());

    const Index d = m.dim();
    const Index n = model.brownian_dim();
    const Index nm = model.mark_count();
    const Index r = n + nm;

    MartingaleDecomposition dec;
    dec.dim = d;
    dec.brownian_dim = n;
    dec.mark_count = nm;
    dec.source = m;
    AdaptedProcessd k_proc = AdaptedProcessd::zero(space, d);

    for (Index k = 0; k < space.steps(); ++k) {
        const Index nodes = space.node_count(k);
        MatrixXd zk = MatrixXd::Zero(d * n, nodes);
        MatrixXd uk = MatrixXd::Zero(d * nm, nodes);
        const StepBranching& step = model.step(k);
        const MatrixXd& child_vals = m.level(k + 1);
        MatrixXd& k_next = k_proc.level(k + 1);
        const Index b = step.probabilities.size();

        MatrixXd gram = MatrixXd::Zero(r, r);
        MatrixXd weighted;  // R diag(p), r x B
        Eigen::LLT<MatrixXd> llt;
        const bool regress = step.active && r > 0;
        if (regress) {
            weighted = step.regressors * step.probabilities.asDiagonal();
            gram = weighted * step.regressors.transpose();
            llt.compute(gram);
            if (llt.info() != Eigen::Success || gram.diagonal().minCoeff() <= 0.0)
                throw StructuralError("singular regressor Gram matrix at level " + std::to_string(k));
        }
        dec.gram.push_back(gram);

        for (Index i = 0; i < nodes; ++i) {
            const Index first = space.first_child(k, i);
            MatrixXd dm = child_vals.middleCols(first, b).colwise() - m.level(k).col(i);
            MatrixXd dk = dm;
            if (regress) {
                // C = (D diag(p) R^T) G^{-1}
                const MatrixXd c = llt.solve(weighted * dm.transpose()).transpose();
                dk.noalias() -= c * step.regressors;
                if (n > 0) zk.col(i) = Eigen::Map<const VectorXd>(c.leftCols(n).eval().data(), d * n);
                if (nm > 0) uk.col(i) = Eigen::Map<const VectorXd>(c.rightCols(nm).eval().data(), d * nm);
            }
            k_next.middleCols(first, b) = dk.colwise() + k_proc.level(k).col(i);
        }
        dec.Z.push_back(std::move(zk));
        dec.U.push_back(std::move(uk));
    }
    dec.K = Martingaled::assume(std::move(k_proc));
    return dec;
}

namespace {

void check_t(const FiniteFilteredSpace& space, Index t_level) {
    if (t_level < 0 || t_level > space.steps())
        throw DomainError("level " + std::to_string(t_level) + " outside the grid");
}

// sum_{k<t} E[tr(C_k G_k C_k^T)] restricted to a block of regressors.
double block_energy(const MartingaleDecomposition& dec, const FiniteFilteredSpace& space, Index t_level,
                    bool brownian, bool jumps) {
    check_t(space, t_level);
    const Index d = dec.dim, n = dec.brownian_dim, m = dec.mark_count;
    double acc = 0.0;
    for (Index k = 0; k < t_level; ++k) {
        const VectorXd& p = space.probabilities(k);
        const MatrixXd& g = dec.gram[static_cast<std::size_t>(k)];
        for (Index i = 0; i < p.size(); ++i) {
            MatrixXd c = MatrixXd::Zero(d, n + m);
            if (brownian && n > 0) c.leftCols(n) = dec.z_at(k, i);
            if (jumps && m > 0) c.rightCols(m) = dec.u_at(k, i);
            acc += p[i] * (c * g * c.transpose()).trace();
        }
    }
    return acc;
}

double second_moment(const FiniteFilteredSpace& space, const MatrixXd& values, Index level) {
    const VectorXd& p = space.probabilities(level);
    return (values.colwise().squaredNorm().transpose().array() * p.array()).sum();
}

}  // namespace

IsometryCheck isometry_check(const MartingaleDecomposition& dec, const FiniteFilteredSpace& space,
                             Index t_level) {
    check_t(space, t_level);
    IsometryCheck out;
    out.lhs = second_moment(space, dec.source.level(t_level), t_level);
    out.rhs = block_energy(dec, space, t_level, true, true) + second_moment(space, dec.K.level(t_level), t_level) +
              second_moment(space, dec.source.level(0), 0);
    return out;
}

double h2_norm(const MartingaleDecomposition& dec, const FiniteFilteredSpace& space, Index t_level) {
    return std::sqrt(block_energy(dec, space, t_level, true, false));
}

double l2_ntilde_norm(const MartingaleDecomposition& dec, const FiniteFilteredSpace& space, Index t_level) {
    return std::sqrt(block_energy(dec, space, t_level, false, true));
}

ZUProcesses zu_processes(const MartingaleDecomposition& dec, const FiniteFilteredSpace& space) {
    ZUProcesses out;
    out.Z = AdaptedProcessd::zero(space, dec.dim * dec.brownian_dim);
    for (Index k = 0; k < space.steps(); ++k) out.Z.level(k) = dec.Z[static_cast<std::size_t>(k)];
    for (Index i = 0; i < dec.mark_count; ++i) {
        AdaptedProcessd u = AdaptedProcessd::zero(space, dec.dim);
        for (Index k = 0; k < space.steps(); ++k)
            u.level(k) = dec.U[static_cast<std::size_t>(k)].middleRows(i * dec.dim, dec.dim);
        out.U.push_back(std::move(u));
    }
    return out;
}

void write_decomposition_csv(std::ostream& os, const MartingaleDecomposition& dec,
                             const FiniteFilteredSpace& space) {
    os << "level,node";
    for (Index j = 0; j < dec.dim * dec.brownian_dim; ++j) os << ",Z" << j;
    for (Index j = 0; j < dec.dim * dec.mark_count; ++j) os << ",U" << j;
    os << ",dK_norm\n";
    char buf[32];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << ',' << buf;
    };
    for (Index k = 0; k < space.steps(); ++k) {
        const VectorXd& cp = space.conditional_probabilities(k + 1);
        for (Index i = 0; i < space.node_count(k); ++i) {
            os << k << ',' << i;
            for (Index j = 0; j < dec.Z[static_cast<std::size_t>(k)].rows(); ++j)
                num(dec.Z[static_cast<std::size_t>(k)](j, i));
            for (Index j = 0; j < dec.U[static_cast<std::size_t>(k)].rows(); ++j)
                num(dec.U[static_cast<std::size_t>(k)](j, i));
            double e = 0.0;
            const Index first = space.first_child(k, i);
            for (Index c = first; c < first + space.child_count(k, i); ++c)
                e += cp[c] * (dec.K.level(k + 1).col(c) - dec.K.level(k).col(i)).squaredNorm();
            num(std::sqrt(e));
            os << '\n';
        }
    }
}

}  // namespace bsekit
