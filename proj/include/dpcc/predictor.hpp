#pragma once

// Hankel-matrix subspace predictor and the unconstrained predictive control law.
//
// Data convention (SISO): a window holds 2N+j-1 input/output pairs
// u(0..2N+j-2), y(0..2N+j-2). Past blocks start at sample 0, future blocks at
// sample N, each block is N rows by j columns. The past vector is stacked as
// [y(k-N)..y(k-1), u(k-N)..u(k-1)].

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace dpcc {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct WindowNotFullError : std::logic_error {
    using std::logic_error::logic_error;
};

struct SingularSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Horizon N (block rows) and column count j of the Hankel matrices.
struct HankelShape {
    Eigen::Index horizon = 15;
    Eigen::Index columns = 40;

    Eigen::Index capacity() const { return 2 * horizon + columns - 1; }
};

/// Sliding FIFO of (u, y) pairs sized for one set of Hankel matrices.
template <typename Scalar = double>
class DataWindow {
public:
    DataWindow() : DataWindow(HankelShape{}) {}

    explicit DataWindow(HankelShape shape) : shape_(shape) {
        if (shape.horizon < 1 || shape.columns < 1)
            throw DimensionError("DataWindow: horizon and columns must be >= 1");
        inputs_.setZero(shape.capacity());
        outputs_.setZero(shape.capacity());
    }

    const HankelShape& shape() const { return shape_; }
    Eigen::Index horizon() const { return shape_.horizon; }
    Eigen::Index columns() const { return shape_.columns; }
    Eigen::Index capacity() const { return shape_.capacity(); }
    Eigen::Index size() const { return size_; }
    bool full() const { return size_ == capacity(); }

    /// Oldest first.
    auto inputs() const { return inputs_.head(size_); }
    auto outputs() const { return outputs_.head(size_); }

    /// Appends the newest pair; once full the oldest pair is dropped.
    void push(Scalar u, Scalar y) {
        if (full()) {
            const Eigen::Index n = capacity();
            inputs_.head(n - 1) = inputs_.tail(n - 1).eval();
            outputs_.head(n - 1) = outputs_.tail(n - 1).eval();
            inputs_(n - 1) = u;
            outputs_(n - 1) = y;
            return;
        }
        inputs_(size_) = u;
        outputs_(size_) = y;
        ++size_;
    }

private:
    HankelShape shape_;
    Vector<Scalar> inputs_;
    Vector<Scalar> outputs_;
    Eigen::Index size_ = 0;
};

/// Returns a copy of `window` with (u_new, y_new) appended FIFO-style.
template <typename Scalar>
DataWindow<Scalar> update_window(DataWindow<Scalar> window, Scalar u_new, Scalar y_new) {
    window.push(u_new, y_new);
    return window;
}

/// N x j Hankel matrix with result(r, c) = seq(start + r + c).
template <typename Derived>
Matrix<typename Derived::Scalar> build_hankel(const Eigen::MatrixBase<Derived>& seq,
                                              Eigen::Index rows, Eigen::Index cols,
                                              Eigen::Index start = 0) {
    static_assert(Derived::IsVectorAtCompileTime, "build_hankel expects a vector");
    if (rows < 1 || cols < 1 || start < 0)
        throw DimensionError("build_hankel: rows, cols must be >= 1 and start >= 0");
    if (start + rows + cols - 1 > seq.size())
        throw DimensionError("build_hankel: sequence of length " + std::to_string(seq.size()) +
                             " too short for " + std::to_string(rows) + "x" +
                             std::to_string(cols) + " at offset " + std::to_string(start));
    Matrix<typename Derived::Scalar> h(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        h.col(c) = seq.derived().segment(start + c, rows);
    return h;
}

template <typename Scalar = double>
struct HankelSet {
    Matrix<Scalar> Up, Uf, Yp, Yf;
    Matrix<Scalar> Wp;  // Yp stacked over Up

    Eigen::Index horizon() const { return Up.rows(); }
    Eigen::Index columns() const { return Up.cols(); }

    /// [Wp; Uf], the regressor of the least-squares fit.
    Matrix<Scalar> regressor() const {
        Matrix<Scalar> z(Wp.rows() + Uf.rows(), Wp.cols());
        z << Wp, Uf;
        return z;
    }
};

template <typename Scalar>
HankelSet<Scalar> make_hankel_set(const DataWindow<Scalar>& window) {
    if (!window.full())
        throw WindowNotFullError("make_hankel_set: window holds " +
                                 std::to_string(window.size()) + " of " +
                                 std::to_string(window.capacity()) + " samples");
    const Eigen::Index n = window.horizon();
    const Eigen::Index j = window.columns();
    HankelSet<Scalar> h;
    h.Up = build_hankel(window.inputs(), n, j, 0);
    h.Uf = build_hankel(window.inputs(), n, j, n);
    h.Yp = build_hankel(window.outputs(), n, j, 0);
    h.Yf = build_hankel(window.outputs(), n, j, n);
    h.Wp.resize(2 * n, j);
    h.Wp << h.Yp, h.Up;
    return h;
}

template <typename Scalar = double>
struct PredictorCoefficients {
    Matrix<Scalar> Lw;  // N x 2N
    Matrix<Scalar> Lu;  // N x N
    Scalar ridge = 0;

    Eigen::Index horizon() const { return Lu.rows(); }
};

enum class FitMethod {
    /// Cholesky solve of G = Z Z^T + ridge I. Reports singular G when ridge == 0.
    NormalEquations,
    /// Minimum-norm least squares through a complete orthogonal decomposition
    /// of Z^T (the Moore-Penrose solution; handles rank-deficient Z).
    PseudoInverse,
};

/// Least-squares fit of Yf ~ [Lw Lu] [Wp; Uf].
template <typename Scalar>
PredictorCoefficients<Scalar> fit_predictor(const HankelSet<Scalar>& h, Scalar ridge,
                                            FitMethod method = FitMethod::NormalEquations) {
    if (!(ridge >= 0))
        throw std::invalid_argument("fit_predictor: ridge must be nonnegative");
    const Eigen::Index n = h.horizon();
    const Matrix<Scalar> z = h.regressor();
    const Eigen::Index rows = z.rows();

    // Solve for the transpose: X = [Lw Lu]^T, 3N x N.
    Matrix<Scalar> x;
    if (method == FitMethod::NormalEquations) {
        Matrix<Scalar> gram = z * z.transpose();
        gram.diagonal().array() += ridge;
        Eigen::LLT<Matrix<Scalar>> llt(gram);
        const Scalar tiny = std::numeric_limits<Scalar>::epsilon() * static_cast<Scalar>(rows);
        if (llt.info() != Eigen::Success || (ridge == 0 && llt.rcond() < tiny))
            throw SingularSystemError("fit_predictor: Gram matrix is singular (ridge = 0)");
        x = llt.solve(z * h.Yf.transpose());
    } else {
        if (ridge > 0) {
            Matrix<Scalar> a(z.cols() + rows, rows);
            a << z.transpose(), Matrix<Scalar>::Identity(rows, rows) * std::sqrt(ridge);
            Matrix<Scalar> b = Matrix<Scalar>::Zero(z.cols() + rows, n);
            b.topRows(z.cols()) = h.Yf.transpose();
            x = a.completeOrthogonalDecomposition().solve(b);
        } else {
            x = z.transpose().completeOrthogonalDecomposition().solve(h.Yf.transpose());
        }
    }
    if (!x.allFinite())
        throw SingularSystemError("fit_predictor: non-finite coefficients");

    PredictorCoefficients<Scalar> c;
    c.Lw = x.topRows(2 * n).transpose();
    c.Lu = x.bottomRows(n).transpose();
    c.ridge = ridge;
    return c;
}

/// w_p from the most recent N pairs of the window: [y-block; u-block].
template <typename Scalar>
Vector<Scalar> past_vector(const DataWindow<Scalar>& window) {
    const Eigen::Index n = window.horizon();
    if (window.size() < n)
        throw WindowNotFullError("past_vector: fewer than N samples in window");
    Vector<Scalar> wp(2 * n);
    wp << window.outputs().tail(n), window.inputs().tail(n);
    return wp;
}

template <typename Scalar, typename WpDerived, typename UfDerived>
Vector<Scalar> predict_outputs(const PredictorCoefficients<Scalar>& c,
                               const Eigen::MatrixBase<WpDerived>& wp,
                               const Eigen::MatrixBase<UfDerived>& uf) {
    const Eigen::Index n = c.horizon();
    if (c.Lw.rows() != n || c.Lw.cols() != 2 * n || c.Lu.cols() != n)
        throw DimensionError("predict_outputs: inconsistent coefficient shapes");
    if (wp.size() != 2 * n || uf.size() != n)
        throw DimensionError("predict_outputs: wp must have 2N and uf N entries");
    return c.Lw * wp + c.Lu * uf;
}

template <typename Scalar = double>
struct ControlSequence {
    Vector<Scalar> values;          // u(k|k) .. u(k+N-1|k)
    std::int64_t origin_time_us = 0;
    std::int64_t step_index = 0;

    Eigen::Index size() const { return values.size(); }
};

/// J = |rf - yhat|^2 + lambda |uf|^2 with yhat = Lw wp + Lu uf.
template <typename Scalar, typename WpDerived, typename RfDerived, typename UfDerived>
Scalar tracking_cost(const PredictorCoefficients<Scalar>& c,
                     const Eigen::MatrixBase<WpDerived>& wp,
                     const Eigen::MatrixBase<RfDerived>& rf,
                     const Eigen::MatrixBase<UfDerived>& uf, Scalar lambda) {
    const Vector<Scalar> err = rf - predict_outputs(c, wp, uf);
    return err.squaredNorm() + lambda * uf.squaredNorm();
}

/// Closed-form minimizer of tracking_cost:
/// uf = (lambda I + Lu^T Lu)^-1 Lu^T (rf - Lw wp).
template <typename Scalar, typename WpDerived, typename RfDerived>
ControlSequence<Scalar> optimal_control(const PredictorCoefficients<Scalar>& c,
                                        const Eigen::MatrixBase<WpDerived>& wp,
                                        const Eigen::MatrixBase<RfDerived>& rf, Scalar lambda) {
    if (!(lambda > 0))
        throw std::invalid_argument("optimal_control: lambda must be positive");
    const Eigen::Index n = c.horizon();
    if (wp.size() != 2 * n || rf.size() != n || c.Lw.cols() != 2 * n)
        throw DimensionError("optimal_control: dimension mismatch");
    Matrix<Scalar> hessian = c.Lu.transpose() * c.Lu;
    hessian.diagonal().array() += lambda;
    const Vector<Scalar> free_error = rf - c.Lw * wp;
    ControlSequence<Scalar> seq;
    seq.values = hessian.llt().solve(c.Lu.transpose() * free_error);
    return seq;
}

}  // namespace dpcc
