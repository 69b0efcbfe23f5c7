#pragma once

#include "losscape/activation.hpp"
#include "losscape/linalg.hpp"

#include <random>
#include <stdexcept>
#include <vector>

namespace losscape {

/// Layer widths [n_0, ..., n_L] plus the activation applied at every
/// layer. n_0 is the input dimension, n_L the output dimension.
struct Architecture {
    std::vector<Index> widths;
    ActivationKind activation;

    Index depth() const { return static_cast<Index>(widths.size()) - 1; }  // L
    Index input_dim() const { return widths.front(); }
    Index output_dim() const { return widths.back(); }

    void validate() const {
        if (widths.size() < 2)
            throw std::invalid_argument("Architecture: need at least one layer");
        for (Index w : widths)
            if (w < 1) throw std::invalid_argument("Architecture: widths must be >= 1");
    }
};

/// Weight matrices W_k (n_{k-1} x n_k) and bias vectors b_k (n_k),
/// k = 1..L, stored 0-based.
struct NetworkParams {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    Index depth() const { return static_cast<Index>(weights.size()); }

    void validate(const Architecture& arch) const {
        arch.validate();
        const Index L = arch.depth();
        if (depth() != L || static_cast<Index>(biases.size()) != L)
            throw std::invalid_argument("NetworkParams: layer count mismatch");
        for (Index k = 0; k < L; ++k) {
            const Matrix& W = weights[static_cast<std::size_t>(k)];
            const Vector& b = biases[static_cast<std::size_t>(k)];
            if (W.rows() != arch.widths[static_cast<std::size_t>(k)] ||
                W.cols() != arch.widths[static_cast<std::size_t>(k) + 1] ||
                b.size() != arch.widths[static_cast<std::size_t>(k) + 1])
                throw std::invalid_argument("NetworkParams: shape mismatch at layer " +
                                            std::to_string(k + 1));
            require_finite(W, "NetworkParams weights");
            if (!b.allFinite())
                throw std::invalid_argument("NetworkParams: non-finite bias");
        }
    }

    static NetworkParams zeros(const Architecture& arch) {
        arch.validate();
        NetworkParams p;
        for (Index k = 0; k + 1 < static_cast<Index>(arch.widths.size()); ++k) {
            p.weights.push_back(Matrix::Zero(arch.widths[static_cast<std::size_t>(k)],
                                             arch.widths[static_cast<std::size_t>(k) + 1]));
            p.biases.push_back(Vector::Zero(arch.widths[static_cast<std::size_t>(k) + 1]));
        }
        return p;
    }
};

/// i.i.d. normal weights scaled by init_scale / sqrt(fan-in), zero
/// biases; keeps pre-activations in the responsive range.
inline NetworkParams random_params(const Architecture& arch, double init_scale,
                                   std::mt19937_64& rng) {
    NetworkParams p = NetworkParams::zeros(arch);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
        const double s = init_scale / std::sqrt(static_cast<double>(p.weights[k].rows()));
        for (Index i = 0; i < p.weights[k].rows(); ++i)
            for (Index j = 0; j < p.weights[k].cols(); ++j)
                p.weights[k](i, j) = s * gauss(rng);
    }
    return p;
}

/// Per-layer pre-activations G_k and activations F_k over all N
/// samples. Immutable after construction by forward().
struct ForwardCache {
    Matrix X;
    std::vector<Matrix> G;
    std::vector<Matrix> F;

    const Matrix& output() const { return F.back(); }
    /// F_k with F_0 = X (layer index counted from the input).
    const Matrix& features(Index k) const {
        return k == 0 ? X : F[static_cast<std::size_t>(k) - 1];
    }
};

inline Matrix apply_activation(const ActivationKind& a, const Matrix& g) {
    Matrix f(g.rows(), g.cols());
    for (Index i = 0; i < g.rows(); ++i)
        for (Index j = 0; j < g.cols(); ++j)
            f(i, j) = activation_value(a, g(i, j));
    return f;
}

inline Matrix apply_activation_derivative(const ActivationKind& a, const Matrix& g) {
    Matrix f(g.rows(), g.cols());
    for (Index i = 0; i < g.rows(); ++i)
        for (Index j = 0; j < g.cols(); ++j)
            f(i, j) = activation_derivative(a, g(i, j));
    return f;
}

/// F_1 = sigma(X W_1 + 1 b_1^T), F_k = sigma(F_{k-1} W_k + 1 b_k^T).
inline ForwardCache forward(const Architecture& arch, const NetworkParams& params,
                            const Matrix& X) {
    params.validate(arch);
    if (X.cols() != arch.input_dim())
        throw std::invalid_argument("forward: X column count != input dimension");
    require_finite(X, "forward input");
    ForwardCache cache;
    cache.X = X;
    const Matrix* prev = &X;
    for (std::size_t k = 0; k < params.weights.size(); ++k) {
        Matrix g = (*prev) * params.weights[k];
        g.rowwise() += params.biases[k].transpose();
        cache.G.push_back(g);
        cache.F.push_back(apply_activation(arch.activation, g));
        prev = &cache.F.back();
    }
    return cache;
}

/// Index map for the flat parameter vector
/// [vec(W_1), b_1, ..., vec(W_L), b_L], vec() row-major.
struct ParamLayout {
    struct LayerSpan {
        Index w_offset, w_rows, w_cols;
        Index b_offset, b_size;
    };
    std::vector<LayerSpan> layers;
    Index total = 0;

    static ParamLayout of(const Architecture& arch) {
        arch.validate();
        ParamLayout lay;
        Index off = 0;
        for (std::size_t k = 0; k + 1 < arch.widths.size(); ++k) {
            LayerSpan s;
            s.w_offset = off;
            s.w_rows = arch.widths[k];
            s.w_cols = arch.widths[k + 1];
            off += s.w_rows * s.w_cols;
            s.b_offset = off;
            s.b_size = arch.widths[k + 1];
            off += s.b_size;
            lay.layers.push_back(s);
        }
        lay.total = off;
        return lay;
    }

    /// Flat coordinates of the (W_l, b_l) blocks for the given 1-based
    /// layer indices, in layer order.
    std::vector<Index> indices_for_layers(const std::vector<int>& layer_ids) const {
        std::vector<Index> idx;
        for (int l : layer_ids) {
            if (l < 1 || l > static_cast<int>(layers.size()))
                throw std::out_of_range("ParamLayout: layer index out of range");
            const LayerSpan& s = layers[static_cast<std::size_t>(l - 1)];
            for (Index i = 0; i < s.w_rows * s.w_cols; ++i) idx.push_back(s.w_offset + i);
            for (Index i = 0; i < s.b_size; ++i) idx.push_back(s.b_offset + i);
        }
        return idx;
    }
};

inline Vector flatten(const NetworkParams& params) {
    Index total = 0;
    for (std::size_t k = 0; k < params.weights.size(); ++k)
        total += params.weights[k].size() + params.biases[k].size();
    Vector v(total);
    Index off = 0;
    for (std::size_t k = 0; k < params.weights.size(); ++k) {
        const Matrix& W = params.weights[k];
        for (Index i = 0; i < W.rows(); ++i)
            for (Index j = 0; j < W.cols(); ++j) v(off++) = W(i, j);
        for (Index i = 0; i < params.biases[k].size(); ++i) v(off++) = params.biases[k](i);
    }
    return v;
}

inline NetworkParams unflatten(const Architecture& arch, const Vector& v) {
    const ParamLayout lay = ParamLayout::of(arch);
    if (v.size() != lay.total)
        throw std::invalid_argument("unflatten: vector length mismatch");
    NetworkParams p = NetworkParams::zeros(arch);
    for (std::size_t k = 0; k < lay.layers.size(); ++k) {
        const ParamLayout::LayerSpan& s = lay.layers[k];
        Index off = s.w_offset;
        for (Index i = 0; i < s.w_rows; ++i)
            for (Index j = 0; j < s.w_cols; ++j) p.weights[k](i, j) = v(off++);
        for (Index i = 0; i < s.b_size; ++i) p.biases[k](i) = v(s.b_offset + i);
    }
    return p;
}

}  // namespace losscape
