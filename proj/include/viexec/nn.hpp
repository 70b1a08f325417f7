#pragma once

#include <functional>
#include <string>
#include <vector>

#include "viexec/rng.hpp"

namespace viexec {

/// A named learnable tensor (matrix or vector) with a gradient accumulator of
/// the same shape.
struct ParamTensor {
    std::string name;
    std::vector<int> shape;  // {out, in} for matrices, {len} for vectors
    std::vector<double> value;
    std::vector<double> grad;

    static ParamTensor matrix(std::string name, int out, int in);
    static ParamTensor vec(std::string name, int len);

    std::size_t size() const { return value.size(); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

/// y = W x + b with explicit forward/backward.
struct AffineLayer {
    ParamTensor W;  // out x in, row-major
    ParamTensor b;  // out

    AffineLayer() = default;
    AffineLayer(const std::string& name, int out, int in);

    int in() const { return W.shape[1]; }
    int out() const { return W.shape[0]; }

    void forward(const double* x, double* y) const;

    /// Accumulates dW += gy x^T and db += gy; if gx is non-null, adds W^T gy
    /// into it.
    void backward(const double* x, const double* gy, double* gx);
};

/// first -> rectifier -> second.
struct TwoLayerMlp {
    AffineLayer first;
    AffineLayer second;

    TwoLayerMlp() = default;
    TwoLayerMlp(const std::string& name, int out, int hidden, int in);

    /// z1 is caller-provided scratch of length hidden (kept for backward).
    void forward(const double* x, double* z1, double* y) const;
    void backward(const double* x, const double* z1, const double* gy, double* gz1_scratch, double* gx);
};

/// (mean squared error, gradient w.r.t. pred).
std::pair<double, std::vector<double>> mse_loss(const std::vector<double>& pred,
                                                const std::vector<double>& target);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First/second moment accumulators, one pair per tensor, in tensor order.
struct AdamState {
    long long step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    void init(const std::vector<ParamTensor*>& tensors);
};

/// Bias-corrected adaptive-moment update over all tensors; zeroes gradients
/// afterwards.
void adam_step(const std::vector<ParamTensor*>& tensors, AdamState& state, const AdamConfig& config);

/// Weights uniform on +-sqrt(6 / (fan_in + fan_out)); bias left at zero.
void glorot_init(AffineLayer& layer, Rng& rng);

struct GradCheckEntry {
    std::string name;
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    bool pass = true;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    bool pass = true;
};

/// Compares each tensor's accumulated analytic gradient against central
/// finite differences of `loss` (which must recompute the loss from current
/// parameter values without touching gradients).
GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::vector<ParamTensor*>& tensors, double h = 1e-5,
                           double tol = 1e-4);

}  // namespace viexec
