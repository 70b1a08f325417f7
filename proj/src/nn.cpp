#include "viexec/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace viexec {

ParamTensor ParamTensor::matrix(std::string name, int out, int in) {
    ParamTensor t;
    t.name = std::move(name);
    t.shape = {out, in};
    t.value.assign(static_cast<std::size_t>(out) * in, 0.0);
    t.grad.assign(t.value.size(), 0.0);
    return t;
}

ParamTensor ParamTensor::vec(std::string name, int len) {
    ParamTensor t;
    t.name = std::move(name);
    t.shape = {len};
    t.value.assign(static_cast<std::size_t>(len), 0.0);
    t.grad.assign(t.value.size(), 0.0);
    return t;
}

AffineLayer::AffineLayer(const std::string& name, int out, int in)
    : W(ParamTensor::matrix(name + ".weight", out, in)), b(ParamTensor::vec(name + ".bias", out)) {}

void AffineLayer::forward(const double* x, double* y) const {
    const int rows = out(), cols = in();
    const double* w = W.value.data();
    for (int r = 0; r < rows; ++r) {
        double acc = b.value[r];
        const double* wr = w + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) acc += wr[c] * x[c];
        y[r] = acc;
    }
}

void AffineLayer::backward(const double* x, const double* gy, double* gx) {
    const int rows = out(), cols = in();
    double* gw = W.grad.data();
    for (int r = 0; r < rows; ++r) {
        const double g = gy[r];
        b.grad[r] += g;
        double* gwr = gw + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) gwr[c] += g * x[c];
    }
    if (gx != nullptr) {
        const double* w = W.value.data();
        for (int r = 0; r < rows; ++r) {
            const double g = gy[r];
            const double* wr = w + static_cast<std::size_t>(r) * cols;
            for (int c = 0; c < cols; ++c) gx[c] += wr[c] * g;
        }
    }
}

TwoLayerMlp::TwoLayerMlp(const std::string& name, int out, int hidden, int in)
    : first(name + ".first", hidden, in), second(name + ".second", out, hidden) {}

void TwoLayerMlp::forward(const double* x, double* z1, double* y) const {
    first.forward(x, z1);
    const int hidden = first.out();
    // rectifier applied on a copy so z1 keeps the pre-activation for backward
    std::vector<double> a1(static_cast<std::size_t>(hidden));
    for (int i = 0; i < hidden; ++i) a1[i] = z1[i] > 0.0 ? z1[i] : 0.0;
    second.forward(a1.data(), y);
}

void TwoLayerMlp::backward(const double* x, const double* z1, const double* gy, double* gz1_scratch,
                           double* gx) {
    const int hidden = first.out();
    std::vector<double> a1(static_cast<std::size_t>(hidden));
    for (int i = 0; i < hidden; ++i) a1[i] = z1[i] > 0.0 ? z1[i] : 0.0;
    std::fill(gz1_scratch, gz1_scratch + hidden, 0.0);
    second.backward(a1.data(), gy, gz1_scratch);
    for (int i = 0; i < hidden; ++i) {
        if (z1[i] <= 0.0) gz1_scratch[i] = 0.0;
    }
    first.backward(x, gz1_scratch, gx);
}

std::pair<double, std::vector<double>> mse_loss(const std::vector<double>& pred,
                                                const std::vector<double>& target) {
    if (pred.size() != target.size()) {
        throw std::invalid_argument("mse_loss: length mismatch " + std::to_string(pred.size()) +
                                    " vs " + std::to_string(target.size()));
    }
    const double n = static_cast<double>(pred.size());
    double loss = 0.0;
    std::vector<double> grad(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        loss += d * d;
        grad[i] = 2.0 * d / n;
    }
    return {loss / n, std::move(grad)};
}

void AdamState::init(const std::vector<ParamTensor*>& tensors) {
    step = 0;
    m.clear();
    v.clear();
    for (const auto* t : tensors) {
        m.emplace_back(t->size(), 0.0);
        v.emplace_back(t->size(), 0.0);
    }
}

void adam_step(const std::vector<ParamTensor*>& tensors, AdamState& state, const AdamConfig& config) {
    if (state.m.size() != tensors.size()) {
        throw std::invalid_argument("adam_step: state not initialised for this parameter set");
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        ParamTensor& t = *tensors[i];
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (std::size_t k = 0; k < t.size(); ++k) {
            const double g = t.grad[k];
            m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g;
            v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g * g;
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            t.value[k] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
        }
        t.zero_grad();
    }
}

void glorot_init(AffineLayer& layer, Rng& rng) {
    const double bound = std::sqrt(6.0 / (layer.in() + layer.out()));
    for (auto& w : layer.W.value) w = rng.uniform(-bound, bound);
    std::fill(layer.b.value.begin(), layer.b.value.end(), 0.0);
}

GradCheckReport grad_check(const std::function<double()>& loss,
                           const std::vector<ParamTensor*>& tensors, double h, double tol) {
    GradCheckReport report;
    for (ParamTensor* t : tensors) {
        GradCheckEntry entry;
        entry.name = t->name;
        for (std::size_t k = 0; k < t->size(); ++k) {
            const double original = t->value[k];
            t->value[k] = original + h;
            const double up = loss();
            t->value[k] = original - h;
            const double down = loss();
            t->value[k] = original;
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = t->grad[k];
            const double denom = std::max({1.0, std::fabs(numeric), std::fabs(analytic)});
            const double rel = std::fabs(numeric - analytic) / denom;
            if (rel > entry.max_rel_error) {
                entry.max_rel_error = rel;
                entry.worst_index = k;
            }
        }
        entry.pass = entry.max_rel_error <= tol;
        report.pass = report.pass && entry.pass;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

}  // namespace viexec
