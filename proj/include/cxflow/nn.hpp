#pragma once

#include <cstddef>
#include <vector>

#include "cxflow/rng.hpp"

namespace cxflow::nn {

struct Linear {
    int in = 0, out = 0;
    std::vector<double> W; // out x in, row-major
    std::vector<double> b; // out
};

// Fully connected value network: rectifier on hidden layers, linear output.
struct Mlp {
    std::vector<Linear> layers;

    int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    int output_dim() const { return layers.empty() ? 0 : layers.back().out; }
    size_t param_count() const;
};

// dims = {in, h1, ..., out}; He-style uniform init from the given stream.
Mlp make_mlp(const std::vector<int>& dims, Rng& rng);

// 12J+1 -> 512 -> 512 -> 512 -> 2 (q_stop, q_go)
Mlp make_value_network(int input_dim, Rng& rng);

// Activations kept for the backward pass: acts[0] is the input batch,
// acts[k] the post-rectifier output of layer k (linear for the last).
struct ForwardCache {
    std::vector<std::vector<double>> acts;
};

// Y = net(X) for a row-major batch X of shape B x in. The omp variant
// partitions work per output element and is bitwise identical to the serial
// reference.
void forward_batch_serial(const Mlp& net, const double* X, int B, double* Y,
                          ForwardCache* cache = nullptr);
void forward_batch_omp(const Mlp& net, const double* X, int B, double* Y,
                       ForwardCache* cache = nullptr);
void forward_batch(const Mlp& net, const double* X, int B, double* Y,
                   ForwardCache* cache = nullptr); // dispatches on batch size

// Convenience single-row forward.
std::vector<double> forward(const Mlp& net, const std::vector<double>& x);

struct Grads {
    std::vector<Linear> layers; // same shapes as the net

    void init_like(const Mlp& net);
    void zero();
};

// Accumulates dLoss/dparams for dY (B x out); activations come from the
// forward cache. Both variants produce bitwise identical results.
void backward_batch_serial(const Mlp& net, const ForwardCache& cache, const double* dY,
                           int B, Grads& grads);
void backward_batch_omp(const Mlp& net, const ForwardCache& cache, const double* dY,
                        int B, Grads& grads);
void backward_batch(const Mlp& net, const ForwardCache& cache, const double* dY, int B,
                    Grads& grads);

// SGD with momentum: v = mu*v - lr*g; theta += v.
void sgd_momentum(Mlp& net, const Grads& grads, Grads& velocity, double lr, double momentum);

// Flat parameter access for checkpoints and finite differencing.
std::vector<double> flatten(const Mlp& net);
void unflatten(Mlp& net, const std::vector<double>& flat);

} // namespace cxflow::nn
