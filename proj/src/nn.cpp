#include "cxflow/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cxflow::nn {

size_t Mlp::param_count() const {
    size_t n = 0;
    for (const Linear& l : layers) n += l.W.size() + l.b.size();
    return n;
}

Mlp make_mlp(const std::vector<int>& dims, Rng& rng) {
    if (dims.size() < 2) throw std::invalid_argument("make_mlp: need at least two dims");
    Mlp net;
    for (size_t i = 1; i < dims.size(); ++i) {
        Linear l;
        l.in = dims[i - 1];
        l.out = dims[i];
        l.W.resize(static_cast<size_t>(l.in) * l.out);
        l.b.assign(l.out, 0.0);
        double bound = std::sqrt(6.0 / l.in);
        for (double& w : l.W) w = rng.uniform(-bound, bound);
        net.layers.push_back(std::move(l));
    }
    return net;
}

Mlp make_value_network(int input_dim, Rng& rng) {
    return make_mlp({input_dim, 512, 512, 512, 2}, rng);
}

namespace {

// One dense layer on a batch: out[b, o] = sum_i in[b, i] * W[o, i] + b[o],
// rectified unless last. Each (b, o) element is an independent dot product,
// so the parallel loop is bitwise identical to the serial one.
template <bool Parallel>
void layer_forward(const Linear& l, const double* in, int B, double* out, bool relu) {
#pragma omp parallel for schedule(static) collapse(2) if (Parallel)
    for (int b = 0; b < B; ++b) {
        for (int o = 0; o < l.out; ++o) {
            const double* x = in + static_cast<size_t>(b) * l.in;
            const double* w = l.W.data() + static_cast<size_t>(o) * l.in;
            double acc = l.b[o];
            for (int i = 0; i < l.in; ++i) acc += x[i] * w[i];
            if (relu && acc < 0.0) acc = 0.0;
            out[static_cast<size_t>(b) * l.out + o] = acc;
        }
    }
}

template <bool Parallel>
void run_forward(const Mlp& net, const double* X, int B, double* Y, ForwardCache* cache) {
    const size_t L = net.layers.size();
    std::vector<double> buf_a(X, X + static_cast<size_t>(B) * net.input_dim());
    std::vector<double> buf_b;
    if (cache) {
        cache->acts.assign(L + 1, {});
        cache->acts[0] = buf_a;
    }
    for (size_t k = 0; k < L; ++k) {
        const Linear& l = net.layers[k];
        buf_b.resize(static_cast<size_t>(B) * l.out);
        layer_forward<Parallel>(l, buf_a.data(), B, buf_b.data(), k + 1 < L);
        if (cache) cache->acts[k + 1] = buf_b;
        buf_a.swap(buf_b);
    }
    std::copy(buf_a.begin(), buf_a.end(), Y);
}

// dW[o, i] = sum_b dPre[b, o] * act_in[b, i]; rows of dW are independent.
// dX[b, i] = sum_o dPre[b, o] * W[o, i]; rows of dX are independent.
template <bool Parallel>
void layer_backward(const Linear& l, const double* act_in, const double* act_out,
                    const double* dOut, int B, bool relu, Linear& g, double* dIn) {
    // fold the rectifier mask into dPre
    std::vector<double> dPre(static_cast<size_t>(B) * l.out);
    for (int b = 0; b < B; ++b)
        for (int o = 0; o < l.out; ++o) {
            size_t idx = static_cast<size_t>(b) * l.out + o;
            dPre[idx] = dOut[idx];
            if (relu && act_out[idx] <= 0.0) dPre[idx] = 0.0;
        }

#pragma omp parallel for schedule(static) if (Parallel)
    for (int o = 0; o < l.out; ++o) {
        double* grow = g.W.data() + static_cast<size_t>(o) * l.in;
        double gb = 0.0;
        for (int b = 0; b < B; ++b) {
            double d = dPre[static_cast<size_t>(b) * l.out + o];
            if (d == 0.0) continue;
            const double* x = act_in + static_cast<size_t>(b) * l.in;
            for (int i = 0; i < l.in; ++i) grow[i] += d * x[i];
            gb += d;
        }
        g.b[o] += gb;
    }

    if (dIn) {
#pragma omp parallel for schedule(static) if (Parallel)
        for (int b = 0; b < B; ++b) {
            double* drow = dIn + static_cast<size_t>(b) * l.in;
            std::fill(drow, drow + l.in, 0.0);
            for (int o = 0; o < l.out; ++o) {
                double d = dPre[static_cast<size_t>(b) * l.out + o];
                if (d == 0.0) continue;
                const double* w = l.W.data() + static_cast<size_t>(o) * l.in;
                for (int i = 0; i < l.in; ++i) drow[i] += d * w[i];
            }
        }
    }
}

template <bool Parallel>
void run_backward(const Mlp& net, const ForwardCache& cache, const double* dY, int B,
                  Grads& grads) {
    const size_t L = net.layers.size();
    if (cache.acts.size() != L + 1)
        throw std::invalid_argument("backward: cache does not match the network");
    std::vector<double> dout(dY, dY + static_cast<size_t>(B) * net.output_dim());
    std::vector<double> din;
    for (size_t k = L; k-- > 0;) {
        const Linear& l = net.layers[k];
        bool relu = k + 1 < L;
        din.resize(static_cast<size_t>(B) * l.in);
        layer_backward<Parallel>(l, cache.acts[k].data(), cache.acts[k + 1].data(),
                                 dout.data(), B, relu, grads.layers[k],
                                 k > 0 ? din.data() : nullptr);
        dout.swap(din);
    }
}

} // namespace

void forward_batch_serial(const Mlp& net, const double* X, int B, double* Y,
                          ForwardCache* cache) {
    run_forward<false>(net, X, B, Y, cache);
}

void forward_batch_omp(const Mlp& net, const double* X, int B, double* Y,
                       ForwardCache* cache) {
    run_forward<true>(net, X, B, Y, cache);
}

void forward_batch(const Mlp& net, const double* X, int B, double* Y, ForwardCache* cache) {
    if (B >= 4) forward_batch_omp(net, X, B, Y, cache);
    else forward_batch_serial(net, X, B, Y, cache);
}

std::vector<double> forward(const Mlp& net, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw std::invalid_argument("forward: input length does not match the network");
    std::vector<double> y(net.output_dim());
    forward_batch_serial(net, x.data(), 1, y.data(), nullptr);
    return y;
}

void Grads::init_like(const Mlp& net) {
    layers.clear();
    for (const Linear& l : net.layers) {
        Linear g;
        g.in = l.in;
        g.out = l.out;
        g.W.assign(l.W.size(), 0.0);
        g.b.assign(l.b.size(), 0.0);
        layers.push_back(std::move(g));
    }
}

void Grads::zero() {
    for (Linear& l : layers) {
        std::fill(l.W.begin(), l.W.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
}

void backward_batch_serial(const Mlp& net, const ForwardCache& cache, const double* dY,
                           int B, Grads& grads) {
    run_backward<false>(net, cache, dY, B, grads);
}

void backward_batch_omp(const Mlp& net, const ForwardCache& cache, const double* dY, int B,
                        Grads& grads) {
    run_backward<true>(net, cache, dY, B, grads);
}

void backward_batch(const Mlp& net, const ForwardCache& cache, const double* dY, int B,
                    Grads& grads) {
    if (B >= 4) backward_batch_omp(net, cache, dY, B, grads);
    else backward_batch_serial(net, cache, dY, B, grads);
}

void sgd_momentum(Mlp& net, const Grads& grads, Grads& velocity, double lr, double momentum) {
    for (size_t k = 0; k < net.layers.size(); ++k) {
        Linear& l = net.layers[k];
        const Linear& g = grads.layers[k];
        Linear& v = velocity.layers[k];
        for (size_t i = 0; i < l.W.size(); ++i) {
            v.W[i] = momentum * v.W[i] - lr * g.W[i];
            l.W[i] += v.W[i];
        }
        for (size_t i = 0; i < l.b.size(); ++i) {
            v.b[i] = momentum * v.b[i] - lr * g.b[i];
            l.b[i] += v.b[i];
        }
    }
}

std::vector<double> flatten(const Mlp& net) {
    std::vector<double> out;
    out.reserve(net.param_count());
    for (const Linear& l : net.layers) {
        out.insert(out.end(), l.W.begin(), l.W.end());
        out.insert(out.end(), l.b.begin(), l.b.end());
    }
    return out;
}

void unflatten(Mlp& net, const std::vector<double>& flat) {
    if (flat.size() != net.param_count())
        throw std::invalid_argument("unflatten: parameter count mismatch");
    size_t pos = 0;
    for (Linear& l : net.layers) {
        std::copy(flat.begin() + pos, flat.begin() + pos + l.W.size(), l.W.begin());
        pos += l.W.size();
        std::copy(flat.begin() + pos, flat.begin() + pos + l.b.size(), l.b.begin());
        pos += l.b.size();
    }
}

} // namespace cxflow::nn
