// Times the serial reference kernels against the OpenMP ones for the value
// network shapes used in training.

#include <omp.h>

#include <cstdio>
#include <vector>

#include "cxflow/nn.hpp"
#include "cxflow/rng.hpp"

using namespace cxflow;

namespace {

double time_forward(const nn::Mlp& net, const std::vector<double>& X, int B, bool omp,
                    int iters) {
    std::vector<double> Y(static_cast<size_t>(B) * net.output_dim());
    double t0 = omp_get_wtime();
    for (int i = 0; i < iters; ++i) {
        if (omp) nn::forward_batch_omp(net, X.data(), B, Y.data());
        else nn::forward_batch_serial(net, X.data(), B, Y.data());
    }
    return (omp_get_wtime() - t0) / iters * 1e3;
}

double time_backward(const nn::Mlp& net, const std::vector<double>& X, int B, bool omp,
                     int iters) {
    std::vector<double> Y(static_cast<size_t>(B) * net.output_dim());
    std::vector<double> dY(Y.size(), 1.0);
    nn::ForwardCache cache;
    nn::Grads grads;
    grads.init_like(net);
    if (omp) nn::forward_batch_omp(net, X.data(), B, Y.data(), &cache);
    else nn::forward_batch_serial(net, X.data(), B, Y.data(), &cache);
    double t0 = omp_get_wtime();
    for (int i = 0; i < iters; ++i) {
        grads.zero();
        if (omp) nn::backward_batch_omp(net, cache, dY.data(), B, grads);
        else nn::backward_batch_serial(net, cache, dY.data(), B, grads);
    }
    return (omp_get_wtime() - t0) / iters * 1e3;
}

} // namespace

int main() {
    Rng rng(7);
    nn::Mlp net = nn::make_value_network(97, rng);
    std::printf("value network 97-512-512-512-2, %zu parameters, %d threads\n",
                net.param_count(), omp_get_max_threads());
    std::printf("%8s %10s %12s %12s %8s\n", "batch", "kernel", "serial ms", "omp ms", "speedup");
    for (int B : {1, 32, 128, 512}) {
        std::vector<double> X(static_cast<size_t>(B) * net.input_dim());
        for (double& x : X) x = rng.uniform();
        int iters = B <= 32 ? 50 : 10;
        double fs = time_forward(net, X, B, false, iters);
        double fo = time_forward(net, X, B, true, iters);
        std::printf("%8d %10s %12.3f %12.3f %8.2f\n", B, "forward", fs, fo, fs / fo);
        double bs = time_backward(net, X, B, false, iters);
        double bo = time_backward(net, X, B, true, iters);
        std::printf("%8d %10s %12.3f %12.3f %8.2f\n", B, "backward", bs, bo, bs / bo);
    }
    return 0;
}
