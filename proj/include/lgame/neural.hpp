#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgame::nn {

// Fully connected ReLU network with identity output, hand-derived gradients for the
// masked squared-error loss. Scalar type is a template parameter so gradient checks
// can run in double on a reduced topology; training uses float.
template <typename T>
struct NetworkT {
    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

    struct Layer {
        Mat w;  // out x in
        Vec b;  // out
    };
    std::vector<Layer> layers;

    std::vector<int> sizes() const {
        std::vector<int> s{int(layers.front().w.cols())};
        for (auto& l : layers) s.push_back(int(l.w.rows()));
        return s;
    }
    int input_size() const { return int(layers.front().w.cols()); }
    int output_size() const { return int(layers.back().w.rows()); }
    bool all_finite() const {
        for (auto& l : layers)
            if (!l.w.allFinite() || !l.b.allFinite()) return false;
        return true;
    }
    // Zero-filled copy with the same shapes (gradient / optimizer buffers).
    NetworkT zeros_like() const {
        NetworkT z;
        for (auto& l : layers) z.layers.push_back({Mat::Zero(l.w.rows(), l.w.cols()), Vec::Zero(l.b.size())});
        return z;
    }
};

using Network = NetworkT<float>;

// He-normal weights, zero biases, deterministic per seed.
template <typename T>
NetworkT<T> init_network(const std::vector<int>& sizes, uint64_t seed) {
    NetworkT<T> net;
    std::mt19937_64 rng(seed);
    for (size_t i = 0; i + 1 < sizes.size(); ++i) {
        typename NetworkT<T>::Layer l;
        l.w.resize(sizes[i + 1], sizes[i]);
        l.b = NetworkT<T>::Vec::Zero(sizes[i + 1]);
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / sizes[i]));
        for (Eigen::Index r = 0; r < l.w.rows(); ++r)
            for (Eigen::Index c = 0; c < l.w.cols(); ++c) l.w(r, c) = T(dist(rng));
        net.layers.push_back(std::move(l));
    }
    return net;
}

// Batch forward: X is batch x input, result batch x output.
template <typename T>
typename NetworkT<T>::Mat forward(const NetworkT<T>& net, const typename NetworkT<T>::Mat& x) {
    if (!x.allFinite()) throw std::invalid_argument("non-finite network input");
    typename NetworkT<T>::Mat h = x;
    for (size_t i = 0; i < net.layers.size(); ++i) {
        h = (h * net.layers[i].w.transpose()).rowwise() + net.layers[i].b.transpose();
        if (i + 1 < net.layers.size()) h = h.cwiseMax(T(0));
    }
    return h;
}

template <typename T>
typename NetworkT<T>::Vec forward1(const NetworkT<T>& net, const typename NetworkT<T>::Vec& x) {
    typename NetworkT<T>::Mat xm = x.transpose();
    return forward(net, xm).row(0).transpose();
}

template <typename T>
struct BackwardResult {
    NetworkT<T> grads;
    T loss;
};

// Loss: mean over the batch of (output[action_i] - target_i)^2. Only the chosen
// action's output coordinate carries gradient for each sample.
template <typename T>
BackwardResult<T> backward(const NetworkT<T>& net, const typename NetworkT<T>::Mat& x,
                           const std::vector<int>& actions, const typename NetworkT<T>::Vec& targets) {
    using Mat = typename NetworkT<T>::Mat;
    const Eigen::Index batch = x.rows();
    if (batch == 0) throw std::invalid_argument("empty batch");
    if (Eigen::Index(actions.size()) != batch || targets.size() != batch)
        throw std::invalid_argument("batch fields of mismatched length");

    const size_t n = net.layers.size();
    std::vector<Mat> act(n + 1);  // act[0] = input, act[i] = post-activation of layer i
    act[0] = x;
    for (size_t i = 0; i < n; ++i) {
        act[i + 1] = (act[i] * net.layers[i].w.transpose()).rowwise() + net.layers[i].b.transpose();
        if (i + 1 < n) act[i + 1] = act[i + 1].cwiseMax(T(0));
    }

    BackwardResult<T> res{net.zeros_like(), T(0)};
    Mat delta = Mat::Zero(batch, net.output_size());
    for (Eigen::Index i = 0; i < batch; ++i) {
        int a = actions[size_t(i)];
        if (a < 0 || a >= net.output_size()) throw std::invalid_argument("action index out of range");
        T diff = act[n](i, a) - targets(i);
        res.loss += diff * diff;
        delta(i, a) = T(2) * diff / T(batch);
    }
    res.loss /= T(batch);

    for (size_t i = n; i-- > 0;) {
        res.grads.layers[i].w = delta.transpose() * act[i];
        res.grads.layers[i].b = delta.colwise().sum().transpose();
        if (i > 0) {
            delta = delta * net.layers[i].w;
            delta = delta.cwiseProduct((act[i].array() > T(0)).template cast<T>().matrix());
        }
    }
    return res;
}

enum class Algo : uint8_t { SgdNesterov = 0, RmsProp = 1, Adadelta = 2 };

Algo algo_from_string(const std::string& s);
std::string algo_name(Algo a);

template <typename T>
struct OptimizerConfigT {
    Algo algo = Algo::SgdNesterov;
    T lr = T(0.01);        // sgd
    T momentum = T(0.9);   // sgd
    T rmsprop_lr = T(0.001);
    T rho = T(0.95);       // rmsprop / adadelta decay
    T eps = T(1e-6);
};
using OptimizerConfig = OptimizerConfigT<float>;

// Per-parameter auxiliary buffers. slot usage:
//   sgd_nesterov: [0] velocity
//   rmsprop:      [0] squared-gradient average
//   adadelta:     [0] squared-gradient average, [1] squared-update average
template <typename T>
struct OptimizerStateT {
    std::vector<NetworkT<T>> slots;

    static OptimizerStateT make(const NetworkT<T>& net, Algo algo) {
        OptimizerStateT s;
        int n = algo == Algo::Adadelta ? 2 : 1;
        for (int i = 0; i < n; ++i) s.slots.push_back(net.zeros_like());
        return s;
    }
};
using OptimizerState = OptimizerStateT<float>;

// One optimizer step. lr_scale multiplies the base learning rate (annealing).
// Returns false (net and state untouched) when the gradients are non-finite.
template <typename T>
bool optimizer_step(NetworkT<T>& net, OptimizerStateT<T>& state, const NetworkT<T>& grads,
                    const OptimizerConfigT<T>& cfg, T lr_scale = T(1)) {
    if (!grads.all_finite()) return false;
    for (size_t i = 0; i < net.layers.size(); ++i) {
        auto step = [&](auto& p, const auto& g, size_t li, auto member) {
            switch (cfg.algo) {
                case Algo::SgdNesterov: {
                    auto& v = state.slots[0].layers[li].*member;
                    T lr = cfg.lr * lr_scale;
                    v = cfg.momentum * v + g;
                    p -= lr * (g + cfg.momentum * v);
                    break;
                }
                case Algo::RmsProp: {
                    auto& s = state.slots[0].layers[li].*member;
                    T lr = cfg.rmsprop_lr * lr_scale;
                    s = cfg.rho * s + (T(1) - cfg.rho) * g.cwiseProduct(g);
                    p -= lr * g.cwiseQuotient((s.array().sqrt() + cfg.eps).matrix());
                    break;
                }
                case Algo::Adadelta: {
                    auto& s = state.slots[0].layers[li].*member;
                    auto& u = state.slots[1].layers[li].*member;
                    s = cfg.rho * s + (T(1) - cfg.rho) * g.cwiseProduct(g);
                    // materialize: the expression reads u, which is updated next
                    std::decay_t<decltype(u)> upd =
                        (-((u.array() + cfg.eps).sqrt() / (s.array() + cfg.eps).sqrt()) *
                         g.array() * lr_scale)
                            .matrix();
                    u = cfg.rho * u + (T(1) - cfg.rho) * upd.cwiseProduct(upd);
                    p += upd;
                    break;
                }
            }
        };
        step(net.layers[i].w, grads.layers[i].w, i, &NetworkT<T>::Layer::w);
        step(net.layers[i].b, grads.layers[i].b, i, &NetworkT<T>::Layer::b);
    }
    return true;
}

// Checkpoint I/O. Format: "LGDQN", version u32, layer count u32, per layer
// (rows u32, cols u32, row-major f32 LE weights, then biases), optimizer tag byte,
// aux buffer-set count u8, buffers in the same per-layer layout, CRC-32 of all
// prior bytes.
void save_model(const Network& net, const OptimizerState& opt, Algo algo, const std::string& path);
struct LoadedModel {
    Network net;
    OptimizerState opt;
    Algo algo;
};
LoadedModel load_model(const std::string& path);

uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed = 0);

}  // namespace lgame::nn
