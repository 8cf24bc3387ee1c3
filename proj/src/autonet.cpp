#include "mvdpm/autonet.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace mvdpm {

std::size_t Mlp::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

std::vector<double> Mlp::flatten() const {
    std::vector<double> theta;
    theta.reserve(param_count());
    for (std::size_t l = 0; l < weights.size(); ++l) {
        theta.insert(theta.end(), weights[l].begin(), weights[l].end());
        theta.insert(theta.end(), biases[l].begin(), biases[l].end());
    }
    return theta;
}

void Mlp::unflatten(std::span<const double> theta) {
    if (theta.size() != param_count())
        throw std::invalid_argument("Mlp::unflatten: parameter vector size mismatch");
    std::size_t k = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (double& w : weights[l]) w = theta[k++];
        for (double& b : biases[l]) b = theta[k++];
    }
}

Mlp mlp_init(const std::vector<int>& layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("mlp_init: need at least input and output sizes");
    for (int s : layer_sizes)
        if (s < 1) throw std::invalid_argument("mlp_init: layer sizes must be positive");

    Mlp net;
    net.layer_sizes = layer_sizes;
    rng::Stream stream(rng::derive(seed, rng::kStreamInit));
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::vector<double> w(static_cast<std::size_t>(fan_in) * fan_out);
        for (double& x : w) x = stream.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(fan_out, 0.0);
    }
    return net;
}

JetEvaluator::JetEvaluator(const Mlp& net) {
    state_.resize(net.n_layers());
    std::size_t widest = 0;
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        const auto in = static_cast<std::size_t>(net.layer_sizes[l]);
        const auto out = static_cast<std::size_t>(net.layer_sizes[l + 1]);
        widest = std::max({widest, in, out});
        auto& s = state_[l];
        s.a.resize(in);
        s.a_t.resize(in);
        s.a_w.resize(in);
        s.a_ww.resize(in);
        s.z_t.resize(out);
        s.z_w.resize(out);
        s.z_ww.resize(out);
        s.v.resize(out);
    }
    bar_.resize(widest);
    bar_t_.resize(widest);
    bar_w_.resize(widest);
    bar_ww_.resize(widest);
    nbar_.resize(widest);
    nbar_t_.resize(widest);
    nbar_w_.resize(widest);
    nbar_ww_.resize(widest);
}

Jet JetEvaluator::forward(const Mlp& net, double t, double w) {
    const std::size_t n_layers = net.n_layers();

    // input jets: d(t)/dt = 1, d(w)/dw = 1, everything else zero
    state_[0].a = {t, w};
    state_[0].a_t = {1.0, 0.0};
    state_[0].a_w = {0.0, 1.0};
    state_[0].a_ww = {0.0, 0.0};

    Jet out;
    for (std::size_t l = 0; l < n_layers; ++l) {
        auto& s = state_[l];
        const auto in = static_cast<std::size_t>(net.layer_sizes[l]);
        const auto n_out = static_cast<std::size_t>(net.layer_sizes[l + 1]);
        const double* W = net.weights[l].data();
        const double* b = net.biases[l].data();
        const bool hidden = l + 1 < n_layers;

        for (std::size_t i = 0; i < n_out; ++i) {
            const double* wr = W + i * in;
            double z = b[i], zt = 0.0, zw = 0.0, zww = 0.0;
            for (std::size_t j = 0; j < in; ++j) {
                const double wij = wr[j];
                z += wij * s.a[j];
                zt += wij * s.a_t[j];
                zw += wij * s.a_w[j];
                zww += wij * s.a_ww[j];
            }
            if (hidden) {
                // a = tanh(z): jet pushforward with p = 1-v^2, tanh'' = -2vp
                const double v = std::tanh(z);
                const double p = 1.0 - v * v;
                s.v[i] = v;
                s.z_t[i] = zt;
                s.z_w[i] = zw;
                s.z_ww[i] = zww;
                auto& nxt = state_[l + 1];
                nxt.a[i] = v;
                nxt.a_t[i] = p * zt;
                nxt.a_w[i] = p * zw;
                nxt.a_ww[i] = p * zww - 2.0 * v * p * zw * zw;
            } else {
                out.f = z;
                out.f_t = zt;
                out.f_w = zw;
                out.f_ww = zww;
            }
        }
    }
    return out;
}

void JetEvaluator::backward(const Mlp& net, const JetCotangent& cot, std::span<double> grad) {
    const std::size_t n_layers = net.n_layers();
    // output layer is affine, so its pre-activation adjoint is the cotangent
    bar_[0] = cot.c_f;
    bar_t_[0] = cot.c_t;
    bar_w_[0] = cot.c_w;
    bar_ww_[0] = cot.c_ww;

    // parameter offset of the last layer in the flat vector
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < n_layers; ++l)
        offset += net.weights[l].size() + net.biases[l].size();

    for (std::size_t l = n_layers; l-- > 0;) {
        const auto& s = state_[l];
        const auto in = static_cast<std::size_t>(net.layer_sizes[l]);
        const auto n_out = static_cast<std::size_t>(net.layer_sizes[l + 1]);
        const double* W = net.weights[l].data();

        // dS/dW_ij = zbar_i*a_j + zbar_t_i*a_t_j + zbar_w_i*a_w_j + zbar_ww_i*a_ww_j
        double* gw = grad.data() + offset;
        double* gb = gw + in * n_out;
        for (std::size_t i = 0; i < n_out; ++i) {
            const double zb = bar_[i], zbt = bar_t_[i], zbw = bar_w_[i], zbww = bar_ww_[i];
            double* gr = gw + i * in;
            for (std::size_t j = 0; j < in; ++j)
                gr[j] += zb * s.a[j] + zbt * s.a_t[j] + zbw * s.a_w[j] + zbww * s.a_ww[j];
            gb[i] += zb;
        }

        if (l == 0) break;

        // activation adjoints of this layer's input: abar = W^T zbar (per component)
        for (std::size_t j = 0; j < in; ++j) {
            double aj = 0.0, ajt = 0.0, ajw = 0.0, ajww = 0.0;
            for (std::size_t i = 0; i < n_out; ++i) {
                const double wij = W[i * in + j];
                aj += wij * bar_[i];
                ajt += wij * bar_t_[i];
                ajw += wij * bar_w_[i];
                ajww += wij * bar_ww_[i];
            }
            nbar_[j] = aj;
            nbar_t_[j] = ajt;
            nbar_w_[j] = ajw;
            nbar_ww_[j] = ajww;
        }

        // pull activation adjoints back through tanh of layer l-1:
        //   a    = tanh(z)            p  = 1 - v^2
        //   a_t  = p z_t              q  = dp/dz = -2 v p
        //   a_w  = p z_w              q' = dq/dz = (6 v^2 - 2) p
        //   a_ww = p z_ww + q z_w^2
        const auto& ps = state_[l - 1];
        for (std::size_t j = 0; j < in; ++j) {
            const double v = ps.v[j];
            const double p = 1.0 - v * v;
            const double q = -2.0 * v * p;
            const double qp = (6.0 * v * v - 2.0) * p;
            const double zt = ps.z_t[j], zw = ps.z_w[j], zww = ps.z_ww[j];
            bar_ww_[j] = nbar_ww_[j] * p;
            bar_w_[j] = nbar_w_[j] * p + nbar_ww_[j] * 2.0 * q * zw;
            bar_t_[j] = nbar_t_[j] * p;
            bar_[j] = nbar_[j] * p + nbar_t_[j] * q * zt + nbar_w_[j] * q * zw +
                      nbar_ww_[j] * (q * zww + qp * zw * zw);
        }

        offset -= net.weights[l - 1].size() + net.biases[l - 1].size();
    }
}

Jet jet(const Mlp& net, double t, double w) {
    JetEvaluator eval(net);
    const Jet out = eval.forward(net, t, w);
    if (!std::isfinite(out.f) || !std::isfinite(out.f_t) || !std::isfinite(out.f_w) ||
        !std::isfinite(out.f_ww))
        throw numerical_error("jet: non-finite output");
    return out;
}

std::vector<double> backprop(const Mlp& net, double t, double w, const JetCotangent& cot) {
    JetEvaluator eval(net);
    eval.forward(net, t, w);
    std::vector<double> grad(net.param_count(), 0.0);
    eval.backward(net, cot, grad);
    return grad;
}

AdamState adam_init(std::size_t param_count) {
    AdamState s;
    s.m.assign(param_count, 0.0);
    s.v.assign(param_count, 0.0);
    return s;
}

void adam_step(AdamState& state, Mlp& net, std::span<const double> grad, double lr) {
    if (grad.size() != net.param_count() || state.m.size() != grad.size())
        throw std::invalid_argument("adam_step: gradient shape mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    std::size_t k = 0;
    auto update = [&](double& theta) {
        const double g = grad[k];
        state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g;
        state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * g * g;
        const double mhat = state.m[k] / bc1;
        const double vhat = state.v[k] / bc2;
        theta -= lr * mhat / (std::sqrt(vhat) + state.eps);
        ++k;
    };
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        for (double& w : net.weights[l]) update(w);
        for (double& b : net.biases[l]) update(b);
    }
}

void save_checkpoint(const Mlp& net, std::uint64_t seed, const std::string& csv_file,
                     const std::string& json_file) {
    std::ofstream csv(csv_file);
    if (!csv) throw std::runtime_error("cannot open for writing: " + csv_file);
    char buf[32];
    for (double x : net.flatten()) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", x);
        csv << buf;
    }

    nlohmann::json meta;
    meta["layer_sizes"] = net.layer_sizes;
    meta["seed"] = seed;
    meta["activation"] = "tanh";
    std::ofstream js(json_file);
    if (!js) throw std::runtime_error("cannot open for writing: " + json_file);
    js << meta.dump(2) << "\n";
}

Mlp load_checkpoint(const std::string& csv_file, const std::string& json_file) {
    std::ifstream js(json_file);
    if (!js) throw std::runtime_error("cannot open for reading: " + json_file);
    nlohmann::json meta = nlohmann::json::parse(js);

    Mlp net;
    net.layer_sizes = meta.at("layer_sizes").get<std::vector<int>>();
    for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
        net.weights.emplace_back(
            static_cast<std::size_t>(net.layer_sizes[l]) * net.layer_sizes[l + 1], 0.0);
        net.biases.emplace_back(net.layer_sizes[l + 1], 0.0);
    }

    std::ifstream csv(csv_file);
    if (!csv) throw std::runtime_error("cannot open for reading: " + csv_file);
    std::vector<double> theta;
    theta.reserve(net.param_count());
    std::string line;
    while (std::getline(csv, line))
        if (!line.empty()) theta.push_back(std::strtod(line.c_str(), nullptr));
    net.unflatten(theta);
    return net;
}

} // namespace mvdpm
