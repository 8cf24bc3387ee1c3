#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mvdpm/common.hpp"

namespace mvdpm {

/// Value and input derivatives of F(t,w) at a point: the exact bundle the
/// Ito pseudo-coefficients are built from.
struct Jet {
    double f = 0.0;    // F
    double f_t = 0.0;  // dF/dt
    double f_w = 0.0;  // dF/dw
    double f_ww = 0.0; // d2F/dw2
};

/// Weights for a scalar built from a jet: S = c_f*f + c_t*f_t + c_w*f_w + c_ww*f_ww.
/// backprop() returns dS/dtheta.
struct JetCotangent {
    double c_f = 0.0;
    double c_t = 0.0;
    double c_w = 0.0;
    double c_ww = 0.0;
};

/// Fully connected network, tanh on hidden layers, affine output.
/// Input width 2 (t, w), output width 1.
///
/// The flat parameter order (used by gradients, Adam and checkpoints) is:
/// for each layer, weights row-major (out x in), then biases.
struct Mlp {
    std::vector<int> layer_sizes;               // e.g. {2, 32, 32, 1}
    std::vector<std::vector<double>> weights;   // [layer]: out x in, row-major
    std::vector<std::vector<double>> biases;    // [layer]: out

    std::size_t n_layers() const { return weights.size(); }
    std::size_t param_count() const;
    std::vector<double> flatten() const;
    void unflatten(std::span<const double> theta);
};

/// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases,
/// deterministic per seed.
Mlp mlp_init(const std::vector<int>& layer_sizes, std::uint64_t seed);

/// Reusable evaluator: forward() computes the jet and keeps the layer state
/// that backward() needs. One evaluator per (net, thread); forward must
/// precede backward for the same point.
class JetEvaluator {
public:
    explicit JetEvaluator(const Mlp& net);

    Jet forward(const Mlp& net, double t, double w);

    /// Accumulates dS/dtheta into grad (size param_count) for the point of
    /// the preceding forward(). Linear in the cotangent.
    void backward(const Mlp& net, const JetCotangent& cot, std::span<double> grad);

private:
    struct LayerState {
        // post-activation jets of the layer *input*
        std::vector<double> a, a_t, a_w, a_ww;
        // pre-activation jets and tanh values (hidden layers only)
        std::vector<double> z_t, z_w, z_ww, v;
    };
    std::vector<LayerState> state_;
    // adjoint scratch
    std::vector<double> bar_, bar_t_, bar_w_, bar_ww_;
    std::vector<double> nbar_, nbar_t_, nbar_w_, nbar_ww_;
};

/// One-shot jet evaluation. Throws numerical_error on non-finite output.
Jet jet(const Mlp& net, double t, double w);

/// One-shot gradient of c_f*f + c_t*f_t + c_w*f_w + c_ww*f_ww w.r.t. theta.
std::vector<double> backprop(const Mlp& net, double t, double w, const JetCotangent& cot);

struct AdamState {
    std::vector<double> m; // first moments, shaped like theta
    std::vector<double> v; // second moments
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

AdamState adam_init(std::size_t param_count);

/// Standard Adam update with bias correction; mutates net parameters in
/// flat order and increments the step counter.
void adam_step(AdamState& state, Mlp& net, std::span<const double> grad, double lr);

/// Checkpoint: one CSV value per line (theta in flat order) plus a JSON
/// sidecar with layer_sizes, seed and activation.
void save_checkpoint(const Mlp& net, std::uint64_t seed, const std::string& csv_file,
                     const std::string& json_file);
Mlp load_checkpoint(const std::string& csv_file, const std::string& json_file);

} // namespace mvdpm
