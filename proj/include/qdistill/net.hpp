#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qdistill/rng.hpp"

namespace qdistill {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class NetKind { Mlp, Dueling, Recurrent };

struct Architecture {
  NetKind kind = NetKind::Mlp;
  int n_inputs = 4;
  int hidden1 = 128;
  int hidden2 = 128;
  int n_actions = 2;

  // Closed-form parameter count (weights + biases; LSTM gate blocks included).
  std::int64_t parameter_count() const;

  bool operator==(const Architecture&) const = default;
};

struct Dense {
  Mat weight;  // out x in
  Vec bias;
};

struct LstmLayer {
  // Gate rows ordered [input; forget; cell; output], each hidden-size tall.
  Mat weight_x;  // 4H x in
  Mat weight_h;  // 4H x H
  Vec bias;      // 4H
};

// Parameters of one network. Gradients reuse the same shape.
struct Network {
  Architecture arch;
  // Mlp:       layers = {in->h1, h1->h2, h2->actions}
  // Dueling:   layers = {in->h1, h1->h2, value h2->1, advantage h2->actions}
  // Recurrent: lstm in->h1, layers = {h1->h2, h2->actions}
  std::vector<Dense> layers;
  LstmLayer lstm;

  std::int64_t parameter_count() const { return arch.parameter_count(); }
};

// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], deterministic in seed.
Network make_network(const Architecture& arch, std::uint64_t seed);
Network zeros_like(const Network& net);

Vec flatten(const Network& net);
void unflatten(const Vec& flat, Network& net);

// Q = V + A - mean(A), per batch column.
Mat dueling_aggregate(const Mat& value, const Mat& advantages);

struct LstmState {
  Vec h;
  Vec c;
};
LstmState zero_state(const Network& net);

// Caches hold everything backward needs; a cache is only valid for the
// parameters it was produced with.
struct FfCache {
  Mat input;
  Mat pre1, act1;  // after layer 0 / relu
  Mat pre2, act2;  // after layer 1 / relu
  Mat value, advantages;  // dueling only
};

struct RecCache {
  std::vector<Mat> inputs;                 // T entries, in x B
  std::vector<Mat> gates;                  // pre-activation 4H x B
  std::vector<Mat> i, f, g, o;             // activated gates
  std::vector<Mat> c, h;                   // cell/hidden after each step
  std::vector<Mat> tanh_c;
  std::vector<Mat> pre2, act2;             // dense head per step
};

// Feedforward batch: input in x B -> logits actions x B. Mlp/Dueling only.
Mat forward_batch(const Network& net, const Mat& input, FfCache* cache = nullptr);

// Recurrent batch over a window: T inputs of in x B, zero initial state.
// Returns logits per step. Recurrent only.
std::vector<Mat> forward_seq(const Network& net, const std::vector<Mat>& inputs,
                             RecCache* cache = nullptr);

// Single observation. For Recurrent nets the hidden state advances in place.
Vec forward(const Network& net, const Vec& input);
Vec forward_step(const Network& net, const Vec& input, LstmState& state);

// dlogits has the shape of the forward output; returns parameter gradients.
Network backward_batch(const Network& net, const FfCache& cache, const Mat& dlogits);
Network backward_seq(const Network& net, const RecCache& cache,
                     const std::vector<Mat>& dlogits);

struct AdamState {
  Vec m;
  Vec v;
  std::int64_t step = 0;
};
AdamState make_adam_state(const Network& net);

// Standard Adam (beta1=0.9, beta2=0.999, eps=1e-8) on the flattened vectors.
void adam_step(Vec& params, const Vec& grads, AdamState& state, double lr);
void adam_step(Network& net, const Network& grads, AdamState& state, double lr);

}  // namespace qdistill
