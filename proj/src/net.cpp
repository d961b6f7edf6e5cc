#include "qdistill/net.hpp"

#include <cmath>
#include <stdexcept>

namespace qdistill {
namespace {

void fill_uniform(Mat& m, Rng& rng, double bound) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      m(r, c) = rng.uniform(-bound, bound);
    }
  }
}

void fill_uniform(Vec& v, Rng& rng, double bound) {
  for (Eigen::Index r = 0; r < v.size(); ++r) {
    v(r) = rng.uniform(-bound, bound);
  }
}

Mat relu(const Mat& m) { return m.cwiseMax(0.0); }

Mat relu_mask(const Mat& pre) {
  return (pre.array() > 0.0).cast<double>().matrix();
}

Mat sigmoid(const Mat& m) {
  return (1.0 / (1.0 + (-m.array()).exp())).matrix();
}

// Visits every parameter block in flattening order.
template <typename NetT, typename Fn>
void visit_blocks(NetT& net, Fn&& fn) {
  if (net.arch.kind == NetKind::Recurrent) {
    fn(net.lstm.weight_x);
    fn(net.lstm.weight_h);
    fn(net.lstm.bias);
  }
  for (auto& layer : net.layers) {
    fn(layer.weight);
    fn(layer.bias);
  }
}

}  // namespace

std::int64_t Architecture::parameter_count() const {
  const std::int64_t in = n_inputs, h1 = hidden1, h2 = hidden2, a = n_actions;
  switch (kind) {
    case NetKind::Mlp:
      return h1 * (in + 1) + h2 * (h1 + 1) + a * (h2 + 1);
    case NetKind::Dueling:
      return h1 * (in + 1) + h2 * (h1 + 1) + (h2 + 1) + a * (h2 + 1);
    case NetKind::Recurrent:
      return 4 * h1 * (in + h1 + 1) + h2 * (h1 + 1) + a * (h2 + 1);
  }
  throw std::logic_error("unknown network kind");
}

Network make_network(const Architecture& arch, std::uint64_t seed) {
  Network net;
  net.arch = arch;
  Rng rng(seed);
  auto dense = [&](int in, int out) {
    Dense layer{Mat::Zero(out, in), Vec::Zero(out)};
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    fill_uniform(layer.weight, rng, bound);
    fill_uniform(layer.bias, rng, bound);
    return layer;
  };
  switch (arch.kind) {
    case NetKind::Mlp:
      net.layers = {dense(arch.n_inputs, arch.hidden1),
                    dense(arch.hidden1, arch.hidden2),
                    dense(arch.hidden2, arch.n_actions)};
      break;
    case NetKind::Dueling:
      net.layers = {dense(arch.n_inputs, arch.hidden1),
                    dense(arch.hidden1, arch.hidden2),
                    dense(arch.hidden2, 1),
                    dense(arch.hidden2, arch.n_actions)};
      break;
    case NetKind::Recurrent: {
      const int h = arch.hidden1;
      const double bound = 1.0 / std::sqrt(static_cast<double>(arch.n_inputs + h));
      net.lstm.weight_x = Mat::Zero(4 * h, arch.n_inputs);
      net.lstm.weight_h = Mat::Zero(4 * h, h);
      net.lstm.bias = Vec::Zero(4 * h);
      fill_uniform(net.lstm.weight_x, rng, bound);
      fill_uniform(net.lstm.weight_h, rng, bound);
      fill_uniform(net.lstm.bias, rng, bound);
      net.layers = {dense(arch.hidden1, arch.hidden2),
                    dense(arch.hidden2, arch.n_actions)};
      break;
    }
  }
  return net;
}

Network zeros_like(const Network& net) {
  Network out = net;
  visit_blocks(out, [](auto& block) { block.setZero(); });
  return out;
}

Vec flatten(const Network& net) {
  Vec flat(net.parameter_count());
  Eigen::Index pos = 0;
  visit_blocks(const_cast<Network&>(net), [&](auto& block) {
    flat.segment(pos, block.size()) = Eigen::Map<const Vec>(block.data(), block.size());
    pos += block.size();
  });
  return flat;
}

void unflatten(const Vec& flat, Network& net) {
  if (flat.size() != net.parameter_count()) {
    throw std::invalid_argument("flat parameter vector has wrong length");
  }
  Eigen::Index pos = 0;
  visit_blocks(net, [&](auto& block) {
    Eigen::Map<Vec>(block.data(), block.size()) = flat.segment(pos, block.size());
    pos += block.size();
  });
}

Mat dueling_aggregate(const Mat& value, const Mat& advantages) {
  Mat centered = advantages.rowwise() - advantages.colwise().mean();
  return centered + Vec::Ones(advantages.rows()) * value;
}

LstmState zero_state(const Network& net) {
  return {Vec::Zero(net.arch.hidden1), Vec::Zero(net.arch.hidden1)};
}

Mat forward_batch(const Network& net, const Mat& input, FfCache* cache) {
  if (net.arch.kind == NetKind::Recurrent) {
    throw std::logic_error("forward_batch is for feedforward networks");
  }
  if (input.rows() != net.arch.n_inputs) {
    throw std::invalid_argument("input row count does not match n_inputs");
  }
  Mat pre1 = (net.layers[0].weight * input).colwise() + net.layers[0].bias;
  Mat act1 = relu(pre1);
  Mat pre2 = (net.layers[1].weight * act1).colwise() + net.layers[1].bias;
  Mat act2 = relu(pre2);

  Mat logits, value, advantages;
  if (net.arch.kind == NetKind::Mlp) {
    logits = (net.layers[2].weight * act2).colwise() + net.layers[2].bias;
  } else {
    value = (net.layers[2].weight * act2).colwise() + net.layers[2].bias;
    advantages = (net.layers[3].weight * act2).colwise() + net.layers[3].bias;
    logits = dueling_aggregate(value, advantages);
  }
  if (cache != nullptr) {
    cache->input = input;
    cache->pre1 = std::move(pre1);
    cache->act1 = std::move(act1);
    cache->pre2 = std::move(pre2);
    cache->act2 = std::move(act2);
    cache->value = std::move(value);
    cache->advantages = std::move(advantages);
  }
  return logits;
}

std::vector<Mat> forward_seq(const Network& net, const std::vector<Mat>& inputs,
                             RecCache* cache) {
  if (net.arch.kind != NetKind::Recurrent) {
    throw std::logic_error("forward_seq requires a recurrent network");
  }
  const int hidden = net.arch.hidden1;
  const auto steps = inputs.size();
  const Eigen::Index batch = inputs.empty() ? 0 : inputs[0].cols();
  Mat h = Mat::Zero(hidden, batch);
  Mat c = Mat::Zero(hidden, batch);

  std::vector<Mat> logits(steps);
  if (cache != nullptr) {
    cache->inputs = inputs;
    cache->gates.resize(steps);
    cache->i.resize(steps);
    cache->f.resize(steps);
    cache->g.resize(steps);
    cache->o.resize(steps);
    cache->c.resize(steps);
    cache->h.resize(steps);
    cache->tanh_c.resize(steps);
    cache->pre2.resize(steps);
    cache->act2.resize(steps);
  }
  for (std::size_t t = 0; t < steps; ++t) {
    Mat pre = (net.lstm.weight_x * inputs[t] + net.lstm.weight_h * h).colwise() +
              net.lstm.bias;
    Mat gi = sigmoid(pre.topRows(hidden));
    Mat gf = sigmoid(pre.middleRows(hidden, hidden));
    Mat gg = pre.middleRows(2 * hidden, hidden).array().tanh().matrix();
    Mat go = sigmoid(pre.bottomRows(hidden));
    c = gf.cwiseProduct(c) + gi.cwiseProduct(gg);
    Mat tanh_c = c.array().tanh().matrix();
    h = go.cwiseProduct(tanh_c);

    Mat pre2 = (net.layers[0].weight * h).colwise() + net.layers[0].bias;
    Mat act2 = relu(pre2);
    logits[t] = (net.layers[1].weight * act2).colwise() + net.layers[1].bias;

    if (cache != nullptr) {
      cache->gates[t] = std::move(pre);
      cache->i[t] = std::move(gi);
      cache->f[t] = std::move(gf);
      cache->g[t] = std::move(gg);
      cache->o[t] = std::move(go);
      cache->c[t] = c;
      cache->h[t] = h;
      cache->tanh_c[t] = std::move(tanh_c);
      cache->pre2[t] = std::move(pre2);
      cache->act2[t] = std::move(act2);
    }
  }
  return logits;
}

Vec forward(const Network& net, const Vec& input) {
  if (net.arch.kind == NetKind::Recurrent) {
    LstmState state = zero_state(net);
    return forward_step(net, input, state);
  }
  return forward_batch(net, input);
}

Vec forward_step(const Network& net, const Vec& input, LstmState& state) {
  if (net.arch.kind != NetKind::Recurrent) {
    return forward_batch(net, input);
  }
  const int hidden = net.arch.hidden1;
  Vec pre = net.lstm.weight_x * input + net.lstm.weight_h * state.h + net.lstm.bias;
  Vec gi = (1.0 / (1.0 + (-pre.head(hidden).array()).exp())).matrix();
  Vec gf = (1.0 / (1.0 + (-pre.segment(hidden, hidden).array()).exp())).matrix();
  Vec gg = pre.segment(2 * hidden, hidden).array().tanh().matrix();
  Vec go = (1.0 / (1.0 + (-pre.tail(hidden).array()).exp())).matrix();
  state.c = gf.cwiseProduct(state.c) + gi.cwiseProduct(gg);
  state.h = go.cwiseProduct(state.c.array().tanh().matrix());

  Vec act = (net.layers[0].weight * state.h + net.layers[0].bias).cwiseMax(0.0);
  return net.layers[1].weight * act + net.layers[1].bias;
}

Network backward_batch(const Network& net, const FfCache& cache, const Mat& dlogits) {
  Network grads = zeros_like(net);

  Mat dact2;
  if (net.arch.kind == NetKind::Mlp) {
    grads.layers[2].weight = dlogits * cache.act2.transpose();
    grads.layers[2].bias = dlogits.rowwise().sum();
    dact2 = net.layers[2].weight.transpose() * dlogits;
  } else {
    // Q = V + A - mean(A): value gets the column sums, advantages the
    // mean-removed residual.
    Mat dvalue = dlogits.colwise().sum();
    Mat dadv = dlogits.rowwise() - dlogits.colwise().mean();
    grads.layers[2].weight = dvalue * cache.act2.transpose();
    grads.layers[2].bias = dvalue.rowwise().sum();
    grads.layers[3].weight = dadv * cache.act2.transpose();
    grads.layers[3].bias = dadv.rowwise().sum();
    dact2 = net.layers[2].weight.transpose() * dvalue +
            net.layers[3].weight.transpose() * dadv;
  }

  Mat dpre2 = dact2.cwiseProduct(relu_mask(cache.pre2));
  grads.layers[1].weight = dpre2 * cache.act1.transpose();
  grads.layers[1].bias = dpre2.rowwise().sum();

  Mat dact1 = net.layers[1].weight.transpose() * dpre2;
  Mat dpre1 = dact1.cwiseProduct(relu_mask(cache.pre1));
  grads.layers[0].weight = dpre1 * cache.input.transpose();
  grads.layers[0].bias = dpre1.rowwise().sum();
  return grads;
}

Network backward_seq(const Network& net, const RecCache& cache,
                     const std::vector<Mat>& dlogits) {
  Network grads = zeros_like(net);
  const int hidden = net.arch.hidden1;
  const auto steps = cache.inputs.size();
  if (steps == 0) {
    return grads;
  }
  const Eigen::Index batch = cache.inputs[0].cols();

  Mat dh_next = Mat::Zero(hidden, batch);
  Mat dc_next = Mat::Zero(hidden, batch);
  for (std::size_t t = steps; t-- > 0;) {
    grads.layers[1].weight += dlogits[t] * cache.act2[t].transpose();
    grads.layers[1].bias += dlogits[t].rowwise().sum();
    Mat dact2 = net.layers[1].weight.transpose() * dlogits[t];
    Mat dpre2 = dact2.cwiseProduct(relu_mask(cache.pre2[t]));
    grads.layers[0].weight += dpre2 * cache.h[t].transpose();
    grads.layers[0].bias += dpre2.rowwise().sum();

    Mat dh = net.layers[0].weight.transpose() * dpre2 + dh_next;
    Mat dout = dh.cwiseProduct(cache.tanh_c[t]);
    Mat dc = dh.cwiseProduct(cache.o[t])
                 .cwiseProduct((1.0 - cache.tanh_c[t].array().square()).matrix()) +
             dc_next;

    const Mat& c_prev = t == 0 ? Mat::Zero(hidden, batch).eval() : cache.c[t - 1];
    Mat di = dc.cwiseProduct(cache.g[t]);
    Mat df = dc.cwiseProduct(c_prev);
    Mat dg = dc.cwiseProduct(cache.i[t]);
    dc_next = dc.cwiseProduct(cache.f[t]);

    Mat dpre(4 * hidden, batch);
    dpre.topRows(hidden) =
        di.cwiseProduct(cache.i[t]).cwiseProduct((1.0 - cache.i[t].array()).matrix());
    dpre.middleRows(hidden, hidden) =
        df.cwiseProduct(cache.f[t]).cwiseProduct((1.0 - cache.f[t].array()).matrix());
    dpre.middleRows(2 * hidden, hidden) =
        dg.cwiseProduct((1.0 - cache.g[t].array().square()).matrix());
    dpre.bottomRows(hidden) =
        dout.cwiseProduct(cache.o[t]).cwiseProduct((1.0 - cache.o[t].array()).matrix());

    grads.lstm.weight_x += dpre * cache.inputs[t].transpose();
    if (t > 0) {
      grads.lstm.weight_h += dpre * cache.h[t - 1].transpose();
    }
    grads.lstm.bias += dpre.rowwise().sum();
    dh_next = net.lstm.weight_h.transpose() * dpre;
  }
  return grads;
}

AdamState make_adam_state(const Network& net) {
  AdamState state;
  state.m = Vec::Zero(net.parameter_count());
  state.v = Vec::Zero(net.parameter_count());
  return state;
}

void adam_step(Vec& params, const Vec& grads, AdamState& state, double lr) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  state.step += 1;
  state.m = kBeta1 * state.m + (1.0 - kBeta1) * grads;
  state.v = kBeta2 * state.v.array() + (1.0 - kBeta2) * grads.array().square();
  const double m_corr = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
  const double v_corr = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
  params.array() -= lr * (state.m.array() / m_corr) /
                    ((state.v.array() / v_corr).sqrt() + kEps);
}

void adam_step(Network& net, const Network& grads, AdamState& state, double lr) {
  Vec params = flatten(net);
  const Vec g = flatten(grads);
  adam_step(params, g, state, lr);
  unflatten(params, net);
}

}  // namespace qdistill
