#include "qdistill/checkpoint.hpp"

#include <nlohmann/json.hpp>
#include <stdexcept>

#include "qdistill/io.hpp"

namespace qdistill {
namespace {

using OrderedJson = nlohmann::ordered_json;

OrderedJson to_array(const Mat& m) {
  OrderedJson arr = OrderedJson::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      arr.push_back(m(r, c));
    }
  }
  return arr;
}

OrderedJson to_array(const Vec& v) {
  OrderedJson arr = OrderedJson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    arr.push_back(v(i));
  }
  return arr;
}

void from_array(const OrderedJson& arr, Mat& m) {
  if (static_cast<Eigen::Index>(arr.size()) != m.size()) {
    throw std::runtime_error("checkpoint: parameter array length mismatch");
  }
  std::size_t k = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      m(r, c) = arr[k++].get<double>();
    }
  }
}

void from_array(const OrderedJson& arr, Vec& v) {
  if (static_cast<Eigen::Index>(arr.size()) != v.size()) {
    throw std::runtime_error("checkpoint: parameter array length mismatch");
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = arr[i].get<double>();
  }
}

}  // namespace

std::string kind_name(NetKind kind) {
  switch (kind) {
    case NetKind::Mlp: return "mlp";
    case NetKind::Dueling: return "dueling";
    case NetKind::Recurrent: return "recurrent";
  }
  throw std::logic_error("unknown network kind");
}

NetKind kind_from_name(const std::string& name) {
  if (name == "mlp") return NetKind::Mlp;
  if (name == "dueling") return NetKind::Dueling;
  if (name == "recurrent") return NetKind::Recurrent;
  throw std::runtime_error("unknown architecture kind: " + name);
}

void save_checkpoint(const std::filesystem::path& path, const Network& net,
                     std::uint64_t seed, int episodes) {
  OrderedJson doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["kind"] = kind_name(net.arch.kind);
  doc["sizes"] = {net.arch.n_inputs, net.arch.hidden1, net.arch.hidden2,
                  net.arch.n_actions};
  OrderedJson layers = OrderedJson::array();
  if (net.arch.kind == NetKind::Recurrent) {
    layers.push_back({{"weight_x", to_array(net.lstm.weight_x)},
                      {"weight_h", to_array(net.lstm.weight_h)},
                      {"bias", to_array(net.lstm.bias)}});
  }
  for (const auto& layer : net.layers) {
    layers.push_back({{"weight", to_array(layer.weight)}, {"bias", to_array(layer.bias)}});
  }
  doc["layers"] = std::move(layers);
  doc["seed"] = seed;
  doc["episodes"] = episodes;
  atomic_write_file(path, doc.dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const OrderedJson doc = OrderedJson::parse(read_file(path));
  if (doc.at("format_version").get<int>() != kCheckpointFormatVersion) {
    throw std::runtime_error("unsupported checkpoint format version");
  }
  Architecture arch;
  arch.kind = kind_from_name(doc.at("kind").get<std::string>());
  const auto& sizes = doc.at("sizes");
  if (sizes.size() != 4) {
    throw std::runtime_error("checkpoint: sizes must have 4 entries");
  }
  arch.n_inputs = sizes[0].get<int>();
  arch.hidden1 = sizes[1].get<int>();
  arch.hidden2 = sizes[2].get<int>();
  arch.n_actions = sizes[3].get<int>();

  Checkpoint ckpt;
  ckpt.net = make_network(arch, 0);
  const auto& layers = doc.at("layers");
  std::size_t idx = 0;
  if (arch.kind == NetKind::Recurrent) {
    const auto& lstm = layers.at(idx++);
    from_array(lstm.at("weight_x"), ckpt.net.lstm.weight_x);
    from_array(lstm.at("weight_h"), ckpt.net.lstm.weight_h);
    from_array(lstm.at("bias"), ckpt.net.lstm.bias);
  }
  for (auto& layer : ckpt.net.layers) {
    const auto& entry = layers.at(idx++);
    from_array(entry.at("weight"), layer.weight);
    from_array(entry.at("bias"), layer.bias);
  }
  if (idx != layers.size()) {
    throw std::runtime_error("checkpoint: unexpected extra layer entries");
  }
  ckpt.seed = doc.at("seed").get<std::uint64_t>();
  ckpt.episodes = doc.at("episodes").get<int>();
  return ckpt;
}

}  // namespace qdistill
