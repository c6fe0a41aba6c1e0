#include "wsseg/netgraph/model.hpp"

#include <future>
#include <iomanip>
#include <sstream>

namespace wsseg {

template <typename T>
std::vector<Var<T>> Instance<T>::encode(const Var<T>& x, bool training) {
  const int L = static_cast<int>(blocks.size()) + 1;
  std::vector<Var<T>> pyramid;
  if (!inject.empty()) pyramid = image_pyramid(x, L);
  std::vector<Var<T>> out{stem.forward(x, training)};
  for (int l = 2; l <= L; ++l) {
    Var<T> h = out.back();
    auto& level = blocks[l - 2];
    for (std::size_t b = 0; b < level.size(); ++b) {
      h = level[b].forward(h, training);
      if (!inject.empty()) h = inject[l - 2][b].forward(h, pyramid, training);
    }
    out.push_back(h);
  }
  return out;
}

template <typename T>
Var<T> Instance<T>::forward(const Var<T>& x, bool training) {
  const auto enc = encode(x, training);
  Var<T> y = dense.forward(enc, training);
  if (sparse) y = add(y, sparse->forward(enc));
  return y;
}

template <typename T>
Model<T>::Model(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  Builder<T> b(params_, rng, &layers_);
  const int L = config_.num_levels;
  const int C = config_.num_classes;
  const auto enc = config_.encoder_widths();
  const auto dec = config_.decoder_widths();

  for (int p = 0; p < config_.resolutions; ++p) {
    b.set_instance(p);
    b.set_prefix("r" + std::to_string(p) + ".");
    Instance<T> inst;
    inst.stem = b.conv_bn("enc1.stem", 3, enc[0], 3, {2, 1, 1, 0}, true, 2);
    for (int l = 2; l <= L; ++l) {
      const int down = 1 << l;
      const std::string n = "enc" + std::to_string(l);
      std::vector<Rcu<T>> level;
      level.push_back(b.rcu(n + ".rcu0", enc[l - 2], enc[l - 1], 2, down));
      level.push_back(b.rcu(n + ".rcu1", enc[l - 1], enc[l - 1], 1, down));
      inst.blocks.push_back(std::move(level));
      if (config_.ia_rcu) {
        std::vector<InputInjection<T>> ia;
        ia.push_back(b.injection(n + ".ia0", enc[l - 1], l));
        ia.push_back(b.injection(n + ".ia1", enc[l - 1], l));
        inst.inject.push_back(std::move(ia));
      }
    }
    inst.dense.levels.resize(L);
    for (int l = L; l >= 1; --l) {
      const int down = 1 << l;
      const std::string n = "dec" + std::to_string(l);
      auto& level = inst.dense.levels[l - 1];
      level.level = l;
      if (l == L) {
        level.up = b.conv_bn(n + ".up", enc[L - 1], dec[L - 1], 3, {1, 1, 1, 0}, true, down, true);
      } else {
        level.up = b.conv_bn(n + ".up", dec[l], dec[l - 1], 3, {2, 1, 1, 1}, true, down, true);
      }
      int first = l + 1;
      if (config_.connectivity == Connectivity::kResidual) first = l;
      if (config_.connectivity == Connectivity::kDense) first = 1;
      for (int i = first; i <= l; ++i) {
        level.links.emplace_back(i, b.conv_bn(n + ".link" + std::to_string(i), enc[i - 1],
                                              dec[l - 1], 1, {}, true, down));
      }
    }
    inst.dense.head = b.conv("dec.head", dec[0], C, 3, {2, 1, 1, 1}, true, 1, true);
    if (config_.dual_decoder) {
      SparseDecoder<T> s;
      for (int l = 1; l <= L; ++l) {
        s.project.push_back(
            b.conv("sparse" + std::to_string(l) + ".project", enc[l - 1], C, 1, {}, false, 1 << l));
      }
      for (int l = 1; l <= L; ++l) {
        s.up.push_back(b.conv("sparse" + std::to_string(l) + ".up", C, C, 1, {2, 0, 1, 1}, false,
                              1 << (l - 1), true));
      }
      inst.sparse = std::move(s);
    }
    instances_.push_back(std::move(inst));
  }
  if (config_.fusion != FusionKind::kNone) {
    b.set_instance(-1);
    b.set_prefix("");
    fusion_ = b.fusion("fusion", config_.fusion, C);
  }
}

template <typename T>
Var<T> Model<T>::forward_instance(int p, const Var<T>& x, bool training) {
  const int unit = 1 << config_.num_levels;
  if (x.shape().c != 3) throw ConfigError("model input must have 3 channels, got " + x.shape().str());
  if (x.shape().h % unit != 0 || x.shape().w % unit != 0) {
    throw ConfigError("instance input " + std::to_string(x.shape().h) + "x" +
                      std::to_string(x.shape().w) + " is not divisible by 2^" +
                      std::to_string(config_.num_levels) + " = " + std::to_string(unit) +
                      "; pad the input to a multiple");
  }
  return instances_.at(p).forward(x, training);
}

template <typename T>
Var<T> Model<T>::forward(const Var<T>& input, bool training) {
  const int P = config_.resolutions;
  const int outer = 2 * config_.instance_border(P - 1);
  const int h = input.shape().h - outer;
  const int w = input.shape().w - outer;
  if (h < 1 || w < 1) {
    throw ConfigError("input " + input.shape().str() + " is smaller than the context border");
  }
  if (P == 1) return forward_instance(0, input, training);

  std::vector<Var<T>> outs(P);
  auto run = [&](int p) {
    const int bp = 2 * config_.instance_border(p);
    const Var<T> xp = central_crop(input, h + bp, w + bp);
    outs[p] = central_crop(forward_instance(p, xp, training), h, w);
  };
  if (threads_ > 1) {
    std::vector<std::future<void>> jobs;
    for (int p = 0; p < P; ++p) jobs.push_back(std::async(std::launch::async, run, p));
    for (auto& j : jobs) j.get();
  } else {
    for (int p = 0; p < P; ++p) run(p);
  }
  Var<T> y = outs[0];
  for (int p = 1; p < P; ++p) y = add(y, outs[p]);
  return fusion_->forward(y, training);
}

template <typename T>
std::size_t Model<T>::instance_param_count(int p) const {
  std::size_t n = 0;
  for (const auto& l : layers_)
    if (l.instance == p) n += l.params;
  return n;
}

template <typename T>
std::size_t Model<T>::fusion_param_count() const {
  return instance_param_count(-1);
}

template <typename T>
std::vector<std::pair<int, int>> Model<T>::dense_links() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& level : instances_.front().dense.levels)
    for (const auto& link : level.links) out.emplace_back(link.first, level.level);
  return out;
}

std::string architecture_summary(const ModelConfig& config, const std::vector<LayerInfo>& layers) {
  std::ostringstream os;
  os << std::left << std::setw(34) << "layer" << std::setw(8) << "kind" << std::setw(12)
     << "channels" << std::setw(4) << "k" << std::setw(4) << "s" << std::setw(4) << "d"
     << std::setw(12) << "output" << "params\n";
  std::size_t total = 0;
  for (const auto& l : layers) {
    const int in = l.instance < 0 ? config.patch_size
                                  : config.patch_size + 2 * config.instance_border(l.instance);
    const int side = in / l.downsample;
    os << std::left << std::setw(34) << l.name << std::setw(8) << l.kind << std::setw(12)
       << (std::to_string(l.in_channels) + "->" + std::to_string(l.out_channels)) << std::setw(4)
       << l.kernel << std::setw(4) << l.stride << std::setw(4) << l.dilation << std::setw(12)
       << (std::to_string(l.out_channels) + "x" + std::to_string(side) + "x" +
           std::to_string(side))
       << l.params << "\n";
    total += l.params;
  }
  os << "total parameters: " << total << "\n";
  return os.str();
}

std::size_t count_params(const ModelConfig& config) {
  // Shapes only; a float model of the same config has identical counts.
  return Model<float>(config, 0).param_count();
}

template struct Instance<float>;
template struct Instance<double>;
template class Model<float>;
template class Model<double>;

}  // namespace wsseg
