// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsrn/checkpoint.hpp"

#include <bit>
#include <fstream>

#include <nlohmann/json.hpp>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

using ordered_json = nlohmann::ordered_json;

namespace dsrn {

namespace {

constexpr int kFormatVersion = 1;

void write_checkpoint(const std::string &path, const std::string &variant,
                      const ordered_json &arch, const std::vector<TensorRef> &refs,
                      uint64_t seed, int64_t step) {
  ordered_json header;
  header["format_version"] = kFormatVersion;
  header["variant"] = variant;
  ordered_json shapes = ordered_json::array();
  for (const TensorRef &t : refs) {
    ordered_json s;
    s["name"] = t.name;
    s["shape"] = t.shape;
    shapes.push_back(s);
  }
  header["shapes"] = shapes;
  header["seed"] = seed;
  header["step"] = step;
  header["arch"] = arch;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << header.dump() << "\n";
  for (const TensorRef &t : refs)
    out.write(reinterpret_cast<const char *>(t.data),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!out) throw std::runtime_error("short write: " + path);
}

ordered_json read_header(std::ifstream &in, const std::string &path,
                         const std::string &expect_variant) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint: missing header: " + path);
  ordered_json header = ordered_json::parse(line);
  if (header.at("format_version").get<int>() != kFormatVersion)
    throw std::runtime_error("checkpoint: unsupported format_version in " + path);
  const std::string variant = header.at("variant").get<std::string>();
  if (variant != expect_variant)
    throw std::runtime_error("checkpoint: variant mismatch, expected " + expect_variant +
                             ", got " + variant + " in " + path);
  return header;
}

void read_blob(std::ifstream &in, const std::string &path, const ordered_json &header,
               const std::vector<TensorRef> &refs) {
  const auto &shapes = header.at("shapes");
  if (shapes.size() != refs.size())
    throw std::runtime_error("checkpoint: tensor count mismatch in " + path);
  for (size_t i = 0; i < refs.size(); ++i) {
    const auto &s = shapes[i];
    if (s.at("name").get<std::string>() != refs[i].name)
      throw std::runtime_error("checkpoint: tensor name mismatch at index " + std::to_string(i) +
                               " in " + path);
    std::vector<Eigen::Index> shape = s.at("shape").get<std::vector<Eigen::Index>>();
    if (shape != refs[i].shape)
      throw std::runtime_error("checkpoint: shape mismatch for " + refs[i].name + " in " + path);
  }
  for (const TensorRef &t : refs) {
    in.read(reinterpret_cast<char *>(t.data),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated blob in " + path);
  }
}

}  // namespace

void save_estimator_checkpoint(const std::string &path, const MaskEstimatorParams &p,
                               uint64_t seed, int64_t step) {
  ordered_json arch;
  arch["input_dim"] = p.input_dim;
  arch["output_dim"] = p.output_dim;
  if (p.variant == EstimatorVariant::Mlp) {
    arch["hidden"] = p.hidden_dims();
  } else if (p.variant == EstimatorVariant::Lstm) {
    arch["hidden"] = p.lstm_hidden();
    arch["layers"] = p.lstm_layers.size();
  } else {
    throw std::invalid_argument("save_estimator_checkpoint: oracle variant has no parameters");
  }
  write_checkpoint(path, variant_name(p.variant), arch, tensor_refs(p), seed, step);
}

MaskEstimatorParams load_estimator_checkpoint(const std::string &path, uint64_t *seed,
                                              int64_t *step) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint: missing header: " + path);
  ordered_json header = ordered_json::parse(line);
  const std::string variant = header.at("variant").get<std::string>();
  const auto &arch = header.at("arch");

  MaskEstimatorParams p;
  if (variant == "mlp") {
    p = MaskEstimatorParams::mlp(arch.at("input_dim").get<int>(),
                                 arch.at("hidden").get<std::vector<int>>(),
                                 arch.at("output_dim").get<int>());
  } else if (variant == "lstm") {
    p = MaskEstimatorParams::lstm(arch.at("input_dim").get<int>(), arch.at("hidden").get<int>(),
                                  arch.at("layers").get<int>(), arch.at("output_dim").get<int>());
  } else {
    throw std::runtime_error("checkpoint: unknown estimator variant " + variant + " in " + path);
  }
  if (header.at("format_version").get<int>() != kFormatVersion)
    throw std::runtime_error("checkpoint: unsupported format_version in " + path);
  read_blob(in, path, header, tensor_refs(p));
  if (seed) *seed = header.at("seed").get<uint64_t>();
  if (step) *step = header.at("step").get<int64_t>();
  return p;
}

void save_dsrnet_checkpoint(const std::string &path, const DsrnetParams &p, uint64_t seed,
                            int64_t step) {
  ordered_json arch;
  arch["dim"] = p.dim;
  arch["share_inner"] = p.share_inner;
  write_checkpoint(path, "dsrnet", arch, tensor_refs(p), seed, step);
}

DsrnetParams load_dsrnet_checkpoint(const std::string &path, uint64_t *seed, int64_t *step) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  ordered_json header = read_header(in, path, "dsrnet");
  const auto &arch = header.at("arch");
  DsrnetParams p =
      DsrnetParams::make(arch.at("dim").get<int>(), arch.at("share_inner").get<bool>());
  read_blob(in, path, header, tensor_refs(p));
  if (seed) *seed = header.at("seed").get<uint64_t>();
  if (step) *step = header.at("step").get<int64_t>();
  return p;
}

}  // namespace dsrn
