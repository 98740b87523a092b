#include "pcqa/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "pcqa/error.hpp"

namespace pcqa {

namespace {

constexpr char kMagic[8] = {'P', 'C', 'Q', 'A', 'C', 'K', 'P', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_tensor(std::string& out, const Tensor2& t) {
  put_u32(out, static_cast<uint32_t>(t.rows));
  put_u32(out, static_cast<uint32_t>(t.cols));
  for (double v : t.data) {
    uint64_t u;
    std::memcpy(&u, &v, 8);
    put_u64(out, u);
  }
}

struct Reader {
  const std::string& bytes;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > bytes.size())
      throw Error(ErrorCode::TruncatedBody, "checkpoint ends unexpectedly");
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[pos++])) << (8 * i);
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<uint64_t>(static_cast<unsigned char>(bytes[pos++])) << (8 * i);
    return v;
  }
  std::string str(size_t n) {
    need(n);
    std::string s = bytes.substr(pos, n);
    pos += n;
    return s;
  }
  Tensor2 tensor() {
    uint32_t rows = u32();
    uint32_t cols = u32();
    Tensor2 t(static_cast<int>(rows), static_cast<int>(cols));
    for (double& v : t.data) {
      uint64_t u = u64();
      std::memcpy(&v, &u, 8);
    }
    return t;
  }
};

}  // namespace

std::string serialize_checkpoint(ModelParams& params, const OptimizerState* optimizer) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);

  std::vector<std::string> names = params.tensor_names();
  std::vector<Tensor2*> tensors = params.tensor_ptrs();
  put_u64(out, names.size());
  for (size_t i = 0; i < names.size(); ++i) {
    put_u32(out, static_cast<uint32_t>(names[i].size()));
    out += names[i];
    put_tensor(out, *tensors[i]);
  }

  out.push_back(optimizer ? 1 : 0);
  if (optimizer) {
    if (optimizer->m.size() != tensors.size())
      throw Error(ErrorCode::ShapeMismatch, "optimizer state does not match parameters");
    put_u64(out, static_cast<uint64_t>(optimizer->t));
    uint64_t lr_bits;
    std::memcpy(&lr_bits, &optimizer->lr, 8);
    put_u64(out, lr_bits);
    for (const Tensor2& m : optimizer->m) put_tensor(out, m);
    for (const Tensor2& v : optimizer->v) put_tensor(out, v);
  }
  return out;
}

ModelParams deserialize_checkpoint(const std::string& bytes, const ModelConfig& config,
                                   OptimizerState* optimizer) {
  Reader reader{bytes};
  if (reader.str(8) != std::string(kMagic, 8))
    throw Error(ErrorCode::MalformedHeader, "not a checkpoint file");
  uint32_t version = reader.u32();
  if (version != kVersion)
    throw Error(ErrorCode::UnsupportedFormat,
                "checkpoint version " + std::to_string(version));

  uint64_t count = reader.u64();
  std::map<std::string, Tensor2> by_name;
  std::vector<std::string> order;
  for (uint64_t i = 0; i < count; ++i) {
    uint32_t len = reader.u32();
    std::string name = reader.str(len);
    order.push_back(name);
    by_name[name] = reader.tensor();
  }

  ModelParams params = ModelParams::init(config, /*seed=*/0);
  params.for_each_tensor([&](const std::string& name, Tensor2& t) {
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw Error(ErrorCode::ConfigMismatch, "checkpoint lacks tensor " + name +
                                                 " (config/architecture mismatch)");
    if (!t.same_shape(it->second))
      throw Error(ErrorCode::ConfigMismatch, "tensor " + name + " shape mismatch");
    t = it->second;
  });

  bool has_optimizer = false;
  {
    reader.need(1);
    has_optimizer = bytes[reader.pos++] != 0;
  }
  if (optimizer) {
    if (!has_optimizer) {
      *optimizer = OptimizerState::create(params.tensor_ptrs(), optimizer->lr);
    } else {
      optimizer->t = static_cast<int64_t>(reader.u64());
      uint64_t lr_bits = reader.u64();
      std::memcpy(&optimizer->lr, &lr_bits, 8);
      optimizer->m.clear();
      optimizer->v.clear();
      for (uint64_t i = 0; i < count; ++i) optimizer->m.push_back(reader.tensor());
      for (uint64_t i = 0; i < count; ++i) optimizer->v.push_back(reader.tensor());
    }
  }
  return params;
}

void save_checkpoint(const std::string& path, ModelParams& params,
                     const OptimizerState* optimizer) {
  std::string bytes = serialize_checkpoint(params, optimizer);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

ModelParams load_checkpoint(const std::string& path, const ModelConfig& config,
                            OptimizerState* optimizer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open checkpoint " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str(), config, optimizer);
}

}  // namespace pcqa
