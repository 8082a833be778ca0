#include "rrm/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

namespace rrm {

namespace {

constexpr char kMagic[4] = {'R', 'R', 'M', 'M'};

enum LayerTag : std::uint32_t {
  kTagConv = 0,
  kTagFc = 1,
  kTagRelu = 2,
  kTagMaxPool = 3,
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return bytes_.size() - offset_; }

  std::uint32_t u32(const char* what) {
    need(4, what);
    const std::uint32_t v = static_cast<std::uint32_t>(bytes_[offset_]) |
                            (static_cast<std::uint32_t>(bytes_[offset_ + 1]) << 8) |
                            (static_cast<std::uint32_t>(bytes_[offset_ + 2]) << 16) |
                            (static_cast<std::uint32_t>(bytes_[offset_ + 3]) << 24);
    offset_ += 4;
    return v;
  }

  std::vector<float> f32_blob(std::size_t count, const char* what) {
    need(count * 4, what);
    std::vector<float> values(count);
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint32_t bits =
          static_cast<std::uint32_t>(bytes_[offset_]) |
          (static_cast<std::uint32_t>(bytes_[offset_ + 1]) << 8) |
          (static_cast<std::uint32_t>(bytes_[offset_ + 2]) << 16) |
          (static_cast<std::uint32_t>(bytes_[offset_ + 3]) << 24);
      values[i] = std::bit_cast<float>(bits);
      offset_ += 4;
    }
    return values;
  }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError("truncated model file: " + std::string(what) +
                        " needs " + std::to_string(n) + " bytes at offset " +
                        std::to_string(offset_) + ", " +
                        std::to_string(remaining()) + " left");
    }
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t offset_ = 0;
};

// Channel bookkeeping across the layer list; the full geometric check runs
// later in NetworkModel::validate once an input shape is declared.
void check_chain(const NetworkModel& model) {
  std::size_t channels = 0;  // 0 = not pinned yet (before first conv, or after fc)
  bool after_fc = false;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const LayerSpec& layer = model.layers[i];
    if (const auto* conv = std::get_if<ConvSpec>(&layer)) {
      if (after_fc) {
        throw FormatError("inconsistent layer chain: conv at layer " +
                          std::to_string(i) + " after an fc layer");
      }
      if (channels != 0 && conv->in_channels != channels) {
        throw FormatError("inconsistent layer chain: conv at layer " +
                          std::to_string(i) + " expects " +
                          std::to_string(conv->in_channels) +
                          " channels but gets " + std::to_string(channels));
      }
      channels = conv->out_channels;
    } else if (std::holds_alternative<FcSpec>(layer)) {
      after_fc = true;
      channels = 0;
    } else if (std::holds_alternative<MaxPoolSpec>(layer) && after_fc) {
      throw FormatError("inconsistent layer chain: max_pool at layer " +
                        std::to_string(i) + " after an fc layer");
    }
  }
}

}  // namespace

std::vector<std::uint8_t> encode_model(const NetworkModel& model) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kModelFileVersion);
  put_u32(out, static_cast<std::uint32_t>(model.layers.size()));
  for (const LayerSpec& layer : model.layers) {
    if (const auto* conv = std::get_if<ConvSpec>(&layer)) {
      put_u32(out, kTagConv);
      put_u32(out, static_cast<std::uint32_t>(conv->in_channels));
      put_u32(out, static_cast<std::uint32_t>(conv->out_channels));
      put_u32(out, static_cast<std::uint32_t>(conv->kernel_h));
      put_u32(out, static_cast<std::uint32_t>(conv->kernel_w));
      put_u32(out, static_cast<std::uint32_t>(conv->stride));
      put_u32(out, static_cast<std::uint32_t>(conv->pad));
      for (float w : conv->weights) put_f32(out, w);
      for (float b : conv->bias) put_f32(out, b);
    } else if (const auto* fc = std::get_if<FcSpec>(&layer)) {
      put_u32(out, kTagFc);
      put_u32(out, static_cast<std::uint32_t>(fc->in_features));
      put_u32(out, static_cast<std::uint32_t>(fc->out_features));
      for (float w : fc->weights) put_f32(out, w);
      for (float b : fc->bias) put_f32(out, b);
    } else if (std::holds_alternative<ReluSpec>(layer)) {
      put_u32(out, kTagRelu);
    } else {
      const auto& pool = std::get<MaxPoolSpec>(layer);
      put_u32(out, kTagMaxPool);
      put_u32(out, static_cast<std::uint32_t>(pool.kernel));
      put_u32(out, static_cast<std::uint32_t>(pool.stride));
    }
  }
  return out;
}

NetworkModel decode_model(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("bad magic: expected \"RRMM\"");
  }
  Reader body(bytes);
  body.u32("magic");  // skip, validated above
  const std::uint32_t version = body.u32("version");
  if (version != kModelFileVersion) {
    throw FormatError("unsupported model file version " +
                      std::to_string(version));
  }
  const std::uint32_t layer_count = body.u32("layer count");
  NetworkModel model;
  model.layers.reserve(layer_count);
  for (std::uint32_t i = 0; i < layer_count; ++i) {
    const std::uint32_t tag = body.u32("layer kind");
    switch (tag) {
      case kTagConv: {
        ConvSpec conv;
        conv.in_channels = body.u32("conv in_channels");
        conv.out_channels = body.u32("conv out_channels");
        conv.kernel_h = body.u32("conv kernel_h");
        conv.kernel_w = body.u32("conv kernel_w");
        conv.stride = body.u32("conv stride");
        conv.pad = body.u32("conv pad");
        if (conv.in_channels == 0 || conv.out_channels == 0 ||
            conv.kernel_h == 0 || conv.kernel_w == 0 || conv.stride == 0) {
          throw FormatError("conv spec at layer " + std::to_string(i) +
                            " has zero-sized field");
        }
        conv.weights = body.f32_blob(conv.weight_count(), "conv weights");
        conv.bias = body.f32_blob(conv.out_channels, "conv bias");
        model.layers.emplace_back(std::move(conv));
        break;
      }
      case kTagFc: {
        FcSpec fc;
        fc.in_features = body.u32("fc in_features");
        fc.out_features = body.u32("fc out_features");
        if (fc.in_features == 0 || fc.out_features == 0) {
          throw FormatError("fc spec at layer " + std::to_string(i) +
                            " has zero-sized field");
        }
        fc.weights = body.f32_blob(fc.in_features * fc.out_features, "fc weights");
        fc.bias = body.f32_blob(fc.out_features, "fc bias");
        model.layers.emplace_back(std::move(fc));
        break;
      }
      case kTagRelu:
        model.layers.emplace_back(ReluSpec{});
        break;
      case kTagMaxPool: {
        MaxPoolSpec pool;
        pool.kernel = body.u32("max_pool kernel");
        pool.stride = body.u32("max_pool stride");
        if (pool.kernel == 0 || pool.stride == 0) {
          throw FormatError("max_pool spec at layer " + std::to_string(i) +
                            " has zero-sized field");
        }
        model.layers.emplace_back(pool);
        break;
      }
      default:
        throw FormatError("unknown layer kind " + std::to_string(tag) +
                          " at offset " + std::to_string(body.offset() - 4));
    }
  }
  if (body.remaining() != 0) {
    throw FormatError("trailing bytes: parsing ended at offset " +
                      std::to_string(body.offset()) + " but the file has " +
                      std::to_string(bytes.size()) + " bytes");
  }
  if (model.layers.empty()) {
    throw FormatError("model file declares zero layers");
  }
  check_chain(model);
  return model;
}

NetworkModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open model file: " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

void save_model(const std::filesystem::path& path, const NetworkModel& model) {
  const std::vector<std::uint8_t> bytes = encode_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError("cannot write model file: " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace rrm
