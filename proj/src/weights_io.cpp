#include "rfda/weights_io.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

namespace rfda {

namespace {

constexpr char kMagic[4] = {'R', 'F', 'D', 'A'};
constexpr std::uint16_t kVersion = 1;
constexpr const char* kConfigEntry = "__config__";

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

struct Reader {
  std::vector<char> buf;
  std::size_t pos = 0;
  const std::string& path;

  explicit Reader(const std::string& p) : path(p) {
    std::ifstream is(p, std::ios::binary | std::ios::ate);
    if (!is) throw WeightsError("cannot open weight file " + p);
    buf.resize(static_cast<std::size_t>(is.tellg()));
    is.seekg(0);
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!is) throw WeightsError("cannot read weight file " + p);
  }

  void need(std::size_t n, const char* what) {
    if (pos + n > buf.size())
      throw WeightsError("truncated weight file " + path + ": unexpected end in " + what);
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint8_t>(buf[pos]) |
                      (static_cast<std::uint16_t>(static_cast<std::uint8_t>(buf[pos + 1])) << 8);
    pos += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return static_cast<std::uint8_t>(buf[pos++]);
  }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(buf.data() + pos, n);
    pos += n;
    return s;
  }
  std::vector<float> f32s(std::size_t n, const char* what) {
    need(n * 4, what);
    std::vector<float> v(n);
    std::memcpy(v.data(), buf.data() + pos, n * 4);
    pos += n * 4;
    return v;
  }
};

struct RawEntry {
  Shape shape;
  std::vector<float> payload;
};

std::map<std::string, RawEntry> read_entries(const std::string& path) {
  Reader r(path);
  r.need(4, "magic");
  if (std::memcmp(r.buf.data(), kMagic, 4) != 0)
    throw WeightsError("bad magic in " + path + ": not a weight file");
  r.pos = 4;
  const std::uint16_t version = r.u16("version");
  if (version != kVersion)
    throw WeightsError("unsupported weight file version " + std::to_string(version));
  const std::uint32_t count = r.u32("entry count");
  std::map<std::string, RawEntry> entries;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t nlen = r.u16("name length");
    const std::string name = r.str(nlen, "name");
    if (entries.count(name)) throw WeightsError("duplicate tensor '" + name + "' in " + path);
    const std::uint8_t ndim = r.u8("rank");
    RawEntry e;
    std::uint64_t numel = 1;
    for (int d = 0; d < ndim; ++d) {
      const std::uint32_t ext = r.u32("dimension");
      if (ext == 0 || numel * ext > (1u << 30))
        throw WeightsError("implausible shape for tensor '" + name + "' in " + path);
      e.shape.push_back(static_cast<int>(ext));
      numel *= ext;
    }
    e.payload = r.f32s(static_cast<std::size_t>(numel), ("payload of '" + name + "'").c_str());
    entries.emplace(name, std::move(e));
  }
  if (r.pos != r.buf.size())
    throw WeightsError("trailing bytes after last entry in " + path);
  return entries;
}

ModelConfig config_from_entry(const RawEntry& e, const std::string& path) {
  if (e.payload.size() != 5)
    throw WeightsError("malformed __config__ entry in " + path);
  ModelConfig c;
  c.R = static_cast<int>(e.payload[0]);
  c.F = static_cast<int>(e.payload[1]);
  c.K = static_cast<int>(e.payload[2]);
  c.L = static_cast<int>(e.payload[3]);
  c.beta = static_cast<double>(e.payload[4]);
  c.preset = c.F == 16 && c.L == 1 ? "tiny" : (c.F == 64 && c.L == 2 ? "standard" : "custom");
  try {
    c.validate();
  } catch (const std::exception& ex) {
    throw WeightsError("invalid __config__ in " + path + ": " + ex.what());
  }
  return c;
}

}  // namespace

template <typename S>
void save_weights(const ModelParams<S>& params, const std::string& path) {
  std::string blob;
  blob.append(kMagic, 4);
  put_u16(blob, kVersion);

  std::vector<std::pair<std::string, Tensor<S>>> tensors;
  visit_params(const_cast<ModelParams<S>&>(params),
               [&](const std::string& n, Tensor<S>& t, ParamGroup) {
                 tensors.push_back({n, t});
               });
  put_u32(blob, static_cast<std::uint32_t>(tensors.size() + 1));

  const ModelConfig& c = params.config;
  put_u16(blob, static_cast<std::uint16_t>(std::strlen(kConfigEntry)));
  blob.append(kConfigEntry);
  blob.push_back(1);  // rank
  put_u32(blob, 5);
  for (float v : {static_cast<float>(c.R), static_cast<float>(c.F), static_cast<float>(c.K),
                  static_cast<float>(c.L), static_cast<float>(c.beta)})
    put_f32(blob, v);

  for (auto& [name, t] : tensors) {
    put_u16(blob, static_cast<std::uint16_t>(name.size()));
    blob.append(name);
    blob.push_back(static_cast<char>(t.ndim()));
    for (int d = 0; d < t.ndim(); ++d) put_u32(blob, static_cast<std::uint32_t>(t.dim(d)));
    for (S v : t.values()) put_f32(blob, static_cast<float>(v));
  }

  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw WeightsError("cannot open " + tmp + " for writing");
    os.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!os) throw WeightsError("write failed for " + path);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw WeightsError("cannot move temp weight file into place at " + path);
  }
}

ModelConfig read_weights_config(const std::string& path) {
  auto entries = read_entries(path);
  auto it = entries.find(kConfigEntry);
  if (it == entries.end()) throw WeightsError("missing __config__ entry in " + path);
  return config_from_entry(it->second, path);
}

template <typename S>
ModelParams<S> load_weights(const std::string& path, const ModelConfig& cfg,
                            bool allow_missing_rf, std::uint64_t rf_seed) {
  auto entries = read_entries(path);
  auto cit = entries.find(kConfigEntry);
  if (cit == entries.end()) throw WeightsError("missing __config__ entry in " + path);
  const ModelConfig file_cfg = config_from_entry(cit->second, path);
  if (!(file_cfg == cfg))
    throw WeightsError("weight file " + path + " holds a different architecture (R=" +
                       std::to_string(file_cfg.R) + ",F=" + std::to_string(file_cfg.F) +
                       ",K=" + std::to_string(file_cfg.K) + ",L=" + std::to_string(file_cfg.L) +
                       ")");
  entries.erase(cit);

  const bool file_has_rf = [&] {
    for (auto& [n, e] : entries)
      if (n.rfind("rf.", 0) == 0) return true;
    return false;
  }();
  if (!file_has_rf && !allow_missing_rf)
    throw WeightsError(path + " is a stage-1 checkpoint without recurrent-fusion tensors");

  ModelParams<S> params = init_params<S>(cfg, rf_seed, true);
  visit_params(params, [&](const std::string& name, Tensor<S>& t, ParamGroup g) {
    auto it = entries.find(name);
    if (it == entries.end()) {
      if (g == ParamGroup::Rf && !file_has_rf) return;  // keep fresh initialization
      throw WeightsError("weight file " + path + " is missing tensor '" + name + "'");
    }
    if (it->second.shape != t.shape())
      throw WeightsError("tensor '" + name + "' in " + path + " has shape " +
                         shape_str(it->second.shape) + ", expected " + shape_str(t.shape()));
    S* d = t.data();
    const std::vector<float>& src = it->second.payload;
    for (std::size_t i = 0; i < src.size(); ++i) d[i] = static_cast<S>(src[i]);
    entries.erase(it);
  });
  if (!entries.empty())
    throw WeightsError("unknown tensor '" + entries.begin()->first + "' in " + path);
  return params;
}

template void save_weights(const ModelParams<float>&, const std::string&);
template void save_weights(const ModelParams<double>&, const std::string&);
template ModelParams<float> load_weights(const std::string&, const ModelConfig&, bool,
                                         std::uint64_t);
template ModelParams<double> load_weights(const std::string&, const ModelConfig&, bool,
                                          std::uint64_t);

}  // namespace rfda
