#include "motrack/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <vector>

#include "motrack/errors.hpp"

namespace motrack {
namespace {

constexpr std::array<char, 4> kMagic = {'M', 'T', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

struct Writer {
  std::vector<char> buf;

  void bytes(const void* p, std::size_t n) {
    const char* c = static_cast<const char*>(p);
    buf.insert(buf.end(), c, c + n);
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                 static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    bytes(b, 4);
  }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
};

struct Reader {
  const char* p;
  const char* end;

  void need(std::size_t n) const {
    if (static_cast<std::size_t>(end - p) < n) throw DataError("checkpoint: truncated file");
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(*p++);
  }
  std::uint32_t u32() {
    need(4);
    const unsigned char* b = reinterpret_cast<const unsigned char*>(p);
    p += 4;
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(p, p + n);
    p += n;
    return s;
  }
};

}  // namespace

std::uint32_t crc32(const void* data, std::size_t len) {
  static const std::array<std::uint32_t, 256> table = make_crc_table();
  std::uint32_t c = 0xFFFFFFFFu;
  const unsigned char* b = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) c = table[(c ^ b[i]) & 0xFFu] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  Writer w;
  w.bytes(kMagic.data(), kMagic.size());
  w.u32(kVersion);
  w.u8(static_cast<std::uint8_t>(ck.kind));

  w.u32(static_cast<std::uint32_t>(ck.meta.size()));
  for (const auto& [key, val] : ck.meta) {
    w.str(key);
    w.str(val);
  }

  w.u32(static_cast<std::uint32_t>(ck.params.size()));
  for (int i = 0; i < ck.params.size(); ++i) {
    const TensorT<float>& t = ck.params.at(i);
    w.str(ck.params.names[static_cast<std::size_t>(i)]);
    w.u32(static_cast<std::uint32_t>(t.ndim()));
    for (int d = 0; d < t.ndim(); ++d) w.u32(static_cast<std::uint32_t>(t.dim(d)));
    for (std::int64_t k = 0; k < t.numel(); ++k) w.f32(t[k]);
  }

  w.u32(crc32(w.buf.data(), w.buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint: cannot open for writing: " + path);
  out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
  if (!out) throw DataError("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path, std::optional<CheckpointKind> expect) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open: " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < kMagic.size() + 4) throw DataError("checkpoint: truncated file");
  const std::size_t body = buf.size() - 4;
  Reader tail{buf.data() + body, buf.data() + buf.size()};
  const std::uint32_t stored_crc = tail.u32();
  if (crc32(buf.data(), body) != stored_crc) throw DataError("checkpoint: checksum mismatch");

  Reader r{buf.data(), buf.data() + body};
  char magic[4];
  r.need(4);
  std::memcpy(magic, r.p, 4);
  r.p += 4;
  if (std::memcmp(magic, kMagic.data(), 4) != 0) throw DataError("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw DataError("checkpoint: unsupported version " + std::to_string(version));

  Checkpoint ck;
  const std::uint8_t kind = r.u8();
  if (kind > 1) throw DataError("checkpoint: unknown model kind " + std::to_string(kind));
  ck.kind = static_cast<CheckpointKind>(kind);
  if (expect && ck.kind != *expect) throw DataError("checkpoint: wrong model kind for this use");

  const std::uint32_t n_meta = r.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string key = r.str();
    std::string val = r.str();
    ck.meta.emplace(std::move(key), std::move(val));
  }

  const std::uint32_t n_tensors = r.u32();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    const std::string name = r.str();
    const std::uint32_t ndim = r.u32();
    if (ndim < 1 || ndim > 3) throw DataError("checkpoint: tensor rank out of range");
    std::vector<int> shape;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      const std::uint32_t extent = r.u32();
      if (extent == 0 || extent > (1u << 24)) throw DataError("checkpoint: bad tensor extent");
      shape.push_back(static_cast<int>(extent));
    }
    TensorT<float> t(shape);
    for (std::int64_t k = 0; k < t.numel(); ++k) t[k] = r.f32();
    ck.params.add(name, std::move(t));
  }
  if (r.p != r.end) throw DataError("checkpoint: trailing bytes");
  return ck;
}

int meta_int(const Checkpoint& ck, const std::string& key) {
  auto it = ck.meta.find(key);
  if (it == ck.meta.end()) throw DataError("checkpoint: missing metadata key: " + key);
  try {
    std::size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DataError("checkpoint: metadata key is not an integer: " + key);
  }
}

}  // namespace motrack
