#include "actgan/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "actgan/util.hpp"

namespace actgan {

namespace {

void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

struct Reader {
  const std::string& buf;
  size_t pos = 0;

  void need(size_t n, const char* what) {
    if (pos + n > buf.size())
      fail_invalid(std::string("checkpoint: truncated while reading ") + what);
  }
  uint16_t u16(const char* what) {
    need(2, what);
    uint16_t v = static_cast<uint8_t>(buf[pos]) | (static_cast<uint16_t>(static_cast<uint8_t>(buf[pos + 1])) << 8);
    pos += 2;
    return v;
  }
  uint32_t u32(const char* what) {
    need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64(const char* what) {
    need(8, what);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
};

}  // namespace

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::string out;
  out += "ACTG";
  put_u16(out, ckpt.version);
  put_u64(out, ckpt.config_digest);
  put_u32(out, static_cast<uint32_t>(ckpt.blobs.size()));
  for (const auto& b : ckpt.blobs) {
    if (b.name.size() > 0xFFFF) fail_invalid("checkpoint: blob name too long: " + b.name);
    put_u16(out, static_cast<uint16_t>(b.name.size()));
    out += b.name;
    put_u64(out, b.values.size());
    for (float v : b.values) {
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      put_u32(out, bits);
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail_runtime("checkpoint: cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail_runtime("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail_runtime("checkpoint: cannot open: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r{buf};
  r.need(4, "magic");
  if (buf.compare(0, 4, "ACTG") != 0) fail_invalid("checkpoint: bad magic in " + path);
  r.pos = 4;
  Checkpoint ckpt;
  ckpt.version = r.u16("version");
  if (ckpt.version != 1)
    fail_invalid("checkpoint: unsupported version " + std::to_string(ckpt.version));
  ckpt.config_digest = r.u64("config digest");
  const uint32_t n = r.u32("blob count");
  ckpt.blobs.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    CheckpointBlob b;
    const uint16_t name_len = r.u16("blob name length");
    r.need(name_len, "blob name");
    b.name.assign(buf, r.pos, name_len);
    r.pos += name_len;
    const uint64_t count = r.u64("blob length");
    r.need(count * 4, "blob payload");
    b.values.resize(count);
    for (uint64_t j = 0; j < count; ++j) {
      const uint32_t bits = r.u32("blob value");
      float v;
      std::memcpy(&v, &bits, 4);
      b.values[j] = v;
    }
    ckpt.blobs.push_back(std::move(b));
  }
  if (r.pos != buf.size()) fail_invalid("checkpoint: trailing bytes in " + path);
  return ckpt;
}

}  // namespace actgan
