#include "anchorprobe/tensor_store.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "anchorprobe/error.hpp"
#include "anchorprobe/json_io.hpp"

namespace anchorprobe {

namespace fs = std::filesystem;

namespace {

void put_u16(std::array<unsigned char, kTensorHeaderBytes>& buf, std::size_t at, std::uint16_t v) {
  buf[at] = static_cast<unsigned char>(v & 0xFF);
  buf[at + 1] = static_cast<unsigned char>(v >> 8);
}

void put_u32(std::array<unsigned char, kTensorHeaderBytes>& buf, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf[at + i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

// Converts a block of float32 between host and little-endian byte order in place.
void to_from_little_endian(std::span<float> values) {
  if constexpr (std::endian::native == std::endian::big) {
    for (float& f : values) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, sizeof bits);
      bits = __builtin_bswap32(bits);
      std::memcpy(&f, &bits, sizeof bits);
    }
  }
}

TensorHeader parse_header(std::istream& in, const fs::path& path) {
  std::array<unsigned char, kTensorHeaderBytes> buf{};
  in.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
    throw FormatError(path.string() + ": truncated header");
  }
  if (std::memcmp(buf.data(), kTensorMagic, 4) != 0) {
    throw FormatError(path.string() + ": bad magic (expected APT1)");
  }
  TensorHeader h;
  h.version = static_cast<std::uint16_t>(buf[4] | (buf[5] << 8));
  if (h.version != kTensorVersion) {
    throw FormatError(path.string() + ": unsupported version " + std::to_string(h.version));
  }
  h.layers = get_u32(&buf[6]);
  h.samples = get_u32(&buf[10]);
  h.dim = get_u32(&buf[14]);
  if (h.layers == 0 || h.samples == 0 || h.dim == 0) {
    throw FormatError(path.string() + ": zero dimension in header");
  }
  return h;
}

std::uintmax_t payload_bytes(const TensorHeader& h) {
  return static_cast<std::uintmax_t>(h.layers) * h.samples * h.dim * sizeof(float);
}

void check_size(const fs::path& path, const TensorHeader& h) {
  const auto expected = kTensorHeaderBytes + payload_bytes(h);
  const auto actual = fs::file_size(path);
  if (actual != expected) {
    throw FormatError(path.string() + ": size " + std::to_string(actual) + " bytes, header implies " +
                      std::to_string(expected));
  }
}

void check_finite(std::span<const float> values, const std::string& where) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw ValidationError(where + ": non-finite value at flat index " + std::to_string(i));
    }
  }
}

}  // namespace

LayerTensorSet::LayerTensorSet(std::size_t layers, std::size_t samples, std::size_t dim,
                               Pooling pooling)
    : layers_(layers), samples_(samples), dim_(dim), pooling_(pooling),
      values_(layers * samples * dim, 0.0f) {}

LayerTensorSet::LayerTensorSet(std::size_t layers, std::size_t samples, std::size_t dim,
                               std::vector<float> values, Pooling pooling)
    : layers_(layers), samples_(samples), dim_(dim), pooling_(pooling), values_(std::move(values)) {
  if (values_.size() != layers * samples * dim) {
    throw ValidationError("tensor value count does not match L*N*D");
  }
}

Eigen::Map<const RowMatrixF> LayerTensorSet::layer(std::size_t l) const {
  if (l >= layers_) throw DomainError("layer " + std::to_string(l) + " out of range");
  return {values_.data() + l * samples_ * dim_, static_cast<Eigen::Index>(samples_),
          static_cast<Eigen::Index>(dim_)};
}

Eigen::Map<RowMatrixF> LayerTensorSet::layer(std::size_t l) {
  if (l >= layers_) throw DomainError("layer " + std::to_string(l) + " out of range");
  return {values_.data() + l * samples_ * dim_, static_cast<Eigen::Index>(samples_),
          static_cast<Eigen::Index>(dim_)};
}

void LayerTensorSet::validate() const {
  if (layers_ == 0 || samples_ == 0 || dim_ == 0) throw ValidationError("tensor has a zero dimension");
  if (values_.size() != layers_ * samples_ * dim_) throw ValidationError("tensor size mismatch");
  check_finite(values_, "tensor");
}

fs::path sidecar_path(const fs::path& tensor_path) {
  fs::path p = tensor_path;
  p.replace_extension(".manifest.jsonl");
  return p;
}

void write_tensors(const LayerTensorSet& set, std::span<const SampleRecord> manifest,
                   const fs::path& path) {
  set.validate();
  if (manifest.size() != set.samples()) {
    throw ValidationError("manifest has " + std::to_string(manifest.size()) + " records but N = " +
                          std::to_string(set.samples()));
  }
  for (const auto& r : manifest) r.validate();
  if (set.layers() > UINT32_MAX || set.samples() > UINT32_MAX || set.dim() > UINT32_MAX) {
    throw ValidationError("tensor dimension exceeds u32");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());

  std::array<unsigned char, kTensorHeaderBytes> header{};
  std::memcpy(header.data(), kTensorMagic, 4);
  put_u16(header, 4, kTensorVersion);
  put_u32(header, 6, static_cast<std::uint32_t>(set.layers()));
  put_u32(header, 10, static_cast<std::uint32_t>(set.samples()));
  put_u32(header, 14, static_cast<std::uint32_t>(set.dim()));

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(header.data()), header.size());
    if constexpr (std::endian::native == std::endian::little) {
      out.write(reinterpret_cast<const char*>(set.values().data()),
                static_cast<std::streamsize>(set.values().size() * sizeof(float)));
    } else {
      std::vector<float> swapped(set.values().begin(), set.values().end());
      to_from_little_endian(swapped);
      out.write(reinterpret_cast<const char*>(swapped.data()),
                static_cast<std::streamsize>(swapped.size() * sizeof(float)));
    }
    if (!out) throw Error("write failed: " + path.string());
  }

  std::ofstream side(sidecar_path(path), std::ios::binary | std::ios::trunc);
  if (!side) throw Error("cannot write " + sidecar_path(path).string());
  for (const auto& r : manifest) {
    Json j = to_json(r);
    j["pooling"] = to_string(set.pooling());
    side << j.dump() << '\n';
  }
}

TensorHeader read_header(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  TensorHeader h = parse_header(in, path);
  check_size(path, h);
  return h;
}

std::vector<SampleRecord> read_manifest(const fs::path& tensor_path, Pooling* pooling) {
  const fs::path side = sidecar_path(tensor_path);
  std::ifstream in(side, std::ios::binary);
  if (!in) throw FormatError("missing manifest sidecar " + side.string());
  std::vector<SampleRecord> records;
  std::string line;
  std::size_t line_no = 0;
  std::optional<Pooling> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(side.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    records.push_back(sample_record_from_json(j));
    records.back().validate();
    if (j.contains("pooling")) {
      const Pooling p = parse_pooling(j["pooling"].get<std::string>());
      if (seen && *seen != p) throw FormatError(side.string() + ": mixed pooling tags");
      seen = p;
    }
  }
  if (pooling) *pooling = seen.value_or(Pooling::last_token);
  return records;
}

TensorFile read_tensors(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  const TensorHeader h = parse_header(in, path);
  check_size(path, h);
  std::vector<float> values(static_cast<std::size_t>(h.layers) * h.samples * h.dim);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!in) throw FormatError(path.string() + ": truncated payload");
  to_from_little_endian(values);
  check_finite(values, path.string());

  Pooling pooling{};
  TensorFile out;
  out.manifest = read_manifest(path, &pooling);
  if (out.manifest.size() != h.samples) {
    throw ValidationError(path.string() + ": manifest has " + std::to_string(out.manifest.size()) +
                          " records, header N = " + std::to_string(h.samples));
  }
  out.tensors = LayerTensorSet(h.layers, h.samples, h.dim, std::move(values), pooling);
  return out;
}

LayerBlock read_layer(const fs::path& path, std::size_t layer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  const TensorHeader h = parse_header(in, path);
  if (layer >= h.layers) {
    throw DomainError("layer " + std::to_string(layer) + " out of range (L = " +
                      std::to_string(h.layers) + ")");
  }
  check_size(path, h);
  const std::uintmax_t block = static_cast<std::uintmax_t>(h.samples) * h.dim;
  in.seekg(static_cast<std::streamoff>(kTensorHeaderBytes + layer * block * sizeof(float)));
  LayerBlock out;
  out.matrix.resize(h.samples, h.dim);
  in.read(reinterpret_cast<char*>(out.matrix.data()), static_cast<std::streamsize>(block * sizeof(float)));
  if (!in) throw FormatError(path.string() + ": truncated payload");
  to_from_little_endian({out.matrix.data(), static_cast<std::size_t>(block)});
  check_finite({out.matrix.data(), static_cast<std::size_t>(block)}, path.string());
  out.manifest = read_manifest(path, &out.pooling);
  if (out.manifest.size() != h.samples) throw ValidationError(path.string() + ": manifest/N mismatch");
  return out;
}

}  // namespace anchorprobe
