#include "zsr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "zsr/checksum.hpp"

static_assert(std::endian::native == std::endian::little, "checkpoint blobs assume little-endian hosts");

namespace zsr {
namespace {

constexpr const char* kMagic = "zsr-checkpoint 1";

std::string join_dims(const std::vector<int>& dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(dims[i]);
  }
  return s;
}

std::vector<int> split_dims(const std::string& s) {
  std::vector<int> dims;
  std::istringstream in(s);
  std::string part;
  while (std::getline(in, part, 'x')) dims.push_back(std::stoi(part));
  return dims;
}

std::size_t product(const std::vector<int>& dims) {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

}  // namespace

std::string tensor_checksum(const std::vector<float>& values) {
  return sha256_hex(std::as_bytes(std::span<const float>(values)));
}

void Checkpoint::add_tensor(const std::string& name, std::vector<int> dims, std::vector<float> values) {
  if (product(dims) != values.size()) throw CheckpointError("tensor " + name + ": dims disagree with size");
  if (blobs.contains(name)) throw CheckpointError("duplicate tensor " + name);
  manifest.tensors.push_back({name, std::move(dims), tensor_checksum(values)});
  blobs.emplace(name, std::move(values));
}

const std::vector<float>& Checkpoint::blob(const std::string& name) const {
  auto it = blobs.find(name);
  if (it == blobs.end()) throw CheckpointError("checkpoint has no tensor " + name);
  return it->second;
}

std::string serialize_manifest(const CheckpointManifest& m) {
  std::ostringstream out;
  out << kMagic << "\n";
  out << "iteration " << m.iteration << "\n";
  out << "seed " << m.seed << "\n";
  for (const auto& n : m.networks) out << "network " << n.id << " " << n.descriptor << "\n";
  for (const auto& t : m.tensors) out << "tensor " << t.name << " " << join_dims(t.dims) << " " << t.sha256 << "\n";
  std::istringstream cfg(serialize_config(m.config));
  std::string line;
  while (std::getline(cfg, line)) out << "config " << line << "\n";
  return out.str();
}

CheckpointManifest parse_manifest(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw CheckpointError("manifest: bad header");
  CheckpointManifest m;
  std::string cfg_text;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "iteration") {
      ls >> m.iteration;
    } else if (tag == "seed") {
      ls >> m.seed;
    } else if (tag == "network") {
      NetworkRecord n;
      ls >> n.id;
      std::getline(ls >> std::ws, n.descriptor);
      m.networks.push_back(std::move(n));
    } else if (tag == "tensor") {
      TensorRecord t;
      std::string dims;
      ls >> t.name >> dims >> t.sha256;
      t.dims = split_dims(dims);
      m.tensors.push_back(std::move(t));
    } else if (tag == "config") {
      cfg_text += line.substr(7) + "\n";
    } else {
      throw CheckpointError("manifest: unknown entry '" + tag + "'");
    }
    if (ls.fail() && tag != "network") throw CheckpointError("manifest: malformed line '" + line + "'");
  }
  m.config = parse_config(cfg_text);
  return m;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& t : ckpt.manifest.tensors) {
    const auto& values = ckpt.blob(t.name);
    std::ofstream out(dir / (t.name + ".bin"), std::ios::binary);
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(float)));
    if (!out) throw CheckpointError("cannot write blob " + t.name);
  }
  std::ofstream out(dir / "manifest.txt", std::ios::binary);
  out << serialize_manifest(ckpt.manifest);
  if (!out) throw CheckpointError("cannot write manifest in " + dir.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.txt", std::ios::binary);
  if (!in) throw CheckpointError("no checkpoint manifest in " + dir.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Checkpoint ckpt;
  ckpt.manifest = parse_manifest(ss.str());
  for (const auto& t : ckpt.manifest.tensors) {
    const auto path = dir / (t.name + ".bin");
    std::ifstream blob(path, std::ios::binary);
    if (!blob) throw CheckpointError("missing blob " + path.string());
    std::vector<float> values(product(t.dims));
    blob.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(float)));
    if (blob.gcount() != static_cast<std::streamsize>(values.size() * sizeof(float)) || blob.peek() != EOF) {
      throw CheckpointError("blob size mismatch for " + t.name);
    }
    if (tensor_checksum(values) != t.sha256) throw CheckpointError("checksum mismatch for " + t.name);
    ckpt.blobs.emplace(t.name, std::move(values));
  }
  return ckpt;
}

}  // namespace zsr
