#include "cleki/manifest.hpp"

#include <fstream>
#include <sstream>

#include "cleki/errors.hpp"

#include <json.hpp>

namespace cleki {

uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot hash missing file: " + path);
  uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof(buf));
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  return hash;
}

std::string hex64(uint64_t value) {
  std::ostringstream os;
  os << std::hex << value;
  return os.str();
}

void write_manifest(const Manifest& manifest, const std::string& out_dir) {
  nlohmann::json doc;
  doc["command"] = manifest.command;
  auto& args = doc["arguments"];
  for (const auto& [key, value] : manifest.arguments) args[key] = value;
  auto& inputs = doc["inputs"];
  inputs = nlohmann::json::object();
  for (const auto& path : manifest.inputs) inputs[path] = "fnv1a64:" + hex64(fnv1a64_file(path));
  auto& outputs = doc["outputs"];
  outputs = nlohmann::json::object();
  for (const auto& path : manifest.outputs)
    outputs[path] = "fnv1a64:" + hex64(fnv1a64_file(path));

  const std::string path = out_dir + "/manifest.json";
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest: " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace cleki
