// Run manifests: every CLI run records its command, configuration, seed and
// input/output hashes beside its outputs, so any result can be reproduced.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cleki {

uint64_t fnv1a64_file(const std::string& path);
std::string hex64(uint64_t value);

struct Manifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> arguments;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

// Writes <out_dir>/manifest.json with hashes of all listed files.
void write_manifest(const Manifest& manifest, const std::string& out_dir);

}  // namespace cleki
