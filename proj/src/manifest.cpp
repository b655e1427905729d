#include "ft/manifest.hpp"

#include <cstdio>

#include "ft/csvio.hpp"

namespace ft::pipeline {

uint64_t fnv1a_bytes(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void RunManifest::note(const std::string& key, const std::string& value) {
  notes.emplace_back(key, value);
}

void RunManifest::add_file(const std::string& label, const std::string& path) {
  files.emplace_back(label, fnv1a_bytes(read_text_file(path)));
}

namespace {
std::string hex16(uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a:%016llx", static_cast<unsigned long long>(v));
  return buf;
}
}  // namespace

std::string format_manifest(const RunManifest& m) {
  std::string out;
  out += "command=" + m.command + "\n";
  out += "status=" + m.status + "\n";
  if (!m.error.empty()) out += "error=" + m.error + "\n";
  if (m.has_config) {
    out += "config=" + m.config_path + "\n";
    out += "config_hash=" + hex16(m.config_hash) + "\n";
  }
  out += "seed=" + std::to_string(m.seed) + "\n";
  out += "backend=" + m.backend + "\n";
  for (const auto& [k, v] : m.notes) out += "note " + k + "=" + v + "\n";
  for (const auto& [label, hash] : m.files)
    out += "file=" + label + " " + hex16(hash) + "\n";
  return out;
}

void write_manifest(const RunManifest& m, const std::string& path) {
  write_text_file(path, format_manifest(m));
}

}  // namespace ft::pipeline
