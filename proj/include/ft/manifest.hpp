#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ft::pipeline {

uint64_t fnv1a_bytes(const std::string& bytes);

// record of one CLI run; written even when the run fails
struct RunManifest {
  std::string command;
  std::string status = "ok";
  std::string error;
  std::string config_path;
  uint64_t config_hash = 0;
  bool has_config = false;
  uint64_t seed = 0;
  std::string backend;
  std::vector<std::pair<std::string, std::string>> notes;
  std::vector<std::pair<std::string, uint64_t>> files;

  void note(const std::string& key, const std::string& value);
  // hashes the file at path; label is the name recorded in the manifest
  void add_file(const std::string& label, const std::string& path);
};

std::string format_manifest(const RunManifest& m);
void write_manifest(const RunManifest& m, const std::string& path);

}  // namespace ft::pipeline
