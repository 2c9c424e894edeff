#pragma once

#include <map>
#include <string>

#include "spt/encoder.hpp"

namespace spt {

// Writes <prefix>.bin (float32 little-endian payload, params in visitation
// order) and <prefix>.json (per-tensor name, shape, dtype, byte offset).
void save_checkpoint(const std::string& prefix, const EncoderConfig& config,
                     EncoderParams& params);

// Loads into a params struct already shaped for `config`; verifies the
// manifest agrees on names, shapes and offsets.
void load_checkpoint(const std::string& prefix, const EncoderConfig& config,
                     EncoderParams& params);

// key=value text files (config echoes, run manifests).
void write_kv_file(const std::string& path,
                   const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> read_kv_file(const std::string& path);

}  // namespace spt
