#include "spt/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace spt {

void save_checkpoint(const std::string& prefix, const EncoderConfig& config,
                     EncoderParams& params) {
    std::ofstream bin(prefix + ".bin", std::ios::binary);
    check(bin.good(), "cannot write " + prefix + ".bin");
    nlohmann::json manifest = nlohmann::json::array();
    size_t offset = 0;
    for_each_param(config, params, [&](const std::string& name, Mat& m) {
        manifest.push_back({{"name", name},
                            {"shape", {m.rows, m.cols}},
                            {"dtype", "float32"},
                            {"offset", offset}});
        std::vector<float> buf(m.v.size());
        for (size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(m.v[i]);
        bin.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(float)));
        offset += buf.size() * sizeof(float);
    });
    check(bin.good(), "write failed: " + prefix + ".bin");
    std::ofstream js(prefix + ".json");
    check(js.good(), "cannot write " + prefix + ".json");
    js << manifest.dump(2) << "\n";
}

void load_checkpoint(const std::string& prefix, const EncoderConfig& config,
                     EncoderParams& params) {
    std::ifstream js(prefix + ".json");
    check(js.good(), "cannot open " + prefix + ".json");
    nlohmann::json manifest = nlohmann::json::parse(js);
    std::ifstream bin(prefix + ".bin", std::ios::binary);
    check(bin.good(), "cannot open " + prefix + ".bin");
    size_t idx = 0;
    for_each_param(config, params, [&](const std::string& name, Mat& m) {
        check(idx < manifest.size(), "manifest too short in " + prefix + ".json");
        const auto& entry = manifest[idx++];
        check(entry["name"] == name, "tensor name mismatch: expected " + name);
        check(entry["shape"][0] == m.rows && entry["shape"][1] == m.cols,
              "tensor shape mismatch for " + name);
        check(entry["dtype"] == "float32", "unsupported dtype for " + name);
        bin.seekg(static_cast<std::streamoff>(entry["offset"].get<size_t>()));
        std::vector<float> buf(m.v.size());
        bin.read(reinterpret_cast<char*>(buf.data()),
                 static_cast<std::streamsize>(buf.size() * sizeof(float)));
        check(bin.good(), "payload truncated for " + name);
        for (size_t i = 0; i < buf.size(); ++i) m.v[i] = buf[i];
    });
    check(idx == manifest.size(), "manifest has extra tensors");
}

void write_kv_file(const std::string& path,
                   const std::map<std::string, std::string>& kv) {
    std::ofstream f(path);
    check(f.good(), "cannot write " + path);
    for (const auto& [k, v] : kv) f << k << "=" << v << "\n";
}

std::map<std::string, std::string> read_kv_file(const std::string& path) {
    std::ifstream f(path);
    check(f.good(), "cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        check(eq != std::string::npos, "malformed line in " + path + ": " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

}  // namespace spt
