#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "hgr/errors.hpp"
#include "hgr/version.hpp"

namespace hgrcli {

using json = nlohmann::json;

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file.is_open()) throw hgr::InputError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

// Every command emits one of these on stdout. The results payload is a pure
// function of (input bytes, config, seed); wall-clock timings live in their
// own field so byte comparisons can exclude them.
inline json envelope(const std::string& command, const std::string& input_sha256,
                     json config, json results, double total_ms) {
    json out;
    out["command"] = command;
    out["version"] = hgr::kVersion;
    out["input_sha256"] = input_sha256;
    out["config"] = std::move(config);
    out["results"] = std::move(results);
    out["timings_ms"] = json{{"total", total_ms}};
    return out;
}

}  // namespace hgrcli
