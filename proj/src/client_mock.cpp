#include <fstream>

#include <openssl/evp.h>

#include "rephrasecal/client.hpp"

namespace rephrasecal {

std::string prompt_hash(std::string_view prompt) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(prompt.data(), prompt.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("prompt_hash: SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

MockBackend MockBackend::load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mock fixtures " + path);
  MockBackend mock;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      std::string completion = j.at("completion").get<std::string>();
      if (j.contains("promptHash")) {
        mock.add_hash(j["promptHash"].get<std::string>(), std::move(completion));
      } else {
        mock.add(j.at("prompt").get<std::string>(), std::move(completion));
      }
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return mock;
}

void MockBackend::add(std::string_view prompt, std::string completion) {
  add_hash(prompt_hash(prompt), std::move(completion));
}

void MockBackend::add_hash(std::string hash, std::string completion) {
  fixtures_[std::move(hash)].push_back(std::move(completion));
}

std::string MockBackend::complete(const CompletionRequest& req) {
  const auto hash = prompt_hash(req.prompt);
  const auto it = fixtures_.find(hash);
  if (it == fixtures_.end()) throw FixtureMissing("mock backend: no fixture for prompt " + hash);
  const auto& options = it->second;
  return options[req.seed.value_or(0) % options.size()];
}

}  // namespace rephrasecal
