#include "mdaudit/codec.hpp"

#include <openssl/evp.h>

#include <memory>
#include <vector>

#include "mdaudit/error.hpp"

namespace mdaudit {

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

std::string base64_encode(std::string_view bytes) {
    if (bytes.empty()) return {};
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(bytes.data()),
                            static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string base64_decode(std::string_view text) {
    std::unique_ptr<EVP_ENCODE_CTX, decltype(&EVP_ENCODE_CTX_free)> ctx(EVP_ENCODE_CTX_new(),
                                                                        EVP_ENCODE_CTX_free);
    if (!ctx) throw Error("EVP_ENCODE_CTX_new failed");
    EVP_DecodeInit(ctx.get());
    std::string out(text.size() / 4 * 3 + 4, '\0');
    int n1 = 0;
    int rc = EVP_DecodeUpdate(ctx.get(), reinterpret_cast<unsigned char*>(out.data()), &n1,
                              reinterpret_cast<const unsigned char*>(text.data()),
                              static_cast<int>(text.size()));
    if (rc < 0) throw ParseError("malformed base64");
    int n2 = 0;
    if (EVP_DecodeFinal(ctx.get(), reinterpret_cast<unsigned char*>(out.data()) + n1, &n2) < 0)
        throw ParseError("malformed base64 (bad final block)");
    out.resize(static_cast<std::size_t>(n1 + n2));
    // EVP_DecodeUpdate tolerates a truncated final quantum; reject it here
    std::size_t sig = 0;
    for (char c : text)
        if (c != '\n' && c != '\r' && c != ' ' && c != '\t') ++sig;
    if (sig % 4 != 0) throw ParseError("malformed base64 (length)");
    return out;
}

}  // namespace mdaudit
