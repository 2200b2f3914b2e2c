#include "config.hpp"

#include <openssl/evp.h>

namespace nsnn::cli {

json parse_config_text(std::string_view text, const std::string& source)
{
    try
    {
        return json::parse(text.begin(), text.end(), nullptr, true, true);
    }
    catch (const json::parse_error& e)
    {
        std::size_t line = 1, col = 1;
        const std::size_t end = e.byte == 0 ? 0 : e.byte - 1;
        for (std::size_t i = 0; i < end && i < text.size(); ++i)
        {
            if (text[i] == '\n')
            {
                ++line;
                col = 1;
            }
            else
            {
                ++col;
            }
        }
        throw ParseError(source + ": line " + std::to_string(line) + ", column " + std::to_string(col),
                         "malformed JSON");
    }
}

std::string config_hash(const json& doc)
{
    const std::string text = doc.dump();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < 8 && i < len; ++i)
    {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

} // namespace nsnn::cli
