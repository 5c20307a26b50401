#ifndef NAT_UTF8_HPP
#define NAT_UTF8_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace nat::utf8 {

// Decodes a UTF-8 string into code points. Invalid bytes are passed through
// one byte per code point so round-tripping never loses data.
std::vector<char32_t> decode(const std::string& s);

std::string encode(const std::vector<char32_t>& cps);
std::string encode_one(char32_t cp);

std::size_t length(const std::string& s);

}  // namespace nat::utf8

#endif  // NAT_UTF8_HPP
