#pragma once

// Download + checksum + extraction helpers for the fetch-ucihar command.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <openssl/evp.h>
#include <zlib.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "msle/error.hpp"

namespace msle::fetch {

namespace fs = std::filesystem;

inline std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_data("LayoutNotFound", "cannot open " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw_numeric("NoConvergence", "sha256 init failed");
    }
    std::vector<char> buf(1 << 20);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        const std::streamsize got = in.gcount();
        if (got > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<size_t>(got));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

namespace detail {

inline std::uint16_t rd16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t rd32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::vector<unsigned char> inflate_raw(const unsigned char* src, size_t src_len,
                                              size_t out_len) {
    std::vector<unsigned char> out(out_len);
    z_stream strm{};
    if (inflateInit2(&strm, -MAX_WBITS) != Z_OK)
        throw_numeric("NoConvergence", "inflate init failed");
    strm.next_in = const_cast<unsigned char*>(src);
    strm.avail_in = static_cast<uInt>(src_len);
    strm.next_out = out.data();
    strm.avail_out = static_cast<uInt>(out_len);
    const int rc = inflate(&strm, Z_FINISH);
    inflateEnd(&strm);
    if (rc != Z_STREAM_END)
        throw_data("ShapeMismatch", "zip entry: deflate stream corrupt");
    out.resize(out_len - strm.avail_out);
    return out;
}

} // namespace detail

/// Minimal ZIP extraction supporting stored (0) and deflate (8) methods.
/// Entry names containing ".." are rejected.
inline void extract_zip(const std::string& zip_path, const std::string& dest_dir) {
    std::ifstream in(zip_path, std::ios::binary);
    if (!in) throw_data("LayoutNotFound", "cannot open " + zip_path);
    std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (data.size() < 22) throw_data("ShapeMismatch", zip_path + ": not a zip archive");

    // end-of-central-directory: scan backwards over the trailing comment
    size_t eocd = std::string::npos;
    const size_t lo = data.size() >= 22 + 65535 ? data.size() - 22 - 65535 : 0;
    for (size_t i = data.size() - 22 + 1; i-- > lo;) {
        if (data[i] == 0x50 && data[i + 1] == 0x4b && data[i + 2] == 0x05 && data[i + 3] == 0x06) {
            eocd = i;
            break;
        }
    }
    if (eocd == std::string::npos)
        throw_data("ShapeMismatch", zip_path + ": zip end record missing");
    const std::uint16_t entries = detail::rd16(&data[eocd + 10]);
    std::uint32_t cdir = detail::rd32(&data[eocd + 16]);

    for (std::uint16_t e = 0; e < entries; ++e) {
        if (cdir + 46 > data.size() || detail::rd32(&data[cdir]) != 0x02014b50)
            throw_data("ShapeMismatch", zip_path + ": central directory corrupt");
        const std::uint16_t method = detail::rd16(&data[cdir + 10]);
        const std::uint32_t csize = detail::rd32(&data[cdir + 20]);
        const std::uint32_t usize = detail::rd32(&data[cdir + 24]);
        const std::uint16_t nlen = detail::rd16(&data[cdir + 28]);
        const std::uint16_t xlen = detail::rd16(&data[cdir + 30]);
        const std::uint16_t clen = detail::rd16(&data[cdir + 32]);
        const std::uint32_t lho = detail::rd32(&data[cdir + 42]);
        const std::string name(reinterpret_cast<const char*>(&data[cdir + 46]), nlen);
        cdir += 46u + nlen + xlen + clen;

        if (name.find("..") != std::string::npos)
            throw_data("ShapeMismatch", zip_path + ": unsafe entry name " + name);
        const fs::path target = fs::path(dest_dir) / name;
        if (!name.empty() && name.back() == '/') {
            fs::create_directories(target);
            continue;
        }
        if (lho + 30 > data.size() || detail::rd32(&data[lho]) != 0x04034b50)
            throw_data("ShapeMismatch", zip_path + ": local header corrupt for " + name);
        const std::uint16_t lnlen = detail::rd16(&data[lho + 26]);
        const std::uint16_t lxlen = detail::rd16(&data[lho + 28]);
        const size_t off = static_cast<size_t>(lho) + 30 + lnlen + lxlen;
        if (off + csize > data.size())
            throw_data("ShapeMismatch", zip_path + ": truncated entry " + name);

        std::vector<unsigned char> content;
        if (method == 0) {
            content.assign(data.begin() + static_cast<std::ptrdiff_t>(off),
                           data.begin() + static_cast<std::ptrdiff_t>(off + csize));
        } else if (method == 8) {
            content = detail::inflate_raw(&data[off], csize, usize);
        } else {
            throw_data("ShapeMismatch",
                       zip_path + ": unsupported compression method " + std::to_string(method) +
                           " for " + name);
        }
        fs::create_directories(target.parent_path());
        std::ofstream out(target, std::ios::binary);
        out.write(reinterpret_cast<const char*>(content.data()),
                  static_cast<std::streamsize>(content.size()));
        if (!out) throw_data("LayoutNotFound", "cannot write " + target.string());
    }
}

/// HTTPS/HTTP download with redirects, streaming to dest_path.
inline void download(const std::string& url, const std::string& dest_path, bool verify_tls) {
    std::string scheme, host, path;
    {
        const size_t ss = url.find("://");
        if (ss == std::string::npos) throw_config("ConfigInvalid", "bad url: " + url);
        scheme = url.substr(0, ss);
        const size_t hs = ss + 3;
        const size_t pe = url.find('/', hs);
        host = url.substr(hs, pe == std::string::npos ? std::string::npos : pe - hs);
        path = pe == std::string::npos ? "/" : url.substr(pe);
    }
    std::ofstream out(dest_path, std::ios::binary);
    if (!out) throw_data("LayoutNotFound", "cannot write " + dest_path);
    auto sink = [&](const char* p, size_t n) {
        out.write(p, static_cast<std::streamsize>(n));
        return static_cast<bool>(out);
    };

    httplib::Result res{nullptr, httplib::Error::Unknown};
    if (scheme == "https") {
        httplib::SSLClient cli(host);
        cli.set_follow_location(true);
        cli.enable_server_certificate_verification(verify_tls);
        cli.set_connection_timeout(30);
        cli.set_read_timeout(300);
        res = cli.Get(path, sink);
    } else if (scheme == "http") {
        httplib::Client cli(host);
        cli.set_follow_location(true);
        cli.set_connection_timeout(30);
        cli.set_read_timeout(300);
        res = cli.Get(path, sink);
    } else {
        throw_config("ConfigInvalid", "unsupported scheme '" + scheme + "'");
    }
    if (!res)
        throw_data("LayoutNotFound",
                   "download failed: " + httplib::to_string(res.error()) + " (" + url + ")");
    if (res->status != 200)
        throw_data("LayoutNotFound",
                   "download failed: HTTP " + std::to_string(res->status) + " (" + url + ")");
    out.close();
}

} // namespace msle::fetch
