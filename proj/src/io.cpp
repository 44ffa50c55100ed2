#include "gcm/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gcm {

void save_tensor_text(const std::string& path, const Tensor& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << "shape:";
    for (std::size_t d : t.shape()) out << " " << d;
    out << "\n";

    const std::size_t row = t.rank() == 0 ? 1 : t.shape().back();
    char buf[40];
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.9g", t[i]);
        out << buf;
        out << ((i + 1) % row == 0 ? "\n" : " ");
    }
    if (!out) throw ParseError(path + ": write failed");
}

Tensor load_tensor_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::string header;
    if (!std::getline(in, header)) throw ParseError(path + ": empty tensor file");
    if (header.rfind("shape:", 0) != 0) throw ParseError(path + ": missing 'shape:' header");

    std::istringstream hs(header.substr(6));
    std::vector<std::size_t> shape;
    long d;
    while (hs >> d) {
        if (d <= 0) throw ParseError(path + ": non-positive dimension in header");
        shape.push_back(static_cast<std::size_t>(d));
    }
    if (shape.empty()) throw ParseError(path + ": no dimensions in header");

    const std::size_t n = shape_product(shape);
    std::vector<double> data;
    data.reserve(n);
    double v;
    while (in >> v) data.push_back(v);
    if (data.size() != n) {
        throw ParseError(path + ": expected " + std::to_string(n) + " values, found " +
                         std::to_string(data.size()));
    }
    return Tensor(std::move(shape), std::move(data));
}

void WeightFile::add(const std::string& name, Tensor tensor) {
    sections_.emplace_back(name, std::move(tensor));
}

const Tensor* WeightFile::find(const std::string& name) const {
    for (const auto& [n, t] : sections_) {
        if (n == name) return &t;
    }
    return nullptr;
}

const Tensor& WeightFile::require(const std::string& name) const {
    const Tensor* t = find(name);
    if (!t) throw ParseError("weight file: missing section '" + name + "'");
    return *t;
}

namespace {

constexpr char kMagic[4] = {'G', 'C', 'M', 'W'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64(out, bits);
}

struct BinCursor {
    const std::string& bytes;
    const std::string& path;
    std::size_t pos = 0;

    void need(std::size_t n, const char* what) const {
        if (bytes.size() - pos < n) {
            throw ParseError(path + ": truncated weight file reading " + what + " at byte offset " + std::to_string(pos));
        }
    }

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }

    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }

    double f64(const char* what) {
        const std::uint64_t bits = u64(what);
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    }
};

} // namespace

void save_weights(const std::string& path, const WeightFile& weights) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(weights.sections().size()));
    for (const auto& [name, tensor] : weights.sections()) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.append(name);
        put_u32(out, static_cast<std::uint32_t>(tensor.rank()));
        for (std::size_t d : tensor.shape()) put_u64(out, d);
        for (std::size_t i = 0; i < tensor.size(); ++i) put_f64(out, tensor[i]);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError(path + ": cannot open for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw ParseError(path + ": write failed");
}

WeightFile load_weights(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError(path + ": cannot open file");
    std::ostringstream buf;
    buf << f.rdbuf();
    const std::string bytes = buf.str();
    BinCursor cur{bytes, path, 0};

    cur.need(4, "magic");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw ParseError(path + ": bad magic, not a weight file");
    }
    cur.pos = 4;
    const std::uint32_t version = cur.u32("version");
    if (version != kVersion) {
        throw ParseError(path + ": unsupported weight file version " + std::to_string(version));
    }
    const std::uint32_t count = cur.u32("section count");

    WeightFile wf;
    for (std::uint32_t s = 0; s < count; ++s) {
        const std::uint32_t name_len = cur.u32("name length");
        cur.need(name_len, "section name");
        std::string name = bytes.substr(cur.pos, name_len);
        cur.pos += name_len;
        const std::uint32_t ndim = cur.u32("rank");
        if (ndim > 8) throw ParseError(path + ": absurd tensor rank " + std::to_string(ndim));
        std::vector<std::size_t> shape;
        for (std::uint32_t i = 0; i < ndim; ++i) {
            shape.push_back(static_cast<std::size_t>(cur.u64("dimension")));
        }
        const std::size_t n = shape_product(shape);
        std::vector<double> data(n);
        for (std::size_t i = 0; i < n; ++i) data[i] = cur.f64("payload");
        wf.add(name, Tensor(std::move(shape), std::move(data)));
    }
    return wf;
}

namespace {

void append_escaped(std::string& out, const std::string& s) {
    out.push_back('"');
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out.push_back(c);
                }
        }
    }
    out.push_back('"');
}

void dump_rec(const nlohmann::json& j, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    const std::string closing(static_cast<std::size_t>(indent) * depth, ' ');
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) { out += "{}"; break; }
            out += "{\n";
            std::size_t i = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++i) {
                out += pad;
                append_escaped(out, it.key());
                out += ": ";
                dump_rec(it.value(), out, indent, depth + 1);
                if (i + 1 < j.size()) out += ",";
                out += "\n";
            }
            out += closing + "}";
            break;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) { out += "[]"; break; }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                out += pad;
                dump_rec(j[i], out, indent, depth + 1);
                if (i + 1 < j.size()) out += ",";
                out += "\n";
            }
            out += closing + "]";
            break;
        }
        case nlohmann::json::value_t::string:
            append_escaped(out, j.get<std::string>());
            break;
        case nlohmann::json::value_t::boolean:
            out += j.get<bool>() ? "true" : "false";
            break;
        case nlohmann::json::value_t::number_integer:
            out += std::to_string(j.get<std::int64_t>());
            break;
        case nlohmann::json::value_t::number_unsigned:
            out += std::to_string(j.get<std::uint64_t>());
            break;
        case nlohmann::json::value_t::number_float: {
            char buf[48];
            std::snprintf(buf, sizeof buf, "%.6f", j.get<double>());
            out += buf;
            break;
        }
        default:
            out += "null";
    }
}

} // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
    std::string out;
    dump_rec(j, out, indent, 0);
    out += "\n";
    return out;
}

void save_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError(path + ": cannot open for writing");
    const std::string s = dump_json(j);
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!f) throw ParseError(path + ": write failed");
}

} // namespace gcm
