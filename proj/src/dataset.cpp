#include "gcm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gcm/rng.hpp"

namespace gcm {

std::size_t DatasetStats::total() const {
    std::size_t n = 0;
    for (const auto& [cls, count] : class_counts) n += count;
    return n;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// PPM header tokenizer: whitespace separated, '#' comments to end of line.
struct PpmCursor {
    const std::string& bytes;
    const std::string& path;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(path + ": " + what + " at byte offset " + std::to_string(pos));
    }

    void skip_space_and_comments() {
        while (pos < bytes.size()) {
            const char c = bytes[pos];
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f') {
                ++pos;
            } else {
                break;
            }
        }
    }

    long next_int(const char* what) {
        skip_space_and_comments();
        if (pos >= bytes.size()) fail(std::string("truncated header, missing ") + what);
        if (bytes[pos] < '0' || bytes[pos] > '9') fail(std::string("expected ") + what);
        long v = 0;
        while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 1'000'000'000L) fail(std::string("absurd ") + what);
            ++pos;
        }
        return v;
    }
};

} // namespace

Tensor load_image_ppm(const std::string& path) {
    const std::string bytes = read_file(path);
    PpmCursor cur{bytes, path, 0};

    if (bytes.size() < 2) cur.fail("missing PPM magic");
    const char m0 = bytes[0], m1 = bytes[1];
    if (m0 != 'P' || (m1 != '3' && m1 != '6')) cur.fail("bad magic, expected P3 or P6");
    const bool binary = m1 == '6';
    cur.pos = 2;

    const long w = cur.next_int("width");
    const long h = cur.next_int("height");
    const long maxval = cur.next_int("maxval");
    if (w <= 0 || h <= 0) cur.fail("non-positive image size");
    if (maxval < 1 || maxval > 65535) cur.fail("maxval outside [1,65535]");

    const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    Tensor img({3, static_cast<std::size_t>(h), static_cast<std::size_t>(w)});
    const double inv = 1.0 / static_cast<double>(maxval);

    if (binary) {
        // Exactly one whitespace byte separates the header from the payload.
        if (cur.pos >= bytes.size() || !(bytes[cur.pos] == ' ' || bytes[cur.pos] == '\t' ||
                                         bytes[cur.pos] == '\n' || bytes[cur.pos] == '\r')) {
            cur.fail("expected single whitespace before binary payload");
        }
        ++cur.pos;
        const int sample_bytes = maxval > 255 ? 2 : 1;
        const std::size_t need = n * 3 * static_cast<std::size_t>(sample_bytes);
        const std::size_t have = bytes.size() - cur.pos;
        if (have < need) {
            throw ParseError(path + ": truncated P6 payload at byte offset " +
                             std::to_string(cur.pos) + ", need " + std::to_string(need) +
                             " bytes, have " + std::to_string(have));
        }
        const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data()) + cur.pos;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t ch = 0; ch < 3; ++ch) {
                long v;
                if (sample_bytes == 1) {
                    v = p[(i * 3 + ch)];
                } else {
                    // two-byte samples are big-endian per the PNM convention
                    v = (static_cast<long>(p[(i * 3 + ch) * 2]) << 8) | p[(i * 3 + ch) * 2 + 1];
                }
                img[ch * n + i] = static_cast<double>(v) * inv;
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t ch = 0; ch < 3; ++ch) {
                const long v = cur.next_int("P3 sample");
                if (v > maxval) cur.fail("sample exceeds maxval");
                img[ch * n + i] = static_cast<double>(v) * inv;
            }
        }
    }
    return img;
}

void save_image_ppm(const std::string& path, const Tensor& img, bool ascii) {
    if (img.rank() != 3 || img.dim(0) != 3) {
        throw ShapeError("save_image_ppm: expected (3,H,W) image, got " + shape_str(img.shape()));
    }
    const std::size_t h = img.dim(1), w = img.dim(2);
    const std::size_t n = h * w;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path + ": cannot open for writing");

    auto quantize = [](double v) {
        const long q = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
        return static_cast<int>(std::clamp(q, 0L, 255L));
    };

    if (ascii) {
        out << "P3\n" << w << " " << h << "\n255\n";
        for (std::size_t i = 0; i < n; ++i) {
            out << quantize(img[i]) << " " << quantize(img[n + i]) << " " << quantize(img[2 * n + i])
                << "\n";
        }
    } else {
        out << "P6\n" << w << " " << h << "\n255\n";
        std::vector<unsigned char> row(n * 3);
        for (std::size_t i = 0; i < n; ++i) {
            row[i * 3 + 0] = static_cast<unsigned char>(quantize(img[i]));
            row[i * 3 + 1] = static_cast<unsigned char>(quantize(img[n + i]));
            row[i * 3 + 2] = static_cast<unsigned char>(quantize(img[2 * n + i]));
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw ParseError(path + ": write failed");
}

namespace {

std::vector<std::vector<std::string>> read_label_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
        if (tokens.empty()) continue;
        rows.push_back(std::move(tokens));
        rows.back().push_back(std::to_string(line_no)); // carried for diagnostics
    }
    return rows;
}

double parse_unit(const std::string& tok, const std::string& path, const std::string& line_no,
                  const char* what) {
    std::size_t used = 0;
    double v;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw ParseError(path + ":" + line_no + ": bad " + what + " '" + tok + "'");
    }
    if (used != tok.size() || !std::isfinite(v)) {
        throw ParseError(path + ":" + line_no + ": bad " + what + " '" + tok + "'");
    }
    if (v < 0.0 || v > 1.0) {
        throw ValueError(path + ":" + line_no + ": " + what + " " + tok + " outside [0,1]");
    }
    return v;
}

int parse_class(const std::string& tok, int n_classes, const std::string& path,
                const std::string& line_no) {
    for (char c : tok) {
        if (c < '0' || c > '9') throw ParseError(path + ":" + line_no + ": bad class id '" + tok + "'");
    }
    const long v = std::strtol(tok.c_str(), nullptr, 10);
    if (v < 0 || v >= n_classes) {
        throw ValueError(path + ":" + line_no + ": class " + tok + " outside [0," +
                         std::to_string(n_classes) + ")");
    }
    return static_cast<int>(v);
}

} // namespace

std::vector<Annotation> load_labels(const std::string& path, int n_classes) {
    std::vector<Annotation> out;
    for (const auto& row : read_label_lines(path)) {
        const std::string line_no = row.back();
        const std::size_t fields = row.size() - 1;
        if (fields != 5) {
            throw ParseError(path + ":" + line_no + ": expected 5 fields, got " +
                             std::to_string(fields));
        }
        Annotation a;
        a.class_id = parse_class(row[0], n_classes, path, line_no);
        a.cx = parse_unit(row[1], path, line_no, "cx");
        a.cy = parse_unit(row[2], path, line_no, "cy");
        a.w = parse_unit(row[3], path, line_no, "w");
        a.h = parse_unit(row[4], path, line_no, "h");
        if (a.w <= 0.0 || a.h <= 0.0) {
            throw ValueError(path + ":" + line_no + ": box width and height must be positive");
        }
        out.push_back(a);
    }
    return out;
}

void save_labels(const std::string& path, const std::vector<Annotation>& annots) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open for writing");
    char buf[160];
    for (const auto& a : annots) {
        std::snprintf(buf, sizeof buf, "%d %.9g %.9g %.9g %.9g\n", a.class_id, a.cx, a.cy, a.w, a.h);
        out << buf;
    }
}

std::vector<ScoredAnnotation> load_detections(const std::string& path, int n_classes) {
    std::vector<ScoredAnnotation> out;
    for (const auto& row : read_label_lines(path)) {
        const std::string line_no = row.back();
        const std::size_t fields = row.size() - 1;
        if (fields != 6) {
            throw ParseError(path + ":" + line_no + ": expected 6 fields, got " +
                             std::to_string(fields));
        }
        ScoredAnnotation d;
        d.box.class_id = parse_class(row[0], n_classes, path, line_no);
        d.box.cx = parse_unit(row[1], path, line_no, "cx");
        d.box.cy = parse_unit(row[2], path, line_no, "cy");
        d.box.w = parse_unit(row[3], path, line_no, "w");
        d.box.h = parse_unit(row[4], path, line_no, "h");
        d.confidence = parse_unit(row[5], path, line_no, "confidence");
        if (d.box.w <= 0.0 || d.box.h <= 0.0) {
            throw ValueError(path + ":" + line_no + ": box width and height must be positive");
        }
        out.push_back(d);
    }
    return out;
}

void save_detections(const std::string& path, const std::vector<ScoredAnnotation>& dets) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open for writing");
    char buf[192];
    for (const auto& d : dets) {
        std::snprintf(buf, sizeof buf, "%d %.9g %.9g %.9g %.9g %.9g\n", d.box.class_id, d.box.cx,
                      d.box.cy, d.box.w, d.box.h, d.confidence);
        out << buf;
    }
}

BBox annotation_to_bbox(const Annotation& a) {
    BBox b;
    b.x1 = std::clamp(a.cx - a.w / 2.0, 0.0, 1.0);
    b.y1 = std::clamp(a.cy - a.h / 2.0, 0.0, 1.0);
    b.x2 = std::clamp(a.cx + a.w / 2.0, 0.0, 1.0);
    b.y2 = std::clamp(a.cy + a.h / 2.0, 0.0, 1.0);
    return b;
}

DatasetStats dataset_stats(const std::vector<LabeledImage>& items) {
    DatasetStats stats;
    for (const auto& item : items) {
        for (const auto& a : item.annotations) {
            ++stats.class_counts[a.class_id];
            stats.centers.emplace_back(a.cx, a.cy);
            stats.sizes.emplace_back(a.w, a.h);
        }
    }
    return stats;
}

namespace {

// Fixed per-class color signature; spreads hues with the golden ratio.
void class_color(int cls, double& r, double& g, double& b) {
    const double t = std::fmod(0.618033988749895 * static_cast<double>(cls) + 0.21, 1.0);
    r = 0.25 + 0.7 * t;
    g = 0.25 + 0.7 * std::fmod(t + 0.37, 1.0);
    b = 0.25 + 0.7 * std::fmod(t + 0.71, 1.0);
}

} // namespace

std::vector<LabeledImage> synth_dataset(std::uint64_t seed, std::size_t n_images, int n_classes,
                                        std::size_t size) {
    if (n_classes <= 0) throw ValueError("synth_dataset: n_classes must be positive");
    if (size < 16) throw ValueError("synth_dataset: size must be >= 16");

    Rng rng(seed);
    std::vector<LabeledImage> items;
    items.reserve(n_images);
    const double szd = static_cast<double>(size);

    for (std::size_t idx = 0; idx < n_images; ++idx) {
        LabeledImage item;
        char id[32];
        std::snprintf(id, sizeof id, "img_%04zu", idx);
        item.id = id;
        item.image = Tensor({3, size, size});

        const double base_r = rng.uniform(0.2, 0.6);
        const double base_g = rng.uniform(0.2, 0.6);
        const double base_b = rng.uniform(0.2, 0.6);
        const double gx = rng.uniform(-0.15, 0.15);
        const double gy = rng.uniform(-0.15, 0.15);
        for (std::size_t y = 0; y < size; ++y) {
            for (std::size_t x = 0; x < size; ++x) {
                const double shade = gx * (static_cast<double>(x) / szd) +
                                     gy * (static_cast<double>(y) / szd) +
                                     rng.uniform(-0.03, 0.03);
                item.image.at(0, y, x) = std::clamp(base_r + shade, 0.0, 1.0);
                item.image.at(1, y, x) = std::clamp(base_g + shade, 0.0, 1.0);
                item.image.at(2, y, x) = std::clamp(base_b + shade, 0.0, 1.0);
            }
        }

        const std::size_t n_objs = 1 + rng.uniform_int(3);
        for (std::size_t k = 0; k < n_objs; ++k) {
            const int cls = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_classes)));
            double cr, cg, cb;
            class_color(cls, cr, cg, cb);

            const double w = rng.uniform(0.12, 0.35);
            const double h = rng.uniform(0.12, 0.35);
            const double cx = rng.uniform(w / 2.0 + 0.02, 0.98 - w / 2.0);
            const double cy = rng.uniform(h / 2.0 + 0.02, 0.98 - h / 2.0);
            const bool ellipse = cls % 2 == 1;

            const std::size_t x0 = static_cast<std::size_t>((cx - w / 2.0) * szd);
            const std::size_t x1 = static_cast<std::size_t>((cx + w / 2.0) * szd);
            const std::size_t y0 = static_cast<std::size_t>((cy - h / 2.0) * szd);
            const std::size_t y1 = static_cast<std::size_t>((cy + h / 2.0) * szd);
            for (std::size_t y = y0; y <= y1 && y < size; ++y) {
                for (std::size_t x = x0; x <= x1 && x < size; ++x) {
                    if (ellipse) {
                        const double dx = (static_cast<double>(x) / szd - cx) / (w / 2.0);
                        const double dy = (static_cast<double>(y) / szd - cy) / (h / 2.0);
                        if (dx * dx + dy * dy > 1.0) continue;
                    }
                    item.image.at(0, y, x) = std::clamp(cr, 0.0, 1.0);
                    item.image.at(1, y, x) = std::clamp(cg, 0.0, 1.0);
                    item.image.at(2, y, x) = std::clamp(cb, 0.0, 1.0);
                }
            }
            item.annotations.push_back(Annotation{cls, cx, cy, w, h});
        }
        items.push_back(std::move(item));
    }
    return items;
}

} // namespace gcm
