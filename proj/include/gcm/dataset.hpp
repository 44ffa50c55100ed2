#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gcm/eval.hpp"
#include "gcm/tensor.hpp"

namespace gcm {

/// Normalized center-format annotation: class, cx, cy, w, h in [0,1].
struct Annotation {
    int class_id = 0;
    double cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;
};

struct ScoredAnnotation {
    Annotation box;
    double confidence = 0.0;
};

struct LabeledImage {
    std::string id;
    Tensor image; // (3,H,W) in [0,1]
    std::vector<Annotation> annotations;
};

struct DatasetStats {
    std::map<int, std::size_t> class_counts;
    std::vector<std::pair<double, double>> centers; // (cx, cy)
    std::vector<std::pair<double, double>> sizes;   // (w, h)
    std::size_t total() const;
};

/// Reads P6 (binary) or P3 (ASCII) PPM; pixels scaled to [0,1] by maxval.
/// Malformed input raises ParseError with the byte offset.
Tensor load_image_ppm(const std::string& path);

/// Writes 8-bit PPM; ascii selects P3 instead of P6.
void save_image_ppm(const std::string& path, const Tensor& img, bool ascii = false);

/// One "class cx cy w h" per line. Validates class < n_classes and
/// coordinates in [0,1]; empty file -> empty list.
std::vector<Annotation> load_labels(const std::string& path, int n_classes);
void save_labels(const std::string& path, const std::vector<Annotation>& annots);

/// Detections: same format plus a trailing confidence field.
std::vector<ScoredAnnotation> load_detections(const std::string& path, int n_classes);
void save_detections(const std::string& path, const std::vector<ScoredAnnotation>& dets);

/// Corner-format box with corners clamped to [0,1].
BBox annotation_to_bbox(const Annotation& a);

/// Instance counts plus center/size scatter, ordered by input then line.
DatasetStats dataset_stats(const std::vector<LabeledImage>& items);

/// Deterministic synthetic dataset: shaded backgrounds with rectangles and
/// ellipses carrying per-class color signatures, plus matching annotations.
/// Identical seeds produce identical datasets.
std::vector<LabeledImage> synth_dataset(std::uint64_t seed, std::size_t n_images, int n_classes,
                                        std::size_t size);

} // namespace gcm
