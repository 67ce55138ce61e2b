#ifndef ADNET_DATASET_HPP
#define ADNET_DATASET_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "adnet/tensor.hpp"

namespace adnet {

// Class indices are fixed: 0 = no-billboard, 1 = billboard.
enum class Label : int { NoBillboard = 0, Billboard = 1 };
enum class Split { Train, Test };

std::string label_name(Label l);
Label parse_label(const std::string& s);
std::string split_name(Split s);
Split parse_split(const std::string& s);

struct Vertex {
    double x = 0.0;
    double y = 0.0;
};
using Polygon = std::vector<Vertex>;

// One annotated source image: its geometry plus the billboard outlines.
struct AnnotatedImage {
    std::string image_id; // doubles as the path relative to the image root
    std::int64_t width = 0;
    std::int64_t height = 0;
    std::string source;   // corpus tag
    std::vector<Polygon> billboard_polygons;
};

struct SampleRecord {
    std::string image_id;
    std::string source;
    Label label = Label::NoBillboard;
    Split split = Split::Train;
    double area_fraction = 0.0;
};

using CountKey = std::tuple<Split, Label, std::string>; // split, label, source

struct DatasetManifest {
    std::uint64_t seed = 0;
    double split_fraction = 0.0;
    std::size_t excluded = 0;
    std::vector<SampleRecord> records; // sorted by image_id
    std::map<CountKey, std::size_t> counts;

    std::size_t count(Split s, Label l) const;
    std::size_t count(Split s) const;
};

// Inclusion threshold: billboards must cover strictly more than this
// fraction of the image.
inline constexpr double kAreaThreshold = 0.10;

// How overlapping polygons contribute to the covered fraction.
enum class AreaMode {
    Sum,   // sum of individual shoelace areas (default; overlaps double-count)
    Union, // pixel-rasterized union, overlap-safe
};

// Absolute shoelace area in px^2; orientation independent.
double polygon_area(const Polygon& polygon);

// Total billboard area over image area, clamped to [0,1].
double area_fraction(const AnnotatedImage& img, AreaMode mode = AreaMode::Sum);

// Any vertex strictly outside [0,width] x [0,height].
bool any_polygon_off_screen(const AnnotatedImage& img);

enum class SampleClass { Positive, Negative, Excluded };

// The composite-dataset inclusion rule: positive needs fraction > threshold
// and every polygon fully on screen; negative means no billboards at all;
// everything else is excluded.
SampleClass classify_sample(const AnnotatedImage& img, AreaMode mode = AreaMode::Sum);

// Deterministic stratified split. Strata are (label, source) groups; each is
// shuffled with a seed-derived stream and cut at round(fraction * size).
DatasetManifest build_manifest(const std::vector<AnnotatedImage>& images,
                               double split_fraction, std::uint64_t seed,
                               AreaMode mode = AreaMode::Sum);

// Tab-separated manifest text: one header line carrying seed and counts,
// then one record per line. Equal inputs and seed give identical bytes.
std::string manifest_to_string(const DatasetManifest& manifest);
void save_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

// Annotation input: one image per line,
//   image_id <TAB> width <TAB> height <TAB> source [<TAB> polygon]...
// where a polygon is "x0,y0 x1,y1 x2,y2 ...". '#' lines and blank lines are
// skipped. Parse errors carry 1-based line numbers.
std::vector<AnnotatedImage> parse_annotations(std::istream& in, const std::string& origin);
std::vector<AnnotatedImage> load_annotations(const std::string& path);

// Maps a manifest record to the network input tensor for that image.
using SampleLoader = std::function<Tensor<float>(const SampleRecord&)>;

} // namespace adnet

#endif
