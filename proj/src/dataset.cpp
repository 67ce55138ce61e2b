#include "adnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "adnet/error.hpp"
#include "adnet/rng.hpp"

namespace adnet {

std::string label_name(Label l) { return l == Label::Billboard ? "billboard" : "no-billboard"; }

Label parse_label(const std::string& s) {
    if (s == "billboard") return Label::Billboard;
    if (s == "no-billboard") return Label::NoBillboard;
    throw DataError("unknown label '" + s + "'");
}

std::string split_name(Split s) { return s == Split::Train ? "train" : "test"; }

Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "test") return Split::Test;
    throw ParameterError("unknown split '" + s + "' (expected train or test)");
}

std::size_t DatasetManifest::count(Split s, Label l) const {
    std::size_t n = 0;
    for (const auto& [key, c] : counts)
        if (std::get<0>(key) == s && std::get<1>(key) == l) n += c;
    return n;
}

std::size_t DatasetManifest::count(Split s) const {
    std::size_t n = 0;
    for (const auto& [key, c] : counts)
        if (std::get<0>(key) == s) n += c;
    return n;
}

double polygon_area(const Polygon& polygon) {
    if (polygon.size() < 3)
        throw DataError("degenerate polygon: " + std::to_string(polygon.size()) + " vertices");
    double twice = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const Vertex& a = polygon[i];
        const Vertex& b = polygon[(i + 1) % polygon.size()];
        twice += a.x * b.y - b.x * a.y;
    }
    return std::abs(twice) / 2.0;
}

namespace {

// Even-odd point-in-polygon test at pixel centers; union over all polygons.
bool covered(const std::vector<Polygon>& polygons, double px, double py) {
    for (const Polygon& poly : polygons) {
        bool inside = false;
        for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
            const Vertex& a = poly[i];
            const Vertex& b = poly[j];
            if ((a.y > py) != (b.y > py) &&
                px < (b.x - a.x) * (py - a.y) / (b.y - a.y) + a.x)
                inside = !inside;
        }
        if (inside) return true;
    }
    return false;
}

} // namespace

double area_fraction(const AnnotatedImage& img, AreaMode mode) {
    if (img.width < 1 || img.height < 1)
        throw DataError("image '" + img.image_id + "' has non-positive dimensions");
    if (img.billboard_polygons.empty()) return 0.0;
    const double total = static_cast<double>(img.width) * static_cast<double>(img.height);
    double covered_px = 0.0;
    if (mode == AreaMode::Sum) {
        for (const Polygon& p : img.billboard_polygons) covered_px += polygon_area(p);
    } else {
        for (std::int64_t y = 0; y < img.height; ++y)
            for (std::int64_t x = 0; x < img.width; ++x)
                if (covered(img.billboard_polygons, x + 0.5, y + 0.5)) covered_px += 1.0;
    }
    const double f = covered_px / total;
    return f < 0.0 ? 0.0 : (f > 1.0 ? 1.0 : f);
}

bool any_polygon_off_screen(const AnnotatedImage& img) {
    for (const Polygon& p : img.billboard_polygons)
        for (const Vertex& v : p)
            if (v.x < 0.0 || v.x > static_cast<double>(img.width) ||
                v.y < 0.0 || v.y > static_cast<double>(img.height))
                return true;
    return false;
}

SampleClass classify_sample(const AnnotatedImage& img, AreaMode mode) {
    if (any_polygon_off_screen(img)) return SampleClass::Excluded;
    if (img.billboard_polygons.empty()) return SampleClass::Negative;
    return area_fraction(img, mode) > kAreaThreshold ? SampleClass::Positive
                                                     : SampleClass::Excluded;
}

namespace {

std::string format_fraction(double f) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", f);
    return buf;
}

} // namespace

DatasetManifest build_manifest(const std::vector<AnnotatedImage>& images,
                               double split_fraction, std::uint64_t seed, AreaMode mode) {
    if (images.empty()) throw DataError("empty dataset: no annotated images");
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        throw ParameterError("split fraction must be in (0,1), got " +
                             std::to_string(split_fraction));

    std::set<std::string> seen;
    for (const AnnotatedImage& img : images)
        if (!seen.insert(img.image_id).second)
            throw DataError("duplicate image id '" + img.image_id + "'");

    DatasetManifest manifest;
    manifest.seed = seed;
    manifest.split_fraction = split_fraction;

    // Stratum = (label, source). Members sorted by id so the shuffle sees a
    // canonical order no matter how the input was arranged.
    std::map<std::pair<Label, std::string>, std::vector<SampleRecord>> strata;
    for (const AnnotatedImage& img : images) {
        const SampleClass cls = classify_sample(img, mode);
        if (cls == SampleClass::Excluded) {
            ++manifest.excluded;
            continue;
        }
        SampleRecord rec;
        rec.image_id = img.image_id;
        rec.source = img.source;
        rec.label = cls == SampleClass::Positive ? Label::Billboard : Label::NoBillboard;
        rec.area_fraction = area_fraction(img, mode);
        strata[{rec.label, rec.source}].push_back(std::move(rec));
    }

    std::size_t stratum_index = 0;
    for (auto& [key, members] : strata) {
        std::sort(members.begin(), members.end(),
                  [](const SampleRecord& a, const SampleRecord& b) { return a.image_id < b.image_id; });
        Rng rng(mix_seed(seed, stratum_index++));
        for (std::size_t i = members.size(); i > 1; --i)
            std::swap(members[i - 1], members[rng.below(i)]);
        const std::size_t n_train = static_cast<std::size_t>(
            std::llround(split_fraction * static_cast<double>(members.size())));
        for (std::size_t i = 0; i < members.size(); ++i) {
            members[i].split = i < n_train ? Split::Train : Split::Test;
            manifest.counts[{members[i].split, members[i].label, members[i].source}]++;
            manifest.records.push_back(std::move(members[i]));
        }
    }

    std::sort(manifest.records.begin(), manifest.records.end(),
              [](const SampleRecord& a, const SampleRecord& b) { return a.image_id < b.image_id; });
    return manifest;
}

std::string manifest_to_string(const DatasetManifest& manifest) {
    std::ostringstream os;
    os << "#adnet-manifest\tv1\tseed=" << manifest.seed
       << "\tsplit=" << format_fraction(manifest.split_fraction)
       << "\ttrain=" << manifest.count(Split::Train)
       << "\ttest=" << manifest.count(Split::Test)
       << "\texcluded=" << manifest.excluded << "\tcounts=";
    bool first = true;
    for (const auto& [key, c] : manifest.counts) {
        if (!first) os << ',';
        first = false;
        os << split_name(std::get<0>(key)) << '/' << label_name(std::get<1>(key)) << '/'
           << std::get<2>(key) << ':' << c;
    }
    os << '\n';
    for (const SampleRecord& r : manifest.records)
        os << r.image_id << '\t' << r.source << '\t' << label_name(r.label) << '\t'
           << split_name(r.split) << '\t' << format_fraction(r.area_fraction) << '\n';
    return os.str();
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("manifest: cannot open '" + path + "' for writing");
    os << manifest_to_string(manifest);
    if (!os) throw IoError("manifest: write to '" + path + "' failed");
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

[[noreturn]] void parse_fail(const std::string& origin, std::size_t line_no, const std::string& what) {
    throw DataError(origin + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& s, const std::string& origin, std::size_t line_no,
                    const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) parse_fail(origin, line_no, std::string("malformed ") + what + " '" + s + "'");
        return v;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception&) {
        parse_fail(origin, line_no, std::string("malformed ") + what + " '" + s + "'");
    }
}

std::int64_t parse_extent(const std::string& s, const std::string& origin, std::size_t line_no,
                          const char* what) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size() || v < 1)
            parse_fail(origin, line_no, std::string("invalid ") + what + " '" + s + "'");
        return v;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception&) {
        parse_fail(origin, line_no, std::string("invalid ") + what + " '" + s + "'");
    }
}

} // namespace

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("manifest: cannot open '" + path + "'");

    DatasetManifest manifest;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (!header_seen) {
            if (line.rfind("#adnet-manifest\tv1\t", 0) != 0)
                parse_fail(path, line_no, "not a manifest header");
            try {
                for (const std::string& f : split_tabs(line)) {
                    if (f.rfind("seed=", 0) == 0)
                        manifest.seed = static_cast<std::uint64_t>(std::stoull(f.substr(5)));
                    else if (f.rfind("split=", 0) == 0)
                        manifest.split_fraction = std::stod(f.substr(6));
                    else if (f.rfind("excluded=", 0) == 0)
                        manifest.excluded = static_cast<std::size_t>(std::stoull(f.substr(9)));
                }
            } catch (const std::exception&) {
                parse_fail(path, line_no, "malformed manifest header");
            }
            header_seen = true;
            continue;
        }
        if (line[0] == '#') continue;
        const std::vector<std::string> fields = split_tabs(line);
        if (fields.size() != 5)
            parse_fail(path, line_no, "expected 5 tab-separated fields, got " +
                                          std::to_string(fields.size()));
        SampleRecord rec;
        rec.image_id = fields[0];
        rec.source = fields[1];
        try {
            rec.label = parse_label(fields[2]);
            rec.split = parse_split(fields[3]);
        } catch (const Error& e) {
            parse_fail(path, line_no, e.what());
        }
        rec.area_fraction = parse_double(fields[4], path, line_no, "area fraction");
        if (rec.area_fraction < 0.0 || rec.area_fraction > 1.0)
            parse_fail(path, line_no, "area fraction outside [0,1]");
        // billboard records must sit above the inclusion threshold; allow
        // slack for the 6-decimal serialization
        if (rec.label == Label::Billboard && rec.area_fraction < kAreaThreshold - 1e-6)
            parse_fail(path, line_no, "billboard record below the area threshold");
        manifest.counts[{rec.split, rec.label, rec.source}]++;
        manifest.records.push_back(std::move(rec));
    }
    if (!header_seen) throw DataError("manifest '" + path + "' is empty");

    std::set<std::string> seen;
    for (const SampleRecord& r : manifest.records)
        if (!seen.insert(r.image_id).second)
            throw DataError("manifest '" + path + "': duplicate image id '" + r.image_id + "'");
    return manifest;
}

std::vector<AnnotatedImage> parse_annotations(std::istream& in, const std::string& origin) {
    std::vector<AnnotatedImage> images;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::vector<std::string> fields = split_tabs(line);
        if (fields.size() < 4)
            parse_fail(origin, line_no, "expected at least image_id, width, height, source");

        AnnotatedImage img;
        img.image_id = fields[0];
        if (img.image_id.empty()) parse_fail(origin, line_no, "empty image id");
        img.width = parse_extent(fields[1], origin, line_no, "width");
        img.height = parse_extent(fields[2], origin, line_no, "height");
        img.source = fields[3];
        if (img.source.empty()) parse_fail(origin, line_no, "empty source tag");

        for (std::size_t f = 4; f < fields.size(); ++f) {
            Polygon poly;
            std::istringstream ps(fields[f]);
            std::string pair;
            while (ps >> pair) {
                const std::size_t comma = pair.find(',');
                if (comma == std::string::npos || comma == 0 || comma + 1 == pair.size())
                    parse_fail(origin, line_no, "malformed polygon vertex '" + pair + "'");
                Vertex v;
                v.x = parse_double(pair.substr(0, comma), origin, line_no, "polygon x");
                v.y = parse_double(pair.substr(comma + 1), origin, line_no, "polygon y");
                if (!std::isfinite(v.x) || !std::isfinite(v.y))
                    parse_fail(origin, line_no, "non-finite polygon vertex");
                poly.push_back(v);
            }
            if (poly.size() < 3)
                parse_fail(origin, line_no, "polygon needs at least 3 vertices, got " +
                                                std::to_string(poly.size()));
            img.billboard_polygons.push_back(std::move(poly));
        }
        images.push_back(std::move(img));
    }
    return images;
}

std::vector<AnnotatedImage> load_annotations(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("annotations: cannot open '" + path + "'");
    return parse_annotations(is, path);
}

} // namespace adnet
