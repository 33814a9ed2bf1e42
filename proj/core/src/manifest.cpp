#include "mfid/manifest.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "mfid/error.hpp"

namespace mfid {

namespace {

using nlohmann::json;

constexpr std::string_view kUts = "uts";

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    if (quoted) throw InvalidArgument("unterminated quote on manifest line " + std::to_string(line_no));
    fields.push_back(std::move(field));
    return fields;
}

std::string csv_escape(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

double parse_double(std::string_view s, std::size_t line_no) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw InvalidArgument("bad condition_value '" + std::string(s) + "' on manifest line " +
                              std::to_string(line_no));
    }
    return v;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

json entry_to_json(const ManifestEntry& e) {
    json j;
    j["path"] = e.path;
    j["temper"] = to_string(e.temper);
    j["origin"] = to_string(e.origin);
    j["condition_name"] = e.condition_name;
    j["condition_value"] = e.condition_value ? json(*e.condition_value) : json(nullptr);
    j["bin_label"] = e.bin_label ? json(to_string(*e.bin_label)) : json(nullptr);
    return j;
}

ManifestEntry entry_from_json(const json& j) {
    ManifestEntry e;
    e.path = j.at("path").get<std::string>();
    e.temper = parse_temper(j.at("temper").get<std::string>());
    e.origin = parse_origin(j.at("origin").get<std::string>());
    if (j.contains("condition_name") && !j["condition_name"].is_null()) {
        e.condition_name = j["condition_name"].get<std::string>();
    }
    if (j.contains("condition_value") && !j["condition_value"].is_null()) {
        e.condition_value = j["condition_value"].get<double>();
    }
    if (j.contains("bin_label") && !j["bin_label"].is_null()) {
        const auto text = j["bin_label"].get<std::string>();
        if (!text.empty()) e.bin_label = parse_bin_label(text);
    }
    return e;
}

}  // namespace

std::string_view to_string(Temper t) noexcept {
    switch (t) {
        case Temper::t5: return "T5";
        case Temper::t6: return "T6";
        case Temper::as_extruded: return "as_extruded";
    }
    return "?";
}

std::string_view to_string(Origin o) noexcept {
    return o == Origin::experimental ? "experimental" : "synthetic";
}

Temper parse_temper(std::string_view text) {
    if (text == "T5") return Temper::t5;
    if (text == "T6") return Temper::t6;
    if (text == "as_extruded") return Temper::as_extruded;
    throw InvalidArgument("unknown temper '" + std::string(text) + "'");
}

Origin parse_origin(std::string_view text) {
    if (text == "experimental") return Origin::experimental;
    if (text == "synthetic") return Origin::synthetic;
    throw InvalidArgument("unknown origin '" + std::string(text) + "'");
}

void CorpusManifest::validate() const {
    for (const auto& e : entries) {
        if (e.temper == Temper::as_extruded && e.condition_name == kUts && e.condition_value) {
            throw InvalidArgument("as-extruded entry '" + e.path + "' carries a UTS value");
        }
    }
}

CorpusManifest read_manifest_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("manifest is empty (missing header)");
    strip_cr(line);
    // Tolerate a UTF-8 byte-order mark.
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line != kManifestHeader) {
        throw InvalidArgument("manifest header must be '" + std::string(kManifestHeader) +
                              "', got '" + line + "'");
    }
    CorpusManifest m;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        auto f = split_csv_line(line, line_no);
        if (f.size() != 6) {
            throw InvalidArgument("manifest line " + std::to_string(line_no) + " has " +
                                  std::to_string(f.size()) + " fields, expected 6");
        }
        ManifestEntry e;
        e.path = f[0];
        if (e.path.empty()) throw InvalidArgument("empty path on manifest line " + std::to_string(line_no));
        e.temper = parse_temper(f[1]);
        e.origin = parse_origin(f[2]);
        e.condition_name = f[3];
        if (!f[4].empty()) e.condition_value = parse_double(f[4], line_no);
        if (!f[5].empty()) e.bin_label = parse_bin_label(f[5]);
        m.entries.push_back(std::move(e));
    }
    return m;
}

void write_manifest_csv(const CorpusManifest& manifest, std::ostream& out) {
    out << kManifestHeader << '\n';
    for (const auto& e : manifest.entries) {
        out << csv_escape(e.path) << ',' << to_string(e.temper) << ',' << to_string(e.origin)
            << ',' << csv_escape(e.condition_name) << ','
            << (e.condition_value ? format_double(*e.condition_value) : std::string()) << ','
            << (e.bin_label ? to_string(*e.bin_label) : std::string_view()) << '\n';
    }
}

CorpusManifest read_manifest_json(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& ex) {
        throw InvalidArgument(std::string("manifest JSON does not parse: ") + ex.what());
    }
    const json& rows = doc.is_object() ? doc.at("entries") : doc;
    if (!rows.is_array()) throw InvalidArgument("manifest JSON must be an array of entries");
    CorpusManifest m;
    try {
        for (const auto& row : rows) m.entries.push_back(entry_from_json(row));
    } catch (const json::exception& ex) {
        throw InvalidArgument(std::string("bad manifest JSON entry: ") + ex.what());
    }
    return m;
}

void write_manifest_json(const CorpusManifest& manifest, std::ostream& out) {
    json rows = json::array();
    for (const auto& e : manifest.entries) rows.push_back(entry_to_json(e));
    out << rows.dump(2) << '\n';
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
    CorpusManifest m = path.extension() == ".json" ? read_manifest_json(in) : read_manifest_csv(in);
    m.validate();
    return m;
}

void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
    if (path.extension() == ".json") {
        write_manifest_json(manifest, out);
    } else {
        write_manifest_csv(manifest, out);
    }
    if (!out) throw IoError("write failed for manifest '" + path.string() + "'");
}

std::filesystem::path resolve_entry_path(const ManifestEntry& entry,
                                         const std::filesystem::path& manifest_path) {
    std::filesystem::path p(entry.path);
    if (p.is_absolute()) return p;
    return manifest_path.parent_path() / p;
}

LabelingResult assign_labels(const CorpusManifest& manifest, const ConditionBinning& binning) {
    LabelingResult result;
    result.manifest = manifest;
    for (auto& e : result.manifest.entries) {
        const bool same_condition =
            e.condition_name.empty() || e.condition_name == binning.condition_name;
        if (!same_condition) {
            if (e.condition_value) {
                throw InvalidArgument("entry '" + e.path + "' holds a value for '" +
                                      e.condition_name + "', not '" + binning.condition_name +
                                      "'");
            }
            ++result.skipped;
            continue;
        }
        if (!e.condition_value) {
            ++result.skipped;
            continue;
        }
        e.condition_name = binning.condition_name;
        e.bin_label = binning.label(*e.condition_value);
        ++result.labeled;
    }
    return result;
}

bool labels_consistent(const CorpusManifest& manifest, const ConditionBinning& binning) {
    for (const auto& e : manifest.entries) {
        if (e.condition_name != binning.condition_name || !e.bin_label) continue;
        if (!e.condition_value || binning.label(*e.condition_value) != *e.bin_label) return false;
    }
    return true;
}

std::vector<double> condition_values(const CorpusManifest& manifest,
                                     std::string_view condition_name) {
    std::vector<double> values;
    for (const auto& e : manifest.entries) {
        if (e.condition_name == condition_name && e.condition_value) {
            values.push_back(*e.condition_value);
        }
    }
    return values;
}

}  // namespace mfid
