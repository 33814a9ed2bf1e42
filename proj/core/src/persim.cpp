#include "mfid/persim.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "mfid/error.hpp"
#include "shifted_mean.hpp"

namespace mfid {

void PIGridSpec::validate() const {
    if (bins_x < 1 || bins_y < 1) throw InvalidArgument("persistence image needs at least one bin per axis");
    if (!(birth_max > birth_min)) throw InvalidArgument("birth range is empty");
    if (!(persistence_max > persistence_min)) throw InvalidArgument("persistence range is empty");
    if (!(persistence_max > 0.0)) throw InvalidArgument("persistence_max must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("kernel sigma must be positive");
}

PersistenceImage::PersistenceImage(const PIGridSpec& spec) : spec_(spec) {
    spec_.validate();
    values_.assign(spec_.bins_x * spec_.bins_y, 0.0);
}

PersistenceImage::PersistenceImage(const PIGridSpec& spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
    spec_.validate();
    if (values_.size() != spec_.bins_x * spec_.bins_y) {
        throw InvalidArgument("persistence image has " + std::to_string(values_.size()) +
                              " values, grid needs " + std::to_string(spec_.bins_x * spec_.bins_y));
    }
    for (double v : values_) {
        if (!(v >= 0.0)) throw InvalidArgument("persistence image entries must be nonnegative");
    }
}

double PersistenceImage::total_mass() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
}

namespace {

// Per-bin factors of a 1-D unit Gaussian centered at `mu`.
void axis_factors(double lo, double step, std::size_t bins, double mu, double sigma,
                  KernelEvaluation mode, std::vector<double>& out) {
    out.resize(bins);
    if (mode == KernelEvaluation::bin_integral) {
        const double scale = 1.0 / (sigma * std::numbers::sqrt2);
        double prev = std::erf((lo - mu) * scale);
        for (std::size_t i = 0; i < bins; ++i) {
            const double edge = lo + static_cast<double>(i + 1) * step;
            const double cur = std::erf((edge - mu) * scale);
            out[i] = 0.5 * (cur - prev);
            prev = cur;
        }
    } else {
        const double norm = step / (sigma * std::sqrt(2.0 * std::numbers::pi));
        for (std::size_t i = 0; i < bins; ++i) {
            const double center = lo + (static_cast<double>(i) + 0.5) * step;
            const double z = (center - mu) / sigma;
            out[i] = norm * std::exp(-0.5 * z * z);
        }
    }
}

}  // namespace

PersistenceImage vectorize(const PersistenceDiagram& diagram, const PIGridSpec& spec) {
    PersistenceImage pi(spec);
    std::vector<double> fx;
    std::vector<double> fy;
    for (const auto& point : diagram.points) {
        const double p = point.persistence();
        if (p < 0.0) throw InvalidArgument("diagram point has death before birth");
        const double w = spec.weight_of(p);
        if (w == 0.0) continue;
        axis_factors(spec.birth_min, spec.bin_width(), spec.bins_x, point.birth, spec.sigma,
                     spec.evaluation, fx);
        axis_factors(spec.persistence_min, spec.bin_height(), spec.bins_y, p, spec.sigma,
                     spec.evaluation, fy);
        for (std::size_t r = 0; r < spec.bins_y; ++r) {
            const double wy = w * fy[r];
            for (std::size_t c = 0; c < spec.bins_x; ++c) pi.at(r, c) += wy * fx[c];
        }
    }
    return pi;
}

PersistenceImage average_pis(std::span<const PersistenceImage> pis) {
    if (pis.empty()) throw InvalidArgument("cannot average an empty list of persistence images");
    const PIGridSpec& spec = pis.front().spec();
    for (const auto& pi : pis) {
        if (!(pi.spec() == spec)) throw InvalidArgument("persistence images have different grid specs");
    }
    const std::size_t len = spec.bins_x * spec.bins_y;
    auto mean = detail::shifted_mean(pis.size(), len, [&](std::size_t i) { return pis[i].values(); });
    // Rounding can leave a -0 or a -1e-18 where all inputs were zero.
    for (double& v : mean) v = std::max(v, 0.0);
    return PersistenceImage(spec, std::move(mean));
}

void write_pi_csv(const PersistenceImage& pi, std::ostream& out) {
    char buf[64];
    for (std::size_t r = 0; r < pi.rows(); ++r) {
        for (std::size_t c = 0; c < pi.cols(); ++c) {
            if (c) out.put(',');
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, pi(r, c));
            out.write(buf, end - buf);
        }
        out.put('\n');
    }
}

std::vector<double> read_pi_csv(std::istream& in, std::size_t& rows, std::size_t& cols) {
    std::vector<double> values;
    rows = 0;
    cols = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t n = 0;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (true) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(p, end, v);
            if (ec != std::errc()) throw InvalidArgument("malformed PI row " + std::to_string(rows + 1));
            values.push_back(v);
            ++n;
            if (ptr == end) break;
            if (*ptr != ',') throw InvalidArgument("malformed PI row " + std::to_string(rows + 1));
            p = ptr + 1;
        }
        if (rows == 0) {
            cols = n;
        } else if (n != cols) {
            throw InvalidArgument("PI rows have inconsistent lengths");
        }
        ++rows;
    }
    if (rows == 0) throw InvalidArgument("PI file is empty");
    return values;
}

std::string pi_spec_to_json(const PIGridSpec& spec) {
    nlohmann::ordered_json j;
    j["bins_x"] = spec.bins_x;
    j["bins_y"] = spec.bins_y;
    j["birth_range"] = {spec.birth_min, spec.birth_max};
    j["persistence_range"] = {spec.persistence_min, spec.persistence_max};
    j["kernel_sigma"] = spec.sigma;
    j["weight"] = "linear_persistence";
    j["evaluation"] = spec.evaluation == KernelEvaluation::bin_integral ? "bin_integral" : "bin_center";
    return j.dump(2);
}

PIGridSpec pi_spec_from_json(const std::string& text) {
    PIGridSpec spec;
    try {
        const auto j = nlohmann::json::parse(text);
        spec.bins_x = j.at("bins_x").get<std::size_t>();
        spec.bins_y = j.at("bins_y").get<std::size_t>();
        spec.birth_min = j.at("birth_range").at(0).get<double>();
        spec.birth_max = j.at("birth_range").at(1).get<double>();
        spec.persistence_min = j.at("persistence_range").at(0).get<double>();
        spec.persistence_max = j.at("persistence_range").at(1).get<double>();
        spec.sigma = j.at("kernel_sigma").get<double>();
        if (j.value("weight", std::string("linear_persistence")) != "linear_persistence") {
            throw InvalidArgument("unsupported PI weight '" + j["weight"].get<std::string>() + "'");
        }
        const auto eval = j.value("evaluation", std::string("bin_integral"));
        if (eval == "bin_integral") {
            spec.evaluation = KernelEvaluation::bin_integral;
        } else if (eval == "bin_center") {
            spec.evaluation = KernelEvaluation::bin_center;
        } else {
            throw InvalidArgument("unknown PI evaluation mode '" + eval + "'");
        }
    } catch (const nlohmann::json::exception& ex) {
        throw InvalidArgument(std::string("bad PI spec JSON: ") + ex.what());
    }
    spec.validate();
    return spec;
}

std::filesystem::path save_pi(const PersistenceImage& pi, const std::filesystem::path& dir,
                              const std::string& stem) {
    const auto csv = dir / (stem + ".pi.csv");
    const auto sidecar = dir / (stem + ".pi.json");
    {
        std::ofstream out(csv);
        if (!out) throw IoError("cannot write '" + csv.string() + "'");
        write_pi_csv(pi, out);
    }
    std::ofstream out(sidecar);
    if (!out) throw IoError("cannot write '" + sidecar.string() + "'");
    out << pi_spec_to_json(pi.spec()) << '\n';
    return csv;
}

PersistenceImage load_pi(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open '" + csv_path.string() + "'");
    std::size_t rows = 0;
    std::size_t cols = 0;
    auto values = read_pi_csv(in, rows, cols);

    PIGridSpec spec;
    auto sidecar = csv_path;
    sidecar.replace_extension(".json");
    if (std::filesystem::exists(sidecar)) {
        std::ifstream s(sidecar);
        std::stringstream buf;
        buf << s.rdbuf();
        spec = pi_spec_from_json(buf.str());
    }
    if (spec.bins_y != rows || spec.bins_x != cols) {
        throw InvalidArgument("'" + csv_path.string() + "' is " + std::to_string(rows) + "x" +
                              std::to_string(cols) + " but its spec says " +
                              std::to_string(spec.bins_y) + "x" + std::to_string(spec.bins_x));
    }
    return PersistenceImage(spec, std::move(values));
}

}  // namespace mfid
