#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "trackcast/errors.hpp"
#include "trackcast/trackgen/dataset.hpp"

namespace trackcast::trackgen {

namespace fs = std::filesystem;

std::string format_real(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

void write_header(std::ostream& out, std::size_t L) {
    out << "t,channel";
    for (std::size_t l = 0; l < L; ++l) out << ",l" << l;
    out << '\n';
}

// Rows of a (T, C, L) tensor, or of a (C, L) tensor with t written as "-".
void write_rows(const fs::path& path, const nn::Tensor& t) {
    auto out = open_out(path);
    const bool temporal = t.rank() == 3;
    const std::size_t T = temporal ? t.dim(0) : 1;
    const std::size_t C = temporal ? t.dim(1) : t.dim(0);
    const std::size_t L = t.dim(t.rank() - 1);
    write_header(out, L);
    const double* p = t.data();
    for (std::size_t i = 0; i < T; ++i) {
        for (std::size_t c = 0; c < C; ++c) {
            if (temporal) out << i; else out << '-';
            out << ',' << c;
            for (std::size_t l = 0; l < L; ++l) out << ',' << format_real(*p++);
            out << '\n';
        }
    }
}

nn::Tensor as_channels(const nn::Tensor& t) {
    // (T, L) -> (T, 1, L) so single-channel sources share the row layout.
    return nn::Tensor({t.dim(0), 1, t.dim(1)}, t.storage());
}

class CsvReader {
public:
    explicit CsvReader(fs::path path) : path_(std::move(path)), in_(path_, std::ios::binary) {
        if (!in_) throw ParseError(path_.string() + ": cannot open");
    }

    bool next() {
        if (!std::getline(in_, line_)) return false;
        ++line_no_;
        if (!line_.empty() && line_.back() == '\r') line_.pop_back();
        fields_.clear();
        std::size_t start = 0;
        while (true) {
            const auto comma = line_.find(',', start);
            fields_.push_back(std::string_view(line_).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return true;
    }

    [[noreturn]] void fail(const std::string& message, std::optional<std::size_t> field = std::nullopt) const {
        std::string where = path_.filename().string();
        if (path_.parent_path().filename() == "exogenous") where = "exogenous/" + where;
        where += ":" + std::to_string(line_no_);
        if (field) where += ": field " + std::to_string(*field + 1);
        throw ParseError(where + ": " + message);
    }

    std::size_t count() const { return fields_.size(); }
    std::string_view field(std::size_t i) const { return fields_[i]; }

    double real(std::size_t i) const {
        double v = 0.0;
        const auto f = fields_[i];
        auto res = std::from_chars(f.data(), f.data() + f.size(), v);
        if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
            fail("'" + std::string(f) + "' is not a number", i);
        }
        return v;
    }

    std::size_t index(std::size_t i) const {
        std::size_t v = 0;
        const auto f = fields_[i];
        auto res = std::from_chars(f.data(), f.data() + f.size(), v);
        if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
            fail("'" + std::string(f) + "' is not a non-negative integer", i);
        }
        return v;
    }

private:
    fs::path path_;
    std::ifstream in_;
    std::string line_;
    std::size_t line_no_ = 0;
    std::vector<std::string_view> fields_;
};

enum class Check { real, binary, category };

// Reads rows "t,channel,values" for t in [0, T) (or "-" if T == 0) and
// channel in [0, C) in that order.
nn::Tensor read_rows(const fs::path& path, std::size_t T, std::size_t C, std::size_t L,
                     Check check = Check::real) {
    CsvReader csv(path);
    if (!csv.next()) csv.fail("missing header");
    if (csv.count() != L + 2 || csv.field(0) != "t" || csv.field(1) != "channel") {
        csv.fail("header must be t,channel followed by " + std::to_string(L) + " positions");
    }
    const bool temporal = T > 0;
    const std::size_t rows = temporal ? T : 1;
    nn::Tensor out({rows * C, L});
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t c = 0; c < C; ++c) {
            if (!csv.next()) csv.fail("expected " + std::to_string(rows * C) + " rows, file ends early");
            if (csv.count() != L + 2) {
                csv.fail("expected " + std::to_string(L + 2) + " fields, found " + std::to_string(csv.count()));
            }
            if (temporal) {
                if (csv.index(0) != i) csv.fail("expected t = " + std::to_string(i), 0);
            } else if (csv.field(0) != "-") {
                csv.fail("spatial-only source expects t = -", 0);
            }
            if (csv.index(1) != c) csv.fail("expected channel " + std::to_string(c), 1);
            for (std::size_t l = 0; l < L; ++l) {
                const double v = csv.real(l + 2);
                const std::string where = (temporal ? "t=" + std::to_string(i) + ", " : std::string()) +
                                          "channel " + std::to_string(c) + ", l=" + std::to_string(l);
                if (check == Check::binary && v != 0.0 && v != 1.0) {
                    csv.fail("value " + std::string(csv.field(l + 2)) + " at " + where + " is not 0 or 1", l + 2);
                }
                if (check == Check::category && (v != std::floor(v) || v < 0.0 || v >= exo::kStructureTypes)) {
                    csv.fail("category " + std::string(csv.field(l + 2)) + " at " + where + " outside 0..4", l + 2);
                }
                out(i * C + c, l) = v;
            }
        }
    }
    if (csv.next()) csv.fail("unexpected extra row");
    if (temporal) return nn::Tensor({T, C, L}, out.storage());
    return out;
}

std::map<std::string, std::string> read_meta(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string() + ": cannot open");
    std::map<std::string, std::string> meta;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const auto space = line.find(' ');
        if (space == std::string::npos) throw ParseError("meta:" + std::to_string(n) + ": expected '<key> <value>'");
        meta[line.substr(0, space)] = line.substr(space + 1);
    }
    return meta;
}

std::size_t meta_size(const std::map<std::string, std::string>& meta, const std::string& key) {
    auto it = meta.find(key);
    if (it == meta.end()) throw ParseError("meta: missing field '" + key + "'");
    std::size_t v = 0;
    const auto& s = it->second;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError("meta: field '" + key + "' is not an integer: " + s);
    }
    return v;
}

} // namespace

void write_dataset(const TrackDataset& ds, const fs::path& dir) {
    ds.check();
    fs::create_directories(dir / "exogenous");
    const std::size_t T = ds.inspections(), L = ds.positions();
    {
        auto out = open_out(dir / "meta");
        out << "format trackcast-dataset\n"
            << "version " << kDatasetFormatVersion << '\n'
            << "positions " << L << '\n'
            << "inspections " << T << '\n'
            << "ground_truth " << (ds.has_ground_truth() ? 1 : 0) << '\n'
            << "provenance " << ds.provenance << '\n';
    }
    {
        auto out = open_out(dir / "dates.csv");
        out << "t,day\n";
        for (std::size_t t = 0; t < T; ++t) out << t << ',' << format_real(ds.dates[t]) << '\n';
    }
    write_rows(dir / "irregularities.csv", ds.irregularities);
    const auto& e = ds.exogenous;
    write_rows(dir / "exogenous" / "maintenance.csv", e.maintenance);
    nn::Tensor structure({1, L});
    for (std::size_t l = 0; l < L; ++l) structure(0, l) = e.under_structure[l];
    write_rows(dir / "exogenous" / "under_structure.csv", structure);
    write_rows(dir / "exogenous" / "rail_joint.csv", e.rail_joint);
    write_rows(dir / "exogenous" / "ballast_age.csv", as_channels(e.ballast_age));
    write_rows(dir / "exogenous" / "tonnage.csv", as_channels(e.tonnage));
    write_rows(dir / "exogenous" / "rainfall.csv", e.rainfall);
    if (ds.has_ground_truth()) {
        write_rows(dir / "ground_truth_u.csv", ds.ground_truth_u);
    } else if (fs::exists(dir / "ground_truth_u.csv")) {
        fs::remove(dir / "ground_truth_u.csv");
    }
}

TrackDataset read_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ParseError(dir.string() + ": not a dataset directory");
    const auto meta = read_meta(dir / "meta");
    if (meta.count("format") == 0 || meta.at("format") != "trackcast-dataset") {
        throw ParseError("meta: field 'format' must be trackcast-dataset");
    }
    if (meta_size(meta, "version") != static_cast<std::size_t>(kDatasetFormatVersion)) {
        throw ParseError("meta: unsupported version " + meta.at("version"));
    }
    const std::size_t L = meta_size(meta, "positions");
    const std::size_t T = meta_size(meta, "inspections");
    const bool truth = meta_size(meta, "ground_truth") != 0;
    if (L == 0 || T == 0) throw ParseError("meta: positions and inspections must be positive");

    TrackDataset ds;
    if (auto it = meta.find("provenance"); it != meta.end()) ds.provenance = it->second;
    {
        CsvReader csv(dir / "dates.csv");
        if (!csv.next() || csv.count() != 2 || csv.field(0) != "t" || csv.field(1) != "day") {
            csv.fail("header must be t,day");
        }
        for (std::size_t t = 0; t < T; ++t) {
            if (!csv.next()) csv.fail("expected " + std::to_string(T) + " dates, file ends early");
            if (csv.count() != 2) csv.fail("expected 2 fields");
            if (csv.index(0) != t) csv.fail("expected t = " + std::to_string(t), 0);
            const double day = csv.real(1);
            if (t > 0 && !(day > ds.dates.back())) csv.fail("dates must be strictly increasing", 1);
            ds.dates.push_back(day);
        }
        if (csv.next()) csv.fail("unexpected extra row");
    }
    ds.irregularities = read_rows(dir / "irregularities.csv", T, kIrregularityChannels, L);

    auto& e = ds.exogenous;
    e.inspections = T;
    e.positions = L;
    const auto ex = dir / "exogenous";
    e.maintenance = read_rows(ex / "maintenance.csv", T, exo::kMaintenanceCategories, L, Check::binary);
    const auto structure = read_rows(ex / "under_structure.csv", 0, 1, L, Check::category);
    e.under_structure.resize(L);
    for (std::size_t l = 0; l < L; ++l) e.under_structure[l] = static_cast<std::uint8_t>(structure(0, l));
    e.rail_joint = read_rows(ex / "rail_joint.csv", 0, exo::kJointTypes, L, Check::binary);
    e.ballast_age = nn::Tensor({T, L}, read_rows(ex / "ballast_age.csv", T, 1, L).storage());
    e.tonnage = nn::Tensor({T, L}, read_rows(ex / "tonnage.csv", T, 1, L).storage());
    e.rainfall = read_rows(ex / "rainfall.csv", T, exo::kRainfallChannels, L);
    if (auto issues = exo::validate(e); !issues.empty()) {
        throw ParseError("exogenous: " + issues.front().to_line());
    }
    if (truth) ds.ground_truth_u = read_rows(dir / "ground_truth_u.csv", T, kTargetChannels, L);
    return ds;
}

} // namespace trackcast::trackgen
