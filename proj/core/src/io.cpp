#include "cmbreak/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/dataflow_exception.hpp>
#include <boost/archive/iterators/transform_width.hpp>

namespace cmbreak {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void parse_error(const std::string& msg, Error::Context ctx = {}) {
    throw Error(ErrorCode::ParseError, msg, std::move(ctx));
}

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::size_t pos() const noexcept { return pos_; }

    void skip_space_and_comments() {
        while (pos_ < data_.size()) {
            if (data_[pos_] == '#') {
                while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
            } else if (std::isspace(data_[pos_])) {
                ++pos_;
            } else {
                return;
            }
        }
    }

    std::size_t number(const char* field) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        std::size_t value = 0;
        while (pos_ < data_.size() && std::isdigit(data_[pos_])) {
            value = value * 10 + static_cast<std::size_t>(data_[pos_] - '0');
            if (value > (1u << 30)) parse_error(std::string("PGM ") + field + " too large");
            ++pos_;
        }
        if (pos_ == start) parse_error(std::string("PGM header: expected ") + field);
        return value;
    }

    // exactly one whitespace byte separates maxval from the raster
    void single_whitespace() {
        if (pos_ >= data_.size() || !std::isspace(data_[pos_])) parse_error("PGM header: missing separator");
        ++pos_;
    }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

json f_triple_json(const FTriple& t) {
    return {{"x0", format_real(t.x0)},
            {"alpha1", format_real(t.params.alpha1)},
            {"alpha2", format_real(t.params.alpha2)}};
}

double real_field(const json& obj, const char* name) {
    if (!obj.is_object() || !obj.contains(name)) parse_error(std::string("key file: missing field ") + name);
    const json& v = obj.at(name);
    if (v.is_string()) return parse_real(v.get<std::string>());
    if (v.is_number()) return v.get<double>();
    parse_error(std::string("key file: field ") + name + " must be a decimal string");
}

FTriple f_triple_from(const json& j, const char* name) {
    if (!j.contains(name)) parse_error(std::string("key file: missing ") + name);
    const json& t = j.at(name);
    try {
        return {real_field(t, "x0"), FMapParams{real_field(t, "alpha1"), real_field(t, "alpha2")}};
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError) throw;
        parse_error(std::string("key file: ") + name + ": " + e.what());
    }
}

void put_u32_le(Bytes& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

// ---------------------------------------------------------------------------
// PGM

Image parse_pgm(std::span<const std::uint8_t> file) {
    if (file.size() < 2 || file[0] != 'P' || file[1] != '5') parse_error("not a binary PGM (expected P5)");
    HeaderReader r(file.subspan(2));
    const std::size_t width = r.number("width");
    const std::size_t height = r.number("height");
    const std::size_t maxval = r.number("maxval");
    if (maxval != 255) parse_error("PGM maxval must be 255", {{"maxval", std::to_string(maxval)}});
    if (width == 0 || height == 0) parse_error("PGM has an empty raster");
    r.single_whitespace();
    const std::size_t offset = 2 + r.pos();
    const std::size_t need = width * height;
    if (file.size() - offset < need) {
        parse_error("PGM payload truncated",
                    {{"expected", std::to_string(need)}, {"actual", std::to_string(file.size() - offset)}});
    }
    const auto payload = file.subspan(offset, need);
    return Image(height, width, Bytes(payload.begin(), payload.end()));
}

Image read_pgm(const fs::path& path) {
    const Bytes file = read_file(path);
    try {
        return parse_pgm(file);
    } catch (const Error& e) {
        Error::Context ctx = e.context();
        ctx["path"] = path.string();
        throw Error(e.code(), e.what(), std::move(ctx));
    }
}

Bytes encode_pgm(const Image& img) {
    const std::string header = "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) + "\n255\n";
    Bytes out(header.begin(), header.end());
    out.insert(out.end(), img.bytes().begin(), img.bytes().end());
    return out;
}

void write_pgm(const Image& img, const fs::path& path) { write_file(path, encode_pgm(img)); }

// ---------------------------------------------------------------------------
// Chosen images

Image make_constant_image(Dims dims, std::uint8_t value) { return Image(dims.rows, dims.cols, value); }

Image make_digit_plane_image(Dims dims, std::size_t plane) {
    const std::size_t n = dims.area();
    if (plane >= std::max<std::size_t>(1, digit_planes_needed(n))) {
        throw Error(ErrorCode::DomainError, "digit plane index beyond ceil(log256(MN))",
                    {{"plane", std::to_string(plane)}});
    }
    const std::size_t shift = 8 * plane;
    Bytes data(n);
    for (std::size_t k = 0; k < n; ++k) data[k] = static_cast<std::uint8_t>((k >> shift) & 0xFF);
    return Image(dims.rows, dims.cols, std::move(data));
}

// ---------------------------------------------------------------------------
// Keys

std::string format_real(double v) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

double parse_real(std::string_view text) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(v)) {
        parse_error("not a finite decimal real", {{"text", std::string(text)}});
    }
    return v;
}

json key_to_json(const SecretKey& key) {
    return {{"f1", f_triple_json(key.f1)},
            {"f2", f_triple_json(key.f2)},
            {"f3", f_triple_json(key.f3)},
            {"g",
             {{"y0", format_real(key.g.y0)},
              {"alpha3", format_real(key.g.params.alpha3)},
              {"alpha4", format_real(key.g.params.alpha4)}}},
            {"S", key.s}};
}

SecretKey key_from_json(const json& j) {
    if (!j.is_object()) parse_error("key file must be a JSON object");
    FTriple f1 = f_triple_from(j, "f1");
    FTriple f2 = f_triple_from(j, "f2");
    FTriple f3 = f_triple_from(j, "f3");
    if (!j.contains("g")) parse_error("key file: missing g");
    const json& g = j.at("g");
    std::optional<GTriple> gt;
    try {
        gt.emplace(GTriple{real_field(g, "y0"), GMapParams{real_field(g, "alpha3"), real_field(g, "alpha4")}});
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError) throw;
        parse_error(std::string("key file: g: ") + e.what());
    }
    if (!j.contains("S") || !j.at("S").is_number_integer()) parse_error("key file: S must be an integer");
    const auto s = j.at("S").get<std::int64_t>();
    if (s < 0 || s > 255) parse_error("key file: S must be in [0, 255]", {{"S", std::to_string(s)}});
    return {f1, f2, f3, *gt, static_cast<std::uint8_t>(s)};
}

SecretKey read_key(const fs::path& path) {
    const Bytes raw = read_file(path);
    const json j = json::parse(raw.begin(), raw.end(), nullptr, false);
    if (j.is_discarded()) parse_error("key file is not valid JSON", {{"path", path.string()}});
    return key_from_json(j);
}

void write_key(const SecretKey& key, const fs::path& path) { write_text(path, key_to_json(key).dump(2) + "\n"); }

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    using namespace boost::archive::iterators;
    using It = base64_from_binary<transform_width<const std::uint8_t*, 6, 8>>;
    std::string out(It(bytes.data()), It(bytes.data() + bytes.size()));
    out.append((3 - bytes.size() % 3) % 3, '=');
    return out;
}

Bytes base64_decode(std::string_view text) {
    using namespace boost::archive::iterators;
    using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
    if (text.size() % 4 != 0) parse_error("base64 length is not a multiple of 4");
    std::string padded(text);
    const auto pad = static_cast<std::size_t>(std::count(padded.end() - std::min<std::size_t>(2, padded.size()),
                                                         padded.end(), '='));
    std::replace(padded.end() - pad, padded.end(), '=', 'A');
    try {
        std::string raw(It(padded.cbegin()), It(padded.cend()));
        raw.erase(raw.size() - std::min(pad, raw.size()));
        return Bytes(raw.begin(), raw.end());
    } catch (const dataflow_exception&) {
        parse_error("invalid base64 text");
    }
}

void write_equivalent_key(const EquivalentKey& ek, const fs::path& json_path, const fs::path& perm_path) {
    Bytes perm;
    perm.reserve(ek.perm.size() * 4);
    for (std::uint32_t t : ek.perm) put_u32_le(perm, t);
    write_file(perm_path, perm);

    fs::path ref = perm_path;
    if (fs::absolute(perm_path).parent_path() == fs::absolute(json_path).parent_path()) ref = perm_path.filename();
    const json j = {{"format", "cmbreak-equivalent-key"},
                    {"version", 1},
                    {"rows", ek.dims.rows},
                    {"cols", ek.dims.cols},
                    {"phi3", base64_encode(ek.phi3_rep)},
                    {"phi4", base64_encode(ek.phi4_abs)},
                    {"perm_file", ref.string()}};
    write_text(json_path, j.dump(2) + "\n");
}

EquivalentKey read_equivalent_key(const fs::path& json_path) {
    const Bytes raw = read_file(json_path);
    const json j = json::parse(raw.begin(), raw.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) parse_error("equivalent key is not a JSON object");
    EquivalentKey ek;
    try {
        ek.dims = {j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>()};
        ek.phi3_rep = base64_decode(j.at("phi3").get<std::string>());
        ek.phi4_abs = base64_decode(j.at("phi4").get<std::string>());
        fs::path perm_path = j.at("perm_file").get<std::string>();
        if (perm_path.is_relative()) perm_path = json_path.parent_path() / perm_path;
        const Bytes perm = read_file(perm_path);
        if (perm.size() % 4 != 0) parse_error("permutation file length is not a multiple of 4");
        ek.perm.resize(perm.size() / 4);
        for (std::size_t i = 0; i < ek.perm.size(); ++i) {
            ek.perm[i] = std::uint32_t{perm[4 * i]} | std::uint32_t{perm[4 * i + 1]} << 8 |
                         std::uint32_t{perm[4 * i + 2]} << 16 | std::uint32_t{perm[4 * i + 3]} << 24;
        }
    } catch (const json::exception& e) {
        parse_error(std::string("equivalent key: ") + e.what());
    }
    ek.validate();
    return ek;
}

json transcript_to_json(const AttackTranscript& tr) {
    json phases = json::array();
    for (const auto& p : tr.phases) {
        phases.push_back({{"name", p.name}, {"ok", p.ok}, {"queries", p.queries}, {"detail", p.detail}});
    }
    return {{"rows", tr.dims.rows},
            {"cols", tr.dims.cols},
            {"total_queries", tr.total_queries()},
            {"queries", tr.queries},
            {"phases", phases}};
}

// ---------------------------------------------------------------------------
// Keystream dumps

void write_keystream_csv(std::span<const std::uint32_t> values, const fs::path& path) {
    std::string text;
    text.reserve(values.size() * 4);
    for (auto v : values) {
        text += std::to_string(v);
        text += '\n';
    }
    write_text(path, text);
}

void write_keystream_csv(std::span<const std::uint8_t> values, const fs::path& path) {
    const std::vector<std::uint32_t> widened(values.begin(), values.end());
    write_keystream_csv(std::span<const std::uint32_t>(widened), path);
}

std::vector<std::uint32_t> read_keystream_csv(const fs::path& path) {
    const Bytes raw = read_file(path);
    std::vector<std::uint32_t> out;
    std::istringstream in(std::string(raw.begin(), raw.end()));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::uint32_t v = 0;
        const auto [end, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
        if (ec != std::errc{} || end != line.data() + line.size()) {
            parse_error("keystream CSV: not a decimal integer", {{"line", std::to_string(lineno)}});
        }
        out.push_back(v);
    }
    return out;
}

// ---------------------------------------------------------------------------

Bytes read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open file for reading", {{"path", path.string()}});
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open file for writing", {{"path", path.string()}});
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "write failed", {{"path", path.string()}});
}

void write_text(const fs::path& path, std::string_view text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace cmbreak
