#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "cmbreak/chaos_core.hpp"
#include "cmbreak/cipher.hpp"
#include "cmbreak/cryptanalysis.hpp"
#include "cmbreak/diffusion.hpp"
#include "cmbreak/errors.hpp"
#include "cmbreak/io.hpp"
#include "cmbreak/randomness.hpp"

namespace cmbreak::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

[[noreturn]] void usage(const std::string& msg, Error::Context ctx = {}) {
    throw Error(ErrorCode::UsageError, msg, std::move(ctx));
}

template <typename T>
T parse_number(std::string_view text, const char* what) {
    T v{};
    if constexpr (std::is_floating_point_v<T>) {
        try {
            return static_cast<T>(parse_real(text));
        } catch (const Error&) {
            usage(std::string("malformed ") + what, {{"value", std::string(text)}});
        }
    } else {
        const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || end != text.data() + text.size()) {
            usage(std::string("malformed ") + what, {{"value", std::string(text)}});
        }
    }
    return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    for (std::size_t start = 0;;) {
        const std::size_t pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

/// "MxN": M rows, N columns.
Dims parse_dims(const std::string& text) {
    const auto parts = split(text, 'x');
    if (parts.size() != 2) usage("dimensions must look like MxN", {{"value", text}});
    const Dims d{parse_number<std::size_t>(parts[0], "row count"), parse_number<std::size_t>(parts[1], "column count")};
    if (d.area() == 0) usage("dimensions must be positive", {{"value", text}});
    return d;
}

/// "lo:hi:steps", or a single value for a one-point axis.
SweepAxis parse_axis(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() == 1) {
        const double v = parse_number<double>(parts[0], "axis value");
        return {v, v, 1};
    }
    if (parts.size() != 3) usage("axis must look like lo:hi:steps", {{"value", text}});
    const SweepAxis a{parse_number<double>(parts[0], "axis bound"), parse_number<double>(parts[1], "axis bound"),
                      parse_number<std::size_t>(parts[2], "axis steps")};
    if (a.steps == 0) usage("axis needs at least one step", {{"value", text}});
    return a;
}

PairSet parse_pairs(const std::string& text) {
    PairSet pairs;
    for (auto item : split(text, ',')) {
        const auto ab = split(item, ':');
        if (ab.size() != 2) usage("pairs must look like a:b,a:b,...", {{"value", text}});
        const auto a = parse_number<unsigned>(ab[0], "pair value");
        const auto b = parse_number<unsigned>(ab[1], "pair value");
        if (a > 255 || b > 255) usage("pair values must be bytes", {{"value", std::string(item)}});
        pairs.emplace_back(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b));
    }
    return pairs;
}

MapKind parse_map(const std::string& name) {
    if (name == "f") return MapKind::f;
    if (name == "g") return MapKind::g;
    return MapKind::logistic;
}

/// Relative output paths land under CMBREAK_OUTPUT_DIR when it is set.
fs::path output_path(const std::string& p) {
    fs::path path(p);
    if (const char* dir = std::getenv("CMBREAK_OUTPUT_DIR"); dir && *dir && path.is_relative()) {
        return fs::path(dir) / path;
    }
    return path;
}

std::string csv_real(double v) { return format_real(v); }

// ---------------------------------------------------------------------------

struct KeygenArgs {
    std::string out;
    std::optional<std::uint64_t> seed;
    bool exemplar = false;
    std::string dims;
    std::string dump_dir;
};

int run_keygen(const KeygenArgs& a, std::ostream& out) {
    if (!a.exemplar && !a.seed) usage("keygen needs --seed (or --exemplar for the exemplar key)");
    if (!a.dump_dir.empty() && a.dims.empty()) usage("--dump-dir needs --dims");
    const std::optional<Dims> dims = a.dims.empty() ? std::nullopt : std::optional(parse_dims(a.dims));

    SecretKey key = SecretKey::exemplar_key();
    std::size_t rejected = 0;
    std::optional<KeystreamSet> ks;
    if (!a.exemplar) {
        KeySampler sampler(*a.seed);
        for (;;) {
            key = sampler();
            if (!dims) break;
            try {
                ks = generate_keystreams(key, dims->rows, dims->cols);
                break;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::KeyRejected) throw;
                if (++rejected >= 1000) {
                    throw Error(ErrorCode::GeneratorExhausted, "no usable key in 1000 draws",
                                {{"rejected", std::to_string(rejected)}});
                }
            }
        }
    } else if (dims) {
        ks = generate_keystreams(key, dims->rows, dims->cols);
    }

    const fs::path key_path = output_path(a.out);
    write_key(key, key_path);
    json report = {{"key", key_path.string()}, {"rejected", rejected}};
    if (!a.dump_dir.empty()) {
        const fs::path dir = output_path(a.dump_dir);
        write_keystream_csv(std::span<const std::uint32_t>(ks->phi1), dir / "phi1.csv");
        write_keystream_csv(std::span<const std::uint32_t>(ks->phi2), dir / "phi2.csv");
        write_keystream_csv(std::span<const std::uint8_t>(ks->phi3), dir / "phi3.csv");
        write_keystream_csv(std::span<const std::uint8_t>(ks->phi4), dir / "phi4.csv");
        report["keystreams"] = dir.string();
    }
    out << report.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct CryptArgs {
    std::string key;
    std::string in;
    std::string out;
    bool raw = false;
};

int run_crypt(const CryptArgs& a, bool forward, std::ostream& out) {
    const SecretKey key = read_key(a.key);
    const Image img = a.raw ? Image::from_bytes(read_file(a.in)) : read_pgm(a.in);
    const Image res = forward ? encrypt(img, key) : decrypt(img, key);
    const fs::path dst = output_path(a.out);
    if (a.raw) {
        write_file(dst, res.bytes());
    } else {
        write_pgm(res, dst);
    }
    out << json{{"out", dst.string()}, {"rows", res.rows()}, {"cols", res.cols()}}.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct AttackArgs {
    std::string oracle;
    std::string key;
    std::string dims;
    std::string out;
    std::string perm_out;
    std::string transcript;
    std::string outbox;
    std::string inbox;
    std::string responder;
    double timeout = 60.0;
    std::string pairs;
    std::string decrypt_in;
    std::string decrypt_out;
};

int run_attack(const AttackArgs& a, std::ostream& out) {
    const Dims dims = parse_dims(a.dims);
    std::unique_ptr<EncryptionOracle> oracle;
    if (a.oracle == "in-process") {
        if (a.key.empty()) usage("the in-process oracle needs --key");
        oracle = std::make_unique<InProcessOracle>(read_key(a.key), dims);
    } else {
        if (a.outbox.empty() || a.inbox.empty()) usage("the file-exchange oracle needs --outbox and --inbox");
        FileExchangeOracle::Options opts;
        opts.outbox = output_path(a.outbox);
        opts.inbox = a.inbox;
        if (!a.responder.empty()) opts.responder = a.responder;
        if (!(a.timeout > 0)) usage("--timeout must be positive");
        opts.timeout = std::chrono::milliseconds(static_cast<long long>(a.timeout * 1000.0));
        oracle = std::make_unique<FileExchangeOracle>(dims, std::move(opts));
    }
    if (!a.decrypt_in.empty() && a.decrypt_out.empty()) usage("--decrypt needs --decrypt-out");

    AttackOptions opts;
    if (!a.pairs.empty()) opts.pairs = parse_pairs(a.pairs);

    const fs::path ek_path = output_path(a.out);
    fs::path perm_path = a.perm_out.empty() ? fs::path(ek_path).replace_extension(".perm") : output_path(a.perm_out);
    const std::optional<fs::path> tr_path =
        a.transcript.empty() ? std::nullopt : std::optional(output_path(a.transcript));

    AttackResult result;
    try {
        result = run_differential_attack(*oracle, opts);
    } catch (const AttackError& e) {
        if (tr_path) write_text(*tr_path, transcript_to_json(e.transcript()).dump(2) + "\n");
        throw;
    }
    write_equivalent_key(result.key, ek_path, perm_path);
    json report = transcript_to_json(result.transcript);
    if (tr_path) write_text(*tr_path, report.dump(2) + "\n");
    report["equivalent_key"] = ek_path.string();
    report["perm_file"] = perm_path.string();

    if (!a.decrypt_in.empty()) {
        const Image plain = decrypt_with_equivalent(read_pgm(a.decrypt_in), result.key);
        const fs::path dst = output_path(a.decrypt_out);
        write_pgm(plain, dst);
        report["decrypted"] = dst.string();
    }
    out << report.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct RandtestArgs {
    std::vector<std::string> generators;
    std::size_t batch = 100;
    std::size_t sample_bytes = 32768;
    double alpha = 0.01;
    std::optional<std::uint64_t> seed;
    std::string input;
    std::string report;
    std::string table;
    std::vector<std::string> ranges;
    std::size_t block_m = 100;
    std::size_t serial_m = 16;
    std::size_t apen_m = 10;
    std::string template_bits = "110001000";
};

void apply_range(KeyRanges& r, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) usage("--range must look like name=lo:hi", {{"value", spec}});
    const std::string name = spec.substr(0, eq);
    const auto bounds = split(std::string_view(spec).substr(eq + 1), ':');
    if (bounds.size() != 2) usage("--range must look like name=lo:hi", {{"value", spec}});
    const SampleRange sr{parse_number<double>(bounds[0], "range bound"), parse_number<double>(bounds[1], "range bound")};
    if (!(sr.lo <= sr.hi)) usage("range needs lo <= hi", {{"value", spec}});
    static const std::map<std::string, SampleRange KeyRanges::*> fields = {
        {"x0", &KeyRanges::x0},         {"alpha1", &KeyRanges::alpha1}, {"alpha2", &KeyRanges::alpha2},
        {"y0", &KeyRanges::y0},         {"alpha3", &KeyRanges::alpha3}, {"alpha4", &KeyRanges::alpha4},
    };
    const auto it = fields.find(name);
    if (it == fields.end()) usage("unknown range name", {{"name", name}});
    r.*(it->second) = sr;
}

json report_json(const SuiteReport& r, const TestParams& params) {
    json tests = json::array();
    for (TestId id : kAllTests) {
        tests.push_back({{"test", test_key(id)}, {"name", test_name(id, params)}, {"passed", r.passed_count(id)}});
    }
    return {{"generator", r.generator}, {"batch", r.batch},       {"sample_bytes", r.sample_bytes},
            {"alpha", r.alpha},         {"seed", r.seed},         {"rejected_keys", r.rejected_keys},
            {"tests", tests}};
}

int run_randtest(const RandtestArgs& a, std::ostream& out) {
    if (!a.seed) usage("randtest needs --seed");
    SuiteOptions opts;
    opts.batch = a.batch;
    opts.sample_bytes = a.sample_bytes;
    opts.alpha = a.alpha;
    opts.seed = *a.seed;
    opts.params.block_frequency_m = a.block_m;
    opts.params.serial_m = a.serial_m;
    opts.params.approximate_entropy_m = a.apen_m;
    opts.params.template_bits = a.template_bits;
    for (const auto& r : a.ranges) apply_range(opts.ranges, r);
    if (opts.batch == 0 || opts.sample_bytes == 0) usage("--batch and --sample-bytes must be positive");
    if (!(opts.alpha > 0 && opts.alpha < 1)) usage("--alpha must lie in (0, 1)");
    for (char c : a.template_bits) {
        if (c != '0' && c != '1') usage("--template must be a bit string", {{"value", a.template_bits}});
    }
    if (a.template_bits.empty()) usage("--template must not be empty");

    std::vector<SuiteReport> reports;
    for (const auto& g : a.generators) {
        SuiteReport r;
        if (g == "f") {
            r = run_suite(Generator::f_keystream, opts);
        } else if (g == "g") {
            r = run_suite(Generator::g_keystream, opts);
        } else if (g == "reference") {
            r = run_suite(Generator::external, opts, reference_source(opts.seed));
            r.generator = "reference";
        } else {
            if (a.input.empty()) usage("the file generator needs --input");
            const Bytes data = read_file(a.input);
            const std::size_t needed = opts.batch * opts.sample_bytes;
            if (data.size() < needed) {
                throw Error(ErrorCode::SequenceTooShort, "input file shorter than batch x sample bytes",
                            {{"required", std::to_string(needed)}, {"actual", std::to_string(data.size())}});
            }
            ByteSource src = [&data](std::size_t i, std::size_t n) {
                return Bytes(data.begin() + static_cast<std::ptrdiff_t>(i * n),
                             data.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
            };
            r = run_suite(Generator::external, opts, src);
            r.generator = "file";
        }
        reports.push_back(std::move(r));
    }

    const std::string table = format_table(reports, opts.params);
    if (!a.report.empty()) {
        json j = json::array();
        for (const auto& r : reports) j.push_back(report_json(r, opts.params));
        write_text(output_path(a.report), json{{"reports", j}}.dump(2) + "\n");
    }
    if (!a.table.empty()) write_text(output_path(a.table), table);
    out << table;
    return 0;
}

// ---------------------------------------------------------------------------

struct LyapunovArgs {
    std::string map = "f";
    std::string p1 = "1:4:50";
    std::string p2 = "1:5:50";
    double x0 = 25.687;
    std::size_t transient = 1000;
    std::size_t samples = 5000;
    std::string out;
    std::string report;
    std::optional<std::uint64_t> seed;
    double collapse_alpha3 = 61.522;
    double collapse_alpha4 = 257.26223;
};

int run_lyapunov(const LyapunovArgs& a, std::ostream& out) {
    if (!a.seed) usage("lyapunov needs --seed (it drives the collapse diagnostic)");
    const MapKind kind = parse_map(a.map);
    const LyapunovOptions opts{a.transient, a.samples};
    if (opts.samples < 100) usage("--samples must be at least 100");
    const SweepResult sweep = lyapunov_sweep(kind, parse_axis(a.p1), parse_axis(a.p2), a.x0, opts);

    static const std::map<MapKind, const char*> header = {
        {MapKind::f, "alpha1,alpha2"}, {MapKind::g, "alpha3,alpha4"}, {MapKind::logistic, "r,unused"}};
    std::string csv = std::string(header.at(kind)) + ",lambda,escaped\n";
    for (const auto& c : sweep.cells) {
        csv += csv_real(c.p1) + "," + csv_real(c.p2) + "," + (c.lambda ? csv_real(*c.lambda) : "") + "," +
               (c.escaped() ? "1" : "0") + "\n";
    }
    write_text(output_path(a.out), csv);

    const CollapseOptions copts;
    const double collapse = collapse_fraction(GMapParams{a.collapse_alpha3, a.collapse_alpha4}, *a.seed, copts);
    const json report = {
        {"map", a.map},
        {"x0", a.x0},
        {"transient", a.transient},
        {"samples", a.samples},
        {"cells", sweep.cells.size()},
        {"positive", sweep.positive_count},
        {"escaped", sweep.escaped_count},
        {"fraction_positive", sweep.fraction_positive()},
        {"collapse",
         {{"alpha3", a.collapse_alpha3},
          {"alpha4", a.collapse_alpha4},
          {"seed", *a.seed},
          {"trials", copts.trials},
          {"iterations", copts.iterations},
          {"threshold", copts.threshold},
          {"y0_max", copts.y0_max},
          {"fraction", collapse}}},
    };
    if (!a.report.empty()) write_text(output_path(a.report), report.dump(2) + "\n");
    out << report.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct GraphArgs {
    std::string map = "f";
    double p1 = 2.10155;
    double p2 = 3.569221;
    double lo = 0.0;
    double hi = 100.0;
    std::size_t samples = 1001;
    std::string out;
};

int run_graph(const GraphArgs& a, std::ostream& out) {
    const MapSpec map = make_map(parse_map(a.map), a.p1, a.p2);
    const auto pts = map_graph(map, a.lo, a.hi, a.samples);
    std::string csv = "x,value,escaped\n";
    std::size_t escaped = 0;
    for (const auto& p : pts) {
        csv += csv_real(p.x) + "," + (p.escaped ? "" : csv_real(p.value)) + "," + (p.escaped ? "1" : "0") + "\n";
        escaped += p.escaped;
    }
    const fs::path dst = output_path(a.out);
    write_text(dst, csv);
    out << json{{"out", dst.string()}, {"samples", pts.size()}, {"escaped", escaped}}.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct DiffuseArgs {
    std::string key;
    std::string in;
    std::optional<std::size_t> digit_plane;
    std::string dims;
    std::size_t row = 0;
    std::size_t col = 0;
    unsigned bit = 0;
    std::string out_dir;
};

int run_diffuse(const DiffuseArgs& a, std::ostream& out) {
    if (a.in.empty() == !a.digit_plane) usage("diffuse needs exactly one of --in or --digit-plane");
    if (a.digit_plane && a.dims.empty()) usage("--digit-plane needs --dims");
    const SecretKey key = read_key(a.key);
    const Image img = a.digit_plane ? make_digit_plane_image(parse_dims(a.dims), *a.digit_plane) : read_pgm(a.in);
    const DiffReport r = bit_flip_diff(key, img, a.row, a.col, a.bit);
    const PlaneSummary s = plane_change_summary(r);

    const fs::path dir = output_path(a.out_dir);
    json planes = json::array();
    for (const auto& row : s.rows) {
        planes.push_back({{"plane", row.plane}, {"count", row.count}, {"fraction", row.fraction}});
        write_pgm(plane_mask_image(r, row.plane), dir / ("plane" + std::to_string(row.plane) + ".pgm"));
    }
    json summary = {{"rows", r.dims.rows},
                    {"cols", r.dims.cols},
                    {"row", r.row},
                    {"col", r.col},
                    {"bit", r.bit},
                    {"planes", planes},
                    {"lowest_changed", s.lowest_changed ? json(*s.lowest_changed) : json(nullptr)},
                    {"first_changed", r.first_changed ? json(*r.first_changed) : json(nullptr)},
                    {"changed_bits", r.changed_bits()},
                    {"changed_fraction", r.changed_fraction()}};
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    out << summary.dump(2) << "\n";
    return 0;
}

void report_error(std::ostream& err, std::string_view code, const std::string& message,
                  const Error::Context& context = {}) {
    err << json{{"code", code}, {"message", message}, {"context", context}}.dump() << "\n";
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Composition-map image cipher workbench: cipher, differential attack and analyses", "cmbreak"};
    app.require_subcommand(1);
    app.fallthrough(false);

    const auto maps = CLI::IsMember({"f", "g", "logistic"});

    KeygenArgs kg;
    auto* keygen = app.add_subcommand("keygen", "Write a key file (random from --seed, or the exemplar key)");
    keygen->add_option("--out", kg.out, "Key file to write")->required();
    auto* kg_seed = keygen->add_option("--seed", kg.seed, "Sampler seed");
    keygen->add_flag("--exemplar", kg.exemplar, "Use the exemplar key")->excludes(kg_seed);
    keygen->add_option("--dims", kg.dims, "Resample until the key works at MxN");
    keygen->add_option("--dump-dir", kg.dump_dir, "Also write phi1..phi4 CSV files for --dims");

    CryptArgs enc, dec;
    auto* encrypt_cmd = app.add_subcommand("encrypt", "Encrypt a PGM image (or raw bytes with --raw)");
    auto* decrypt_cmd = app.add_subcommand("decrypt", "Decrypt a PGM image (or raw bytes with --raw)");
    for (auto [cmd, a] : {std::pair{encrypt_cmd, &enc}, std::pair{decrypt_cmd, &dec}}) {
        cmd->add_option("--key", a->key, "Key file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--in", a->in, "Input file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", a->out, "Output file")->required();
        cmd->add_flag("--raw", a->raw, "Treat files as raw bytes (a 1 x L image)");
    }

    AttackArgs at;
    auto* attack = app.add_subcommand("attack", "Run the differential chosen-plaintext attack");
    attack->add_option("--oracle", at.oracle, "Oracle binding")
        ->required()
        ->check(CLI::IsMember({"in-process", "file-exchange"}));
    attack->add_option("--key", at.key, "Hidden key (in-process oracle)")->check(CLI::ExistingFile);
    attack->add_option("--dims", at.dims, "Image size MxN")->required();
    attack->add_option("--out", at.out, "Equivalent key JSON")->required();
    attack->add_option("--perm-out", at.perm_out, "Permutation file (default: --out with .perm)");
    attack->add_option("--transcript", at.transcript, "Transcript JSON");
    attack->add_option("--outbox", at.outbox, "Directory for chosen plaintexts (file exchange)");
    attack->add_option("--inbox", at.inbox, "Directory for cipher answers (file exchange)");
    attack->add_option("--responder", at.responder, "Command run per query; {in} and {out} are substituted");
    attack->add_option("--timeout", at.timeout, "Seconds to wait for each answer")->capture_default_str();
    attack->add_option("--pairs", at.pairs, "Constant-image pairs, e.g. 9:127,1:52,33:65");
    attack->add_option("--decrypt", at.decrypt_in, "Cipher image to decrypt with the recovered key")
        ->check(CLI::ExistingFile);
    attack->add_option("--decrypt-out", at.decrypt_out, "Where to write the decrypted image");

    RandtestArgs rt;
    auto* randtest = app.add_subcommand("randtest", "Run the nine-test battery over keystream samples");
    randtest->add_option("--generator", rt.generators, "f, g, reference or file (repeatable)")
        ->required()
        ->delimiter(',')
        ->check(CLI::IsMember({"f", "g", "reference", "file"}));
    randtest->add_option("--batch", rt.batch, "Samples per generator")->capture_default_str();
    randtest->add_option("--sample-bytes", rt.sample_bytes, "Bytes per sample")->capture_default_str();
    randtest->add_option("--alpha", rt.alpha, "Significance level")->capture_default_str();
    randtest->add_option("--seed", rt.seed, "Key sampler / reference RNG seed");
    randtest->add_option("--input", rt.input, "Byte file for the file generator")->check(CLI::ExistingFile);
    randtest->add_option("--report", rt.report, "JSON report");
    randtest->add_option("--table", rt.table, "Also write the table to this file");
    randtest->add_option("--range", rt.ranges, "Override a sampler range: name=lo:hi (x0, alpha1..alpha4, y0)");
    randtest->add_option("--block-m", rt.block_m, "Block Frequency block length")->capture_default_str();
    randtest->add_option("--serial-m", rt.serial_m, "Serial pattern length")->capture_default_str();
    randtest->add_option("--apen-m", rt.apen_m, "Approximate Entropy pattern length")->capture_default_str();
    randtest->add_option("--template", rt.template_bits, "Non-overlapping template")->capture_default_str();

    LyapunovArgs ly;
    auto* lyapunov = app.add_subcommand("lyapunov", "Lyapunov exponent sweep over a parameter grid");
    lyapunov->add_option("--map", ly.map, "Map")->check(maps)->capture_default_str();
    lyapunov->add_option("--p1", ly.p1, "First parameter axis lo:hi:steps")->capture_default_str();
    lyapunov->add_option("--p2", ly.p2, "Second parameter axis lo:hi:steps")->capture_default_str();
    lyapunov->add_option("--x0", ly.x0, "Initial condition")->capture_default_str();
    lyapunov->add_option("--transient", ly.transient, "Discarded iterations")->capture_default_str();
    lyapunov->add_option("--samples", ly.samples, "Averaged iterations")->capture_default_str();
    lyapunov->add_option("--out", ly.out, "CSV output")->required();
    lyapunov->add_option("--report", ly.report, "JSON summary");
    lyapunov->add_option("--seed", ly.seed, "Seed for the collapse diagnostic");
    lyapunov->add_option("--collapse-alpha3", ly.collapse_alpha3, "g parameter for the collapse diagnostic")
        ->capture_default_str();
    lyapunov->add_option("--collapse-alpha4", ly.collapse_alpha4, "g parameter for the collapse diagnostic")
        ->capture_default_str();

    GraphArgs gr;
    auto* graph = app.add_subcommand("graph", "Sample a map over an interval");
    graph->add_option("--map", gr.map, "Map")->check(maps)->capture_default_str();
    graph->add_option("--p1", gr.p1, "alpha1 / alpha3 / r")->capture_default_str();
    graph->add_option("--p2", gr.p2, "alpha2 / alpha4")->capture_default_str();
    graph->add_option("--lo", gr.lo, "Interval start")->capture_default_str();
    graph->add_option("--hi", gr.hi, "Interval end")->capture_default_str();
    graph->add_option("--samples", gr.samples, "Number of points")->capture_default_str();
    graph->add_option("--out", gr.out, "CSV output")->required();

    DiffuseArgs df;
    auto* diffuse = app.add_subcommand("diffuse", "Flip one plaintext bit and map the changed cipher bits");
    diffuse->add_option("--key", df.key, "Key file")->required()->check(CLI::ExistingFile);
    diffuse->add_option("--in", df.in, "Plain image")->check(CLI::ExistingFile);
    diffuse->add_option("--digit-plane", df.digit_plane, "Use chosen digit-plane image j instead of --in");
    diffuse->add_option("--dims", df.dims, "Size for --digit-plane, MxN");
    diffuse->add_option("--row", df.row, "Pixel row")->required();
    diffuse->add_option("--col", df.col, "Pixel column")->required();
    diffuse->add_option("--bit", df.bit, "Bit level, 0 = least significant")->required();
    diffuse->add_option("--out-dir", df.out_dir, "Directory for summary.json and plane masks")->required();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    if (argv.empty()) argv.push_back("cmbreak");

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        report_error(err, to_string(ErrorCode::UsageError), e.what());
        return 2;
    }

    try {
        if (*keygen) return run_keygen(kg, out);
        if (*encrypt_cmd) return run_crypt(enc, true, out);
        if (*decrypt_cmd) return run_crypt(dec, false, out);
        if (*attack) return run_attack(at, out);
        if (*randtest) return run_randtest(rt, out);
        if (*lyapunov) return run_lyapunov(ly, out);
        if (*graph) return run_graph(gr, out);
        if (*diffuse) return run_diffuse(df, out);
    } catch (const Error& e) {
        report_error(err, to_string(e.code()), e.what(), e.context());
        return e.code() == ErrorCode::UsageError ? 2 : 1;
    } catch (const fs::filesystem_error& e) {
        report_error(err, to_string(ErrorCode::IoError), e.what(), {{"path", e.path1().string()}});
        return 1;
    } catch (const std::exception& e) {
        report_error(err, "InternalError", e.what());
        return 1;
    }
    report_error(err, to_string(ErrorCode::UsageError), "no subcommand selected");
    return 2;
}

}  // namespace cmbreak::cli
