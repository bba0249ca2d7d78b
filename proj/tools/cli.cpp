#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>

#include "specwb/continuum.hpp"
#include "specwb/indices.hpp"
#include "specwb/io.hpp"
#include "specwb/nri.hpp"
#include "specwb/parallel.hpp"
#include "specwb/preprocess.hpp"
#include "specwb/unmix.hpp"

namespace fs = std::filesystem;

namespace specwb::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<double> parseList(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        std::string item = text.substr(start, end - start);
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        double v = 0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
            throw UsageError(flag + ": '" + item + "' is not a number");
        out.push_back(v);
        start = end + 1;
    }
    return out;
}

std::vector<std::string> parseNames(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        if (end > start) out.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

EnviDataType parseDataType(const std::string& text) {
    const std::string t = lower(text);
    if (t == "float64" || t == "5") return EnviDataType::Float64;
    if (t == "float32" || t == "4") return EnviDataType::Float32;
    if (t == "int16" || t == "2") return EnviDataType::Int16;
    if (t == "uint16" || t == "12") return EnviDataType::UInt16;
    throw UsageError("unknown data type '" + text + "' (expected float64, float32, int16 or uint16)");
}

// ---------------------------------------------------------------------------
// Input and output
// ---------------------------------------------------------------------------

struct Loaded {
    Speclib lib;
    std::optional<CubeDims> dims;
};

bool isCsv(const fs::path& p) { return lower(p.extension().string()) == ".csv"; }

Loaded load(const fs::path& path) {
    if (!fs::exists(path)) throw Error("input not found: " + path.string());
    if (!isCsv(path)) {
        const fs::path hdr = enviHeaderPathFor(path);
        if (fs::exists(hdr)) {
            const EnviHeader h = readEnviHeader(hdr);
            return {readEnviCube(path, hdr), CubeDims{h.samples, h.lines}};
        }
    }
    return {readCsvSpeclib(path), std::nullopt};
}

struct OutputFormat {
    EnviDataType data_type = EnviDataType::Float64;
    Interleave interleave = Interleave::BSQ;
};

void save(const Speclib& s, const std::string& path, std::optional<CubeDims> dims, std::ostream& out,
          const OutputFormat& format = {}) {
    if (path.empty()) {
        writeCsvSpeclib(s, out);
        return;
    }
    if (isCsv(path)) {
        writeCsvSpeclib(s, fs::path(path));
        return;
    }
    if (!dims || dims->samples * dims->lines != s.samples()) dims = CubeDims{s.samples(), 1};
    writeEnviCube(s, *dims, path, format.data_type, format.interleave);
}

void writeTable(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& body) {
    if (path.empty()) {
        body(out);
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path);
    body(f);
    if (!f) throw Error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Row-local stages. Each one can run directly or as a kernel of `chunked`.
// ---------------------------------------------------------------------------

struct FilterOpts {
    std::string method = "sgolay";
    int window = 15;
    int order = 3;
    double fraction = 0.1;
};

void addOptions(CLI::App* app, FilterOpts& o) {
    app->add_option("--method", o.method, "sgolay, mean, lowess or spline")->capture_default_str();
    app->add_option("--window", o.window, "window length in bands (odd)")->capture_default_str();
    app->add_option("--order", o.order, "Savitzky-Golay polynomial order")->capture_default_str();
    app->add_option("--fraction", o.fraction, "lowess span as a fraction of the bands")->capture_default_str();
}

Kernel makeKernel(const FilterOpts& o) {
    FilterSpec spec;
    spec.method = parseFilterMethod(o.method);
    spec.window = o.window;
    spec.poly_order = o.order;
    spec.fraction = o.fraction;
    spec.validate();
    return [spec](const Speclib& s) -> KernelOutput { return noiseFilter(s, spec); };
}

struct DerivOpts {
    int order = 1;
};

void addOptions(CLI::App* app, DerivOpts& o) {
    app->add_option("--order", o.order, "1 or 2")->capture_default_str()->check(CLI::Range(1, 2));
}

Kernel makeKernel(const DerivOpts& o) {
    const int order = o.order;
    return [order](const Speclib& s) -> KernelOutput { return derivative(s, order); };
}

struct ResampleOpts {
    std::string centers;
    std::string fwhm;
    std::string response;
};

void addOptions(CLI::App* app, ResampleOpts& o) {
    auto* c = app->add_option("--centers", o.centers, "target band centers, comma separated (nm)");
    auto* f = app->add_option("--fwhm", o.fwhm, "target fwhm, one value or one per center (nm)");
    auto* r = app->add_option("--response", o.response, "spectral response curves, one row per target band");
    c->excludes(r);
    f->excludes(r);
    f->needs(c);
    c->needs(f);
}

Kernel makeKernel(const ResampleOpts& o) {
    if (!o.response.empty()) {
        auto response = std::make_shared<const Speclib>(load(o.response).lib);
        return [response](const Speclib& s) -> KernelOutput { return spectralResample(s, *response); };
    }
    if (o.centers.empty()) throw UsageError("resample needs --centers/--fwhm or --response");
    const auto centers = parseList(o.centers, "--centers");
    auto widths = parseList(o.fwhm, "--fwhm");
    if (widths.size() == 1) widths.assign(centers.size(), widths.front());
    if (widths.size() != centers.size()) throw UsageError("--fwhm needs one value or one per center");
    std::vector<SensorBandSpec> bands;
    for (std::size_t k = 0; k < centers.size(); ++k) bands.push_back({centers[k], widths[k]});
    return [bands](const Speclib& s) -> KernelOutput { return spectralResample(s, bands); };
}

struct TransformOpts {
    std::string method = "ch";
    std::string out = "bd";
};

void addOptions(CLI::App* app, TransformOpts& o) {
    app->add_option("--method", o.method, "ch (convex hull) or sh (segmented hull)")->capture_default_str();
    app->add_option("--out", o.out, "raw, bd or ratio")->capture_default_str();
}

Kernel makeKernel(const TransformOpts& o) {
    const HullMethod method = parseHullMethod(o.method);
    const TransformOut out = parseTransformOut(o.out);
    return [method, out](const Speclib& s) -> KernelOutput { return transformSpeclib(s, method, out).spectra; };
}

struct IndexOpts {
    std::string name;
    std::string expr;
};

void addOptions(CLI::App* app, IndexOpts& o) {
    auto* n = app->add_option("--name", o.name, "catalog index name");
    auto* e = app->add_option("--expr", o.expr, "band-math expression, e.g. (R800-R680)/(R800+R680)");
    n->excludes(e);
}

IndexExpr indexExpression(const IndexOpts& o) {
    if (o.name.empty() == o.expr.empty()) throw UsageError("index needs exactly one of --name or --expr");
    if (!o.expr.empty()) return parseIndex(o.expr);
    for (const auto* catalog : {&vegetationIndexCatalog(), &soilIndexCatalog()})
        for (const auto& e : *catalog)
            if (e.name == o.name) return parseIndex(e.formula);
    std::string names;
    for (const auto* catalog : {&vegetationIndexCatalog(), &soilIndexCatalog()})
        for (const auto& e : *catalog) names += (names.empty() ? "" : ", ") + e.name;
    throw Error("unknown index '" + o.name + "'; available: " + names);
}

Kernel makeKernel(const IndexOpts& o) {
    const IndexExpr expr = indexExpression(o);
    return [expr](const Speclib& s) -> KernelOutput {
        const IndexValues v = evalIndex(expr, s);
        Matrix m(static_cast<Eigen::Index>(v.values.size()), 1);
        for (std::size_t k = 0; k < v.values.size(); ++k) m(static_cast<Eigen::Index>(k), 0) = v.values[k];
        return m;
    };
}

template <typename Opts>
Kernel parseKernelWith(const std::string& name, const std::string& rest) {
    CLI::App app{"kernel " + name, name};
    Opts opts;
    addOptions(&app, opts);
    try {
        app.parse(rest, false);
    } catch (const CLI::ParseError& e) {
        throw UsageError("kernel '" + name + "': " + e.what());
    }
    return makeKernel(opts);
}

Kernel parseKernel(const std::string& spec) {
    const std::size_t start = spec.find_first_not_of(" \t");
    if (start == std::string::npos) throw UsageError("empty --kernel");
    const std::size_t end = std::min(spec.find_first_of(" \t", start), spec.size());
    const std::string name = spec.substr(start, end - start);
    const std::string rest = spec.substr(end);
    if (name == "filter") return parseKernelWith<FilterOpts>(name, rest);
    if (name == "deriv") return parseKernelWith<DerivOpts>(name, rest);
    if (name == "resample") return parseKernelWith<ResampleOpts>(name, rest);
    if (name == "transform") return parseKernelWith<TransformOpts>(name, rest);
    if (name == "index") return parseKernelWith<IndexOpts>(name, rest);
    throw UsageError("kernel '" + name + "' is not row-local (use filter, deriv, resample, transform or index)");
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct Io {
    std::string input;
    std::string output;
};

void addIo(CLI::App* app, Io& io, bool output_required = false) {
    app->add_option("input", io.input, "input CSV or ENVI data file")->required();
    auto* o = app->add_option("output", io.output, output_required ? "output file" : "output file (stdout when omitted)");
    if (output_required) o->required();
}

class Cli {
public:
    Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {
        app_.require_subcommand(1, 1);
        app_.set_help_all_flag("--help-all", "help for every subcommand");
        addInfo();
        addConvert();
        addStage<FilterOpts>("filter", "noise filtering");
        addStage<DerivOpts>("deriv", "first or second derivative");
        addStage<ResampleOpts>("resample", "resample to sensor bands");
        addTransform();
        addFeatures();
        addIndex();
        addRedEdge();
        addNri();
        addGlm();
        addCorrelogram();
        addRfe();
        addExportMl();
        addUnmix();
        addChunked();
    }

    int run(const std::vector<std::string>& args) {
        std::vector<const char*> argv{"specwb"};
        for (const auto& a : args) argv.push_back(a.c_str());
        try {
            app_.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::CallForHelp&) {
            out_ << (app_.get_subcommands().empty() ? app_.help() : app_.get_subcommands().front()->help());
            return 0;
        } catch (const CLI::CallForAllHelp&) {
            out_ << app_.help("", CLI::AppFormatMode::All);
            return 0;
        } catch (const CLI::ParseError& e) {
            err_ << "error: " << e.what() << "\n\n" << app_.help();
            return 1;
        }
        try {
            for (auto& [sub, handler] : handlers_)
                if (sub->parsed()) handler();
            return 0;
        } catch (const UsageError& e) {
            err_ << "error: " << e.what() << '\n';
            return 1;
        } catch (const std::exception& e) {
            err_ << "error: " << e.what() << '\n';
            return 2;
        }
    }

private:
    CLI::App* command(const std::string& name, const std::string& description, std::function<void()> handler) {
        CLI::App* sub = app_.add_subcommand(name, description);
        handlers_.emplace_back(sub, std::move(handler));
        return sub;
    }

    template <typename Opts>
    void addStage(const std::string& name, const std::string& description) {
        auto io = std::make_shared<Io>();
        auto opts = std::make_shared<Opts>();
        auto* sub = command(name, description, [this, io, opts] {
            const Kernel k = makeKernel(*opts);
            const Loaded in = load(io->input);
            save(std::get<Speclib>(k(in.lib)), io->output, in.dims, out_);
        });
        addOptions(sub, *opts);
        addIo(sub, *io);
    }

    void addInfo() {
        auto io = std::make_shared<Io>();
        auto* sub = command("info", "summarize a spectral library or cube", [this, io] {
            const Loaded in = load(io->input);
            const Speclib& s = in.lib;
            out_ << "samples: " << s.samples() << '\n'
                 << "bands: " << s.bands() << '\n'
                 << "wavelength: " << formatNumber(s.wavelengths().front()) << " - "
                 << formatNumber(s.wavelengths().back()) << " nm\n"
                 << "value unit: " << s.valueUnit() << '\n';
            if (in.dims) out_ << "cube: " << in.dims->samples << " x " << in.dims->lines << '\n';
            out_ << "si columns:";
            if (s.si().empty()) out_ << " none";
            for (const auto& c : s.si().columns())
                out_ << ' ' << c.name() << '(' << (c.isNumeric() ? "numeric" : "categorical") << ')';
            out_ << "\nmask:";
            if (s.mask().empty()) out_ << " none";
            for (const auto& r : s.mask().ranges()) out_ << " [" << formatNumber(r.lo) << ", " << formatNumber(r.hi) << ')';
            out_ << '\n';
        });
        sub->add_option("input", io->input, "input CSV or ENVI data file")->required();
    }

    void addConvert() {
        struct Opts {
            Io io;
            std::string data_type = "float64";
            std::string interleave = "bsq";
            std::size_t samples = 0;
        };
        auto o = std::make_shared<Opts>();
        auto* sub = command("convert", "convert between CSV and ENVI", [this, o] {
            OutputFormat f{parseDataType(o->data_type), parseInterleave(o->interleave)};
            Loaded in = load(o->io.input);
            std::optional<CubeDims> dims = in.dims;
            if (o->samples > 0) {
                if (in.lib.samples() % o->samples != 0)
                    throw Error("--samples " + std::to_string(o->samples) + " does not divide " +
                                std::to_string(in.lib.samples()) + " spectra");
                dims = CubeDims{o->samples, in.lib.samples() / o->samples};
            }
            save(in.lib, o->io.output, dims, out_, f);
        });
        sub->add_option("--data-type", o->data_type, "ENVI output type: float64, float32, int16, uint16")
            ->capture_default_str();
        sub->add_option("--interleave", o->interleave, "ENVI output interleave: bsq, bil, bip")->capture_default_str();
        sub->add_option("--samples", o->samples, "pixels per line for ENVI output");
        addIo(sub, o->io, true);
    }

    void addTransform() {
        auto io = std::make_shared<Io>();
        auto opts = std::make_shared<TransformOpts>();
        auto threads = std::make_shared<int>(0);
        auto* sub = command("transform", "continuum removal", [this, io, opts, threads] {
            const Loaded in = load(io->input);
            const TransformResult r = transformSpeclib(in.lib, parseHullMethod(opts->method),
                                                       parseTransformOut(opts->out), resolveThreads(*threads));
            if (r.degenerate_bands > 0)
                err_ << "warning: " << r.degenerate_bands << " band values with a zero continuum set to 0\n";
            save(r.spectra, io->output, in.dims, out_);
        });
        addOptions(sub, *opts);
        sub->add_option("--threads", *threads, "worker threads (default: SPECWB_THREADS or all cores)");
        addIo(sub, *io);
    }

    void addFeatures() {
        struct Opts {
            Io io;
            std::string anchors;
        };
        auto f = std::make_shared<Opts>();
        auto* sub = command("features", "absorption feature bounds from band depth spectra", [this, f] {
            const auto anchors = parseList(f->anchors, "--anchors");
            const BandDepthSpeclib bd(load(f->io.input).lib);
            const auto features = specfeat(bd, anchors);
            writeTable(f->io.output, out_, [&](std::ostream& o) {
                o << "id,anchor,empty,duplicate,lower,upper,bands\n";
                for (std::size_t k = 0; k < features.size(); ++k) {
                    for (const auto& ft : features[k]) {
                        o << bd.speclib().ids()[k] << ',' << formatNumber(ft.anchor) << ',' << (ft.empty ? 1 : 0)
                          << ',' << (ft.duplicate ? 1 : 0) << ',';
                        if (ft.empty) {
                            o << "NA,NA,0\n";
                        } else {
                            o << formatNumber(ft.lowerBound()) << ',' << formatNumber(ft.upperBound()) << ','
                              << ft.wavelengths.size() << '\n';
                        }
                    }
                }
            });
        });
        sub->add_option("--anchors", f->anchors, "feature anchor wavelengths, comma separated (nm)")->required();
        addIo(sub, f->io);

        auto p = std::make_shared<Opts>();
        auto* props = command("featprops", "area, width and shape of absorption features", [this, p] {
            const auto anchors = parseList(p->anchors, "--anchors");
            const BandDepthSpeclib bd(load(p->io.input).lib);
            const auto features = specfeat(bd, anchors);
            writeTable(p->io.output, out_, [&](std::ostream& o) { writeFeatureTable(bd, anchors, features, o); });
        });
        props->add_option("--anchors", p->anchors, "feature anchor wavelengths, comma separated (nm)")->required();
        addIo(props, p->io);
    }

    void addIndex() {
        auto io = std::make_shared<Io>();
        auto opts = std::make_shared<IndexOpts>();
        auto* sub = command("index", "catalog index or band-math expression", [this, io, opts] {
            const IndexExpr expr = indexExpression(*opts);
            const Loaded in = load(io->input);
            const IndexValues v = evalIndex(expr, in.lib);
            if (v.division_by_zero > 0)
                err_ << "warning: division by zero in " << v.division_by_zero << " spectra (value NA)\n";
            writeTable(io->output, out_, [&](std::ostream& o) {
                o << "id,value\n";
                for (std::size_t k = 0; k < v.values.size(); ++k)
                    o << in.lib.ids()[k] << ',' << formatNumber(v.values[k]) << '\n';
            });
        });
        addOptions(sub, *opts);
        addIo(sub, *io);
    }

    void addRedEdge() {
        struct Opts {
            Io io;
            std::string method = "linear_interpolation";
        };
        auto o = std::make_shared<Opts>();
        auto* sub = command("rededge", "red edge inflection point", [this, o] {
            const RedEdgeMethod method = parseRedEdgeMethod(o->method);
            const Loaded in = load(o->io.input);
            const auto results = redEdge(in.lib, method);
            std::size_t failed = 0, outside = 0;
            writeTable(o->io.output, out_, [&](std::ostream& f) {
                f << "id,reip,in_expected_range,error\n";
                for (std::size_t k = 0; k < results.size(); ++k) {
                    const auto& r = results[k];
                    failed += r.ok() ? 0 : 1;
                    outside += r.ok() && !r.in_expected_range ? 1 : 0;
                    f << in.lib.ids()[k] << ',' << formatNumber(r.reip) << ',' << (r.in_expected_range ? 1 : 0) << ','
                      << quoteCsvField(r.error) << '\n';
                }
            });
            if (failed > 0) err_ << "warning: red edge not found for " << failed << " spectra\n";
            if (outside > 0) err_ << "warning: " << outside << " red edge positions outside 680-760 nm\n";
        });
        sub->add_option("--method", o->method, "gaussian_fit, linear_extrapolation or linear_interpolation")
            ->capture_default_str();
        addIo(sub, o->io);
    }

    void addNri() {
        auto io = std::make_shared<Io>();
        auto* sub = command("nri", "normalized ratio indices for all band pairs", [this, io] {
            const NriCube cube = nriRecursive(load(io->input).lib);
            std::size_t nan_pairs = 0;
            for (std::size_t c : cube.nanCounts()) nan_pairs += c > 0 ? 1 : 0;
            if (nan_pairs > 0) err_ << "warning: " << nan_pairs << " pairs with zero denominators (value NA)\n";
            writeTable(io->output, out_, [&](std::ostream& o) { writeNriTable(cube, o); });
        });
        addIo(sub, *io);
    }

    struct GlmOpts {
        Io io;
        std::string response;
        std::string family = "binomial";
        int threads = 0;
    };

    static void addGlmOptions(CLI::App* sub, GlmOpts& o) {
        sub->add_option("--response", o.response, "SI column holding the response")->required();
        sub->add_option("--family", o.family, "binomial or gaussian")->capture_default_str();
        sub->add_option("--threads", o.threads, "worker threads (default: SPECWB_THREADS or all cores)");
    }

    static GlmGrid fit(const GlmOpts& o) {
        const GlmFamily family = parseGlmFamily(o.family);
        const NriCube cube = nriRecursive(load(o.io.input).lib);
        return glmNri(cube, o.response, family, resolveThreads(o.threads));
    }

    void addGlm() {
        auto o = std::make_shared<GlmOpts>();
        auto* sub = command("glm", "per-pair GLM of a response on normalized ratio indices", [this, o] {
            const GlmGrid g = fit(*o);
            std::size_t separated = 0;
            for (const auto& s : g.stats) separated += s.separated ? 1 : 0;
            if (separated > 0) err_ << "warning: perfect separation in " << separated << " pairs (z, p NA)\n";
            writeTable(o->io.output, out_, [&](std::ostream& f) { writeGlmTable(g, f); });
        });
        addGlmOptions(sub, *o);
        addIo(sub, o->io);
    }

    void addCorrelogram() {
        struct Opts {
            GlmOpts glm;
            std::string stat = "p.value";
            bool log = false;
            std::string ppm;
        };
        auto o = std::make_shared<Opts>();
        auto* sub = command("correlogram", "GLM statistic grid as CSV and PPM heatmap", [this, o] {
            const GlmStatistic stat = parseGlmStatistic(o->stat);
            const GlmGrid g = fit(o->glm);
            const fs::path csv = o->glm.io.output;
            const fs::path ppm = o->ppm.empty() ? fs::path(csv).replace_extension(".ppm") : fs::path(o->ppm);
            const CorrelogramSummary s = correlogramExport(g, stat, o->log, csv, ppm);
            out_ << "range: " << formatNumber(s.min_value) << " - " << formatNumber(s.max_value) << '\n'
                 << "best: " << formatNumber(s.best.wl_i) << ',' << formatNumber(s.best.wl_j)
                 << " p=" << formatNumber(s.best.p_value) << '\n'
                 << "worst: " << formatNumber(s.worst.wl_i) << ',' << formatNumber(s.worst.wl_j)
                 << " p=" << formatNumber(s.worst.p_value) << '\n';
        });
        addGlmOptions(sub, o->glm);
        sub->add_option("--stat", o->stat, "coefficient, z.value or p.value")->capture_default_str();
        sub->add_flag("--log", o->log, "color positive values on a log10 scale");
        sub->add_option("--ppm", o->ppm, "heatmap path (default: output with .ppm)");
        addIo(sub, o->glm.io, true);
    }

    void addRfe() {
        struct Opts {
            Io io;
            double cutoff = 0.9;
        };
        auto o = std::make_shared<Opts>();
        auto* sub = command("rfe", "drop correlated predictors from an ML matrix", [this, o] {
            std::ifstream in(o->io.input);
            if (!in) throw Error("cannot read " + o->io.input);
            const MlDataset ds = readMlDataset(in);
            const MlDataset kept = correlationCutoffFilter(ds, o->cutoff);
            err_ << "kept " << kept.predictor_names.size() << " of " << ds.predictor_names.size() << " predictors\n";
            writeTable(o->io.output, out_, [&](std::ostream& f) { writeMlDataset(kept, f); });
        });
        sub->add_option("--cutoff", o->cutoff, "maximum absolute Pearson correlation, in (0, 1]")
            ->capture_default_str();
        addIo(sub, o->io);
    }

    void addExportMl() {
        struct Opts {
            Io io;
            std::string response;
            std::string predictors;
        };
        auto o = std::make_shared<Opts>();
        auto* sub = command("export-ml", "response and NRI predictors as a CSV matrix", [this, o] {
            const NriCube cube = nriRecursive(load(o->io.input).lib);
            const MlDataset ds = buildMlDataset(cube, o->response, parseNames(o->predictors));
            err_ << ds.predictor_names.size() << " predictors; dropped " << ds.dropped_nan << " with NA and "
                 << ds.dropped_constant << " constant\n";
            writeTable(o->io.output, out_, [&](std::ostream& f) { writeMlDataset(ds, f); });
        });
        sub->add_option("--response", o->response, "SI column holding the response")->required();
        sub->add_option("--predictors", o->predictors, "extra SI predictor columns, comma separated");
        addIo(sub, o->io);
    }

    void addUnmix() {
        struct Opts {
            Io io;
            std::string endmembers;
            std::string constraints = "full";
            int threads = 0;
        };
        auto o = std::make_shared<Opts>();
        auto* sub = command("unmix", "linear spectral unmixing", [this, o] {
            const UnmixConstraints c = parseUnmixConstraints(o->constraints);
            const EndmemberSet em(load(o->endmembers).lib);
            const Loaded in = load(o->io.input);
            const AbundanceResult r = unmix(in.lib, em, c, resolveThreads(o->threads));
            writeTable(o->io.output, out_, [&](std::ostream& f) { writeAbundances(r, f); });
        });
        sub->add_option("--endmembers", o->endmembers, "endmember library (SI column \"name\" optional)")->required();
        sub->add_option("--constraints", o->constraints, "none, sum_to_one, nonneg or full")->capture_default_str();
        sub->add_option("--threads", o->threads, "worker threads (default: SPECWB_THREADS or all cores)");
        addIo(sub, o->io);
    }

    void addChunked() {
        struct Opts {
            Io io;
            std::vector<std::string> kernels;
            std::size_t chunk_bytes = 64u << 20;
            int threads = 0;
            std::string data_type = "float64";
            std::string interleave = "bsq";
        };
        auto o = std::make_shared<Opts>();
        auto* sub = command("chunked", "apply row-local stages to an ENVI cube block by block", [this, o] {
            std::vector<Kernel> stages;
            for (const auto& spec : o->kernels) stages.push_back(parseKernel(spec));
            const Kernel chain = [stages](const Speclib& s) -> KernelOutput {
                KernelOutput cur = s;
                for (std::size_t k = 0; k < stages.size(); ++k) {
                    if (!std::holds_alternative<Speclib>(cur))
                        throw Error("index kernels produce a table and must come last");
                    cur = stages[k](std::get<Speclib>(cur));
                }
                return cur;
            };
            const fs::path in = o->io.input;
            EnviCubeReader reader(in, enviHeaderPathFor(in));
            const EnviHeader& ih = reader.header();
            if (ih.lines == 0 || ih.samples == 0) throw Error("cube has no pixels");

            EnviHeader oh;
            oh.samples = ih.samples;
            oh.lines = ih.lines;
            oh.data_type = parseDataType(o->data_type);
            oh.interleave = parseInterleave(o->interleave);
            const KernelOutput probe = chain(reader.readLines(0, 1));
            if (const auto* lib = std::get_if<Speclib>(&probe)) {
                oh.bands = lib->bands();
                oh.wavelength = lib->wavelengths();
                oh.fwhm = lib->fwhm();
                oh.wavelength_units = "Nanometers";
            } else {
                oh.bands = static_cast<std::size_t>(std::get<Matrix>(probe).cols());
                std::string names;
                for (std::size_t b = 0; b < oh.bands; ++b) names += (b ? ", value" : "value") + std::to_string(b + 1);
                oh.extra.emplace_back("band names", "{" + names + "}");
            }
            EnviCubeWriter writer(o->io.output, oh);
            const ChunkPlan plan = planChunks(ih.lines, o->chunk_bytes, ih.samples * ih.bands * sizeof(double));
            const ChunkRunStats stats = processChunked(reader, writer, chain, plan, resolveThreads(o->threads));
            out_ << "chunks: " << stats.chunks << "\npeak chunks in memory: " << stats.peak_chunks_in_memory << '\n';
        });
        sub->add_option("--kernel", o->kernels, "stage to apply, e.g. \"filter --method sgolay --window 15\"")
            ->required()
            ->take_all()
            ->allow_extra_args(false);
        sub->add_option("--chunk-bytes", o->chunk_bytes, "target block size in bytes")->capture_default_str();
        sub->add_option("--threads", o->threads, "worker threads (default: SPECWB_THREADS or all cores)");
        sub->add_option("--data-type", o->data_type, "output type: float64, float32, int16, uint16")
            ->capture_default_str();
        sub->add_option("--interleave", o->interleave, "output interleave: bsq, bil, bip")->capture_default_str();
        addIo(sub, o->io, true);
    }

    std::ostream& out_;
    std::ostream& err_;
    CLI::App app_{"Spectral library and hyperspectral cube processing", "specwb"};
    std::vector<std::pair<CLI::App*, std::function<void()>>> handlers_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Cli cli(out, err);
    return cli.run(args);
}

}  // namespace specwb::cli
