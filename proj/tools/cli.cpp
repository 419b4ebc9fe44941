#include "cli.hpp"

#include "spectra/error.hpp"
#include "spectra/simkit.hpp"
#include "spectra/specmat.hpp"
#include "spectra/stieltjes.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#ifndef SPECTRA_VERSION
#define SPECTRA_VERSION "0.0.0"
#endif

namespace spectra::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Options {
    std::string ensemble = "exp";
    std::string population = "identity";
    std::string p;
    std::string n;
    std::string replicates = "50";
    std::string bandwidth = "default";
    std::string seed = "1";
    std::string grid;
    std::string out = ".";
    std::string sigma2 = "1";
    std::string p1 = "1";
    std::string contour_im = "0.5";
    std::string n_values = "200,800,3200";
};

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> parts;
    std::string current;
    std::istringstream in(text);
    while (std::getline(in, current, sep)) {
        parts.push_back(current);
    }
    if (!text.empty() && text.back() == sep) {
        parts.emplace_back();
    }
    return parts;
}

double parse_real(const std::string& field, const std::string& text)
{
    double value = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw std::invalid_argument("invalid value for " + field + ": '" + text + "'");
    }
    return value;
}

std::uint64_t parse_count(const std::string& field, const std::string& text)
{
    std::uint64_t value = 0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        throw std::invalid_argument("invalid value for " + field + ": '" + text + "'");
    }
    return value;
}

std::string population_text(const PopulationSpec& spec)
{
    return std::visit(
        [](const auto& s) -> std::string {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, IdentityPopulation>) {
                return "identity";
            } else if constexpr (std::is_same_v<S, DiagonalPopulation>) {
                std::string text = "diagonal:";
                for (std::size_t i = 0; i < s.measure.atoms().size(); ++i) {
                    const auto& atom = s.measure.atoms()[i];
                    text += (i ? "," : "") + format_number(atom.location) + "@" + format_number(atom.mass);
                }
                return text;
            } else {
                return "wishart:" + s.entry.name() + ":" +
                       format_number(static_cast<double>(s.n2) / static_cast<double>(s.p));
            }
        },
        spec);
}

std::string bandwidth_text(const BandwidthRule& rule)
{
    return std::visit(
        [](const auto& r) -> std::string {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, DefaultBandwidth>) {
                return "default";
            } else if constexpr (std::is_same_v<R, PowerBandwidth>) {
                return "power:" + format_number(r.coef) + ":" + format_number(r.exponent);
            } else {
                return "fixed:" + format_number(r.h);
            }
        },
        rule);
}

struct Resolved {
    std::string command;
    ExperimentConfig config;
    std::map<std::string, std::string> fields;   // canonical text of every resolved setting
    fs::path out;

    std::string digest() const
    {
        std::string canonical;
        for (const auto& [key, value] : fields) {
            canonical += key + "=" + value + "\n";
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
        return buf;
    }
};

Resolved resolve(const std::string& command, const Options& o)
{
    if (o.p.empty()) {
        throw std::invalid_argument("p required");
    }
    if (o.n.empty()) {
        throw std::invalid_argument("n required");
    }
    Resolved r;
    r.command = command;
    auto& cfg = r.config;
    cfg.p = parse_count("p", o.p);
    cfg.n = parse_count("n", o.n);
    if (cfg.p == 0) {
        throw std::invalid_argument("p must be >= 1");
    }
    if (cfg.n == 0) {
        throw std::invalid_argument("n must be >= 1");
    }
    cfg.replicates = parse_count("replicates", o.replicates);
    if (cfg.replicates == 0) {
        throw std::invalid_argument("replicates must be >= 1");
    }
    cfg.seed = parse_count("seed", o.seed);
    cfg.ensemble = parse_ensemble(o.ensemble);
    cfg.population = parse_population(o.population, cfg.p);
    cfg.bandwidth = parse_bandwidth(o.bandwidth);
    bandwidth(cfg.bandwidth, cfg.n);
    if (!o.grid.empty()) {
        cfg.eval_points = parse_grid(o.grid);
    }
    r.out = o.out;

    const double sigma2 = parse_real("sigma2", o.sigma2);
    const double p1 = parse_real("p1", o.p1);
    const double contour_im = parse_real("contour-im", o.contour_im);
    std::string n_values;
    for (const auto& item : split(o.n_values, ',')) {
        n_values += (n_values.empty() ? "" : ",") + std::to_string(parse_count("n-values", item));
    }
    r.fields = {
        {"command", command},
        {"ensemble", cfg.ensemble.name()},
        {"population", population_text(cfg.population)},
        {"p", std::to_string(cfg.p)},
        {"n", std::to_string(cfg.n)},
        {"replicates", std::to_string(cfg.replicates)},
        {"bandwidth", bandwidth_text(cfg.bandwidth)},
        {"seed", std::to_string(cfg.seed)},
        {"grid", o.grid.empty() ? "auto" : o.grid},
        {"sigma2", format_number(sigma2)},
        {"p1", format_number(p1)},
        {"contour-im", format_number(contour_im)},
        {"n-values", n_values},
        {"kernel", cfg.kernel.name},
    };
    return r;
}

void ensure_directory(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
    }
}

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    file << content;
    file.close();
    if (!file) {
        throw IoError("failed writing " + path.string());
    }
}

std::string curve_csv(const std::string& value_column, const DensityCurve& curve)
{
    std::string csv = "x," + value_column + "\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        csv += format_number(curve.grid()[i]) + "," + format_number(curve.values()[i]) + "\n";
    }
    return csv;
}

class Run {
public:
    Run(Resolved resolved, std::ostream& out) : r_(std::move(resolved)), out_(out) { ensure_directory(r_.out); }

    void emit(const std::string& name, const std::string& content)
    {
        write_file(r_.out / name, content);
        outputs_.push_back(name);
    }

    void finish(json extra = json::object())
    {
        json manifest = {
            {"command", r_.command},
            {"config_digest", r_.digest()},
            {"seed", r_.config.seed},
            {"tool_version", SPECTRA_VERSION},
            {"outputs", outputs_},
        };
        for (auto& [key, value] : extra.items()) {
            manifest[key] = value;
        }
        write_file(r_.out / "manifest.json", manifest.dump(2) + "\n");
        out_ << "wrote";
        for (const auto& name : outputs_) {
            out_ << ' ' << (r_.out / name).string();
        }
        out_ << ' ' << (r_.out / "manifest.json").string() << '\n';
    }

    const Resolved& resolved() const { return r_; }

private:
    Resolved r_;
    std::ostream& out_;
    std::vector<std::string> outputs_;
};

double ratio(const ExperimentConfig& cfg)
{
    return static_cast<double>(cfg.p) / static_cast<double>(cfg.n);
}

void cmd_density(Resolved r, const Options& o, std::ostream& out)
{
    ExperimentConfig& cfg = r.config;
    cfg.replicates = 1;
    cfg.validate();
    const double h = bandwidth(cfg.bandwidth, cfg.n);
    const EmpiricalSpectrum spectrum = sample_spectrum(cfg, 0);
    std::vector<double> grid = cfg.eval_points;
    if (o.grid.empty()) {
        grid = uniform_grid(std::max(0.0, spectrum.min() - 4.0 * h), spectrum.max() + 4.0 * h, 401);
    }
    const auto limit = natural_limit(cfg.population, ratio(cfg));

    const std::string estimate_csv = curve_csv("f_estimate", kde_density_curve(spectrum, cfg.kernel, h, grid));

    Run run(std::move(r), out);
    run.emit("density_estimate.csv", estimate_csv);
    json extra = {{"bandwidth", h}};
    if (limit) {
        run.emit("density_limit.csv", curve_csv("f_limit", limit_density_curve(*limit, grid)));
    } else {
        out << "limit law has no closed form\n";
        extra["note"] = "limit law has no closed form";
    }
    run.finish(extra);
}

void cmd_mse(Resolved r, std::ostream& out)
{
    ExperimentConfig& cfg = r.config;
    cfg.limit = natural_limit(cfg.population, ratio(cfg));
    const MseTable table = run_mse_experiment(cfg);
    std::string csv = "x,mse,mode,replicates\n";
    for (std::size_t j = 0; j < table.eval_points.size(); ++j) {
        csv += format_number(table.eval_points[j]) + "," + format_number(table.mse[j]) + "," +
               to_string(table.mode) + "," + std::to_string(table.replicates) + "\n";
    }
    Run run(std::move(r), out);
    run.emit("mse.csv", csv);
    run.finish({{"mode", to_string(table.mode)}});
}

void cmd_recover(Resolved r, std::ostream& out)
{
    ExperimentConfig& cfg = r.config;
    if (!(cfg.p < cfg.n)) {
        throw std::invalid_argument("recovery requires c in (0,1)");
    }
    cfg.replicates = 1;
    cfg.validate();
    const double h = bandwidth(cfg.bandwidth, cfg.n);
    const Population population = build_population(cfg.population, cfg.seed, 0);
    const EmpiricalSpectrum spectrum = sample_spectrum(cfg, 0);
    const double frob = population.t.frobenius_norm();
    const double oracle = frob * frob / static_cast<double>(cfg.p);

    RecoveryContour contour;
    contour.im = parse_real("contour-im", r.fields.at("contour-im"));
    const RecoveryResult result = recover_population(KdeSource{spectrum, cfg.kernel, h}, ratio(cfg), contour);

    const json report = {
        {"m1", result.m1},
        {"m2", result.m2},
        {"tr_t2_over_n", result.tr_t2_over_n},
        {"oracle_tr_t2_over_n", oracle},
        {"relative_error", std::abs(result.tr_t2_over_n - oracle) / oracle},
        {"diagnostics",
         {{"fit_residual", result.diagnostics.fit_residual},
          {"usable_points", result.diagnostics.usable_points},
          {"support_edge", result.diagnostics.support_edge},
          {"contour_im", contour.im},
          {"contour_start", result.diagnostics.support_edge + contour.start_offset},
          {"contour_end", result.diagnostics.support_edge + contour.end_offset},
          {"fit_order", contour.fit_order},
          {"bandwidth", h}}},
    };
    Run run(std::move(r), out);
    run.emit("recover.json", report.dump(2) + "\n");
    out << report.dump(2) << '\n';
    run.finish();
}

void cmd_sir(Resolved r, std::ostream& out)
{
    ExperimentConfig& cfg = r.config;
    const double sigma2 = parse_real("sigma2", r.fields.at("sigma2"));
    const double p1 = parse_real("p1", r.fields.at("p1"));
    if (!(sigma2 > 0.0)) {
        throw std::invalid_argument("sigma2 must be > 0");
    }
    if (!(p1 > 0.0)) {
        throw std::invalid_argument("p1 must be > 0");
    }
    cfg.replicates = 1;
    cfg.validate();
    const double h = bandwidth(cfg.bandwidth, cfg.n);
    const EmpiricalSpectrum spectrum = sample_spectrum(cfg, 0);
    json report = {
        {"sigma2", sigma2},
        {"p1", p1},
        {"kernel_estimate", mmse_sir_limit(KdeSource{spectrum, cfg.kernel, h}, sigma2, p1)},
        {"empirical", mmse_sir_limit(EmpiricalSource{spectrum}, sigma2, p1)},
    };
    if (const auto limit = natural_limit(cfg.population, ratio(cfg))) {
        report["limit"] = mmse_sir_limit(LawSource{*limit}, sigma2, p1);
    } else {
        report["limit"] = nullptr;
    }
    Run run(std::move(r), out);
    run.emit("sir.json", report.dump(2) + "\n");
    out << report.dump(2) << '\n';
    run.finish();
}

void cmd_rate(Resolved r, std::ostream& out)
{
    std::vector<std::size_t> n_values;
    for (const auto& item : split(r.fields.at("n-values"), ',')) {
        n_values.push_back(parse_count("n-values", item));
    }
    const RateReport report = rate_check(r.config, n_values);
    std::string csv = "n,mean_distance\n";
    for (std::size_t i = 0; i < report.n_values.size(); ++i) {
        csv += std::to_string(report.n_values[i]) + "," + format_number(report.distances[i]) + "\n";
    }
    out << "fitted_exponent=" << format_number(report.fitted_exponent) << '\n';
    Run run(std::move(r), out);
    run.emit("rate.csv", csv);
    run.finish({{"fitted_exponent", report.fitted_exponent}});
}

} // namespace

EntryDistribution parse_ensemble(const std::string& text)
{
    if (text == "exp") {
        return EntryDistribution::shifted_exponential();
    }
    if (text == "bion") {
        return EntryDistribution::rademacher();
    }
    throw std::invalid_argument("invalid value for ensemble: '" + text + "' (expected exp or bion)");
}

PopulationSpec parse_population(const std::string& text, std::size_t p)
{
    if (text == "identity") {
        return IdentityPopulation{p};
    }
    const auto parts = split(text, ':');
    if (parts.size() == 2 && parts[0] == "diagonal") {
        std::vector<DiscreteMeasure::Atom> atoms;
        for (const auto& item : split(parts[1], ',')) {
            const auto at = split(item, '@');
            if (at.size() != 2) {
                throw std::invalid_argument("invalid value for population: atom '" + item + "' is not <t>@<w>");
            }
            atoms.push_back({parse_real("population", at[0]), parse_real("population", at[1])});
        }
        try {
            return DiagonalPopulation{DiscreteMeasure(std::move(atoms)), p};
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string("invalid value for population: ") + e.what());
        }
    }
    if (parts.size() == 3 && parts[0] == "wishart") {
        const double r = parse_real("population", parts[2]);
        if (!(r >= 1.0)) {
            throw std::invalid_argument("invalid value for population: wishart ratio must be >= 1");
        }
        return WishartPopulation{parse_ensemble(parts[1]), p,
                                 static_cast<std::size_t>(std::llround(r * static_cast<double>(p)))};
    }
    throw std::invalid_argument("invalid value for population: '" + text + "'");
}

BandwidthRule parse_bandwidth(const std::string& text)
{
    if (text == "default") {
        return DefaultBandwidth{};
    }
    const auto parts = split(text, ':');
    if (parts.size() == 2 && parts[0] == "fixed") {
        return FixedBandwidth{parse_real("bandwidth", parts[1])};
    }
    if (parts.size() == 3 && parts[0] == "power") {
        return PowerBandwidth{parse_real("bandwidth", parts[1]), parse_real("bandwidth", parts[2])};
    }
    throw std::invalid_argument("invalid value for bandwidth: '" + text + "'");
}

std::vector<double> parse_grid(const std::string& text)
{
    const auto parts = split(text, ':');
    if (parts.size() != 3) {
        throw std::invalid_argument("invalid value for grid: '" + text + "' (expected min:max:points)");
    }
    const double lo = parse_real("grid", parts[0]);
    const double hi = parse_real("grid", parts[1]);
    const auto points = parse_count("grid", parts[2]);
    if (points < 2 || !(hi > lo)) {
        throw std::invalid_argument("invalid value for grid: need max > min and points >= 2");
    }
    return uniform_grid(lo, hi, points);
}

std::string format_number(double value)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::uint64_t fnv1a(std::string_view bytes)
{
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        hash ^= ch;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Kernel spectral density estimation for sample covariance matrices", "spectra"};
    app.set_version_flag("--version", std::string(SPECTRA_VERSION));
    app.set_config("--config", "", "flat key=value file; command-line flags take precedence");
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    Options o;
    app.add_option("--ensemble", o.ensemble, "entry distribution: exp | bion")->capture_default_str();
    app.add_option("--population", o.population,
                   "identity | diagonal:<t>@<w>,... | wishart:<exp|bion>:<ratio>")
        ->capture_default_str();
    app.add_option("--p", o.p, "dimension");
    app.add_option("--n", o.n, "sample size");
    app.add_option("--replicates", o.replicates, "Monte-Carlo replicates")->capture_default_str();
    app.add_option("--bandwidth", o.bandwidth, "default | fixed:<h> | power:<coef>:<exponent>")
        ->capture_default_str();
    app.add_option("--seed", o.seed, "base seed")->capture_default_str();
    app.add_option("--grid", o.grid, "evaluation grid <min>:<max>:<points>");
    app.add_option("--out", o.out, "output directory")->capture_default_str();
    app.add_option("--sigma2", o.sigma2, "noise variance (sir)")->capture_default_str();
    app.add_option("--p1", o.p1, "user-1 power (sir)")->capture_default_str();
    app.add_option("--contour-im", o.contour_im, "imaginary part of the recovery contour")->capture_default_str();
    app.add_option("--n-values", o.n_values, "comma-separated sample sizes (rate)")->capture_default_str();

    const std::vector<std::pair<std::string, std::string>> commands{
        {"density", "kernel density curve and limit density (CSV)"},
        {"mse", "replicated mean-square-error table (CSV)"},
        {"recover", "population moments from the kernel estimate (JSON)"},
        {"sir", "MMSE receiver SIR functional (JSON)"},
        {"rate", "mean Kolmogorov distance to the limit law across n (CSV)"},
    };
    for (const auto& [name, help] : commands) {
        app.add_subcommand(name, help)->fallthrough();
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        Resolved resolved = resolve(command, o);
        if (command == "density") {
            cmd_density(std::move(resolved), o, out);
        } else if (command == "mse") {
            cmd_mse(std::move(resolved), out);
        } else if (command == "recover") {
            cmd_recover(std::move(resolved), out);
        } else if (command == "sir") {
            cmd_sir(std::move(resolved), out);
        } else {
            cmd_rate(std::move(resolved), out);
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    }
    return kSuccess;
}

} // namespace spectra::cli
