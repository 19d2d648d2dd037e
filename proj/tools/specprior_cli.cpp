// specprior: batch driver for the eigenspectrum-prior pipeline.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "specprior/pipeline.hpp"

namespace fs = std::filesystem;
using namespace specprior;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> step;
    std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "Config file (flat dotted key = value)");
    app->add_option("--seed", c.seed, "Override run.seed");
    app->add_option("--out", c.out, "Override run.output_dir");
    app->add_option("--step", c.step, "Override grid.step");
    app->add_option("--set", c.sets, "Extra key=value overrides")->take_all();
}

PipelineConfig resolve(const Common& c) {
    PipelineConfig cfg = c.config.empty() ? PipelineConfig{} : load_config(c.config);
    for (const auto& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::ConfigError, "--set expects key=value: " + kv);
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (c.seed) cfg.seed = *c.seed;
    if (c.out) cfg.output_dir = *c.out;
    if (c.step) cfg.grid_step = *c.step;
    cfg.validate();
    fs::create_directories(cfg.output_dir);
    return cfg;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorKind::IoError, "cannot write " + p.string());
    f << text;
    std::cerr << "wrote " << p.string() << '\n';
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorKind::IoError, "cannot read " + p.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string boxplot_script(const std::string& csv) {
    return "set datafile separator ','\n"
           "set key off\nset xlabel 'cluster'\nset ylabel 's'\nset boxwidth 0.5\n"
           "plot '" + csv + "' every ::1 using 1:3:2:6:5 with candlesticks whiskerbars, \\\n"
           "     '' every ::1 using 1:4:4:4:4 with candlesticks lt -1\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Eigenspectrum prior: drift sweep, VITE, clustering and refinement"};
    app.require_subcommand(1);

    Common exact_o, sweep_o, cluster_o, refine_o, noise_o;
    std::string warm_report, records_path, report_path;

    auto* exact = app.add_subcommand("exact", "Dense eigenvalues and theoretical interval medians");
    add_common(exact, exact_o);
    auto* sweep = app.add_subcommand("sweep", "VITE over the drift grid, writes records.csv");
    add_common(sweep, sweep_o);
    sweep->add_option("--warm-start", warm_report, "Cluster report whose median parameters seed each drift");
    auto* cluster = app.add_subcommand("cluster", "Cluster records, writes report.json and boxplot.csv");
    add_common(cluster, cluster_o);
    cluster->add_option("--records", records_path, "Records CSV (default <out>/records.csv)");
    auto* refine = app.add_subcommand("refine", "Inverse power refinement of cluster medians");
    add_common(refine, refine_o);
    refine->add_option("--report", report_path, "Cluster report (default <out>/report.json)");
    auto* noise = app.add_subcommand("noise-study", "Error versus two-qubit depolarizing strength");
    add_common(noise, noise_o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (exact->parsed()) {
            const PipelineConfig cfg = resolve(exact_o);
            const ExactSpectrum spec = exact_spectrum(build_hamiltonian(cfg), cfg);
            write_file(fs::path(cfg.output_dir) / "spectrum.csv", spectrum_csv(spec, manifest_hash(cfg)));
        } else if (sweep->parsed()) {
            const PipelineConfig cfg = resolve(sweep_o);
            const PauliSum h = build_hamiltonian(cfg);
            const ExactSpectrum spec = exact_spectrum(h, cfg);
            std::vector<ClusterSummary> warm;
            if (!warm_report.empty()) warm = report_from_json(read_file(warm_report)).clusters;
            const std::optional<NoiseModel> nm =
                cfg.noise.noiseless() ? std::nullopt : std::optional<NoiseModel>(cfg.noise);
            const SweepResult res = run_sweep(h, cfg, drift_grid(cfg, spec), nm, warm);
            std::ostringstream os;
            write_records_csv(os, res.records, manifest_hash(cfg));
            write_file(fs::path(cfg.output_dir) / "records.csv", os.str());
            write_file(fs::path(cfg.output_dir) / "manifest.json", sweep_manifest_json(cfg, res));
            for (const auto& f : res.failures) std::cerr << "skipped: " << f << '\n';
            std::cerr << res.records.size() << " records, " << res.skipped << " skipped\n";
        } else if (cluster->parsed()) {
            const PipelineConfig cfg = resolve(cluster_o);
            const fs::path rp = records_path.empty() ? fs::path(cfg.output_dir) / "records.csv" : fs::path(records_path);
            std::istringstream in(read_file(rp));
            const ClusterOutcome out = run_cluster(read_records_csv(in), cfg);
            const std::string hash = manifest_hash(cfg);
            write_file(fs::path(cfg.output_dir) / "report.json", report_to_json(out.report, hash));
            write_file(fs::path(cfg.output_dir) / "boxplot.csv", boxplot_csv(out.report, hash));
            write_file(fs::path(cfg.output_dir) / "boxplot.gp", boxplot_script("boxplot.csv"));
            std::cout << "trial seed " << out.chosen_seed << ": k=" << out.report.k
                      << " silhouette=" << out.report.mean_silhouette << " hopkins=" << out.report.hopkins.mean
                      << " (p=" << out.report.hopkins.p_value << ")\n";
            for (const auto& e : estimate_spectrum(out.report)) {
                std::cout << "  cluster " << e.cluster_id << ": median s = " << e.median_s << " in [" << e.s_min
                          << ", " << e.s_max << "]\n";
            }
            for (const auto& w : out.report.warnings) std::cerr << "warning: " << w << '\n';
        } else if (refine->parsed()) {
            const PipelineConfig cfg = resolve(refine_o);
            const fs::path rp = report_path.empty() ? fs::path(cfg.output_dir) / "report.json" : fs::path(report_path);
            const ClusterReport rep = report_from_json(read_file(rp));
            const auto rows = run_refine(rep, build_hamiltonian(cfg), cfg);
            write_file(fs::path(cfg.output_dir) / "refined.csv", refine_csv(rows, manifest_hash(cfg)));
        } else if (noise->parsed()) {
            const PipelineConfig cfg = resolve(noise_o);
            const NoiseStudy study = run_noise_study(build_hamiltonian(cfg), cfg);
            write_file(fs::path(cfg.output_dir) / "noise_study.csv", noise_study_csv(study, manifest_hash(cfg)));
            for (const auto& [step, mk] : study.trend_by_step) {
                std::cout << "step " << step << ": Mann-Kendall tau=" << mk.tau << " p=" << mk.p_value
                          << (mk.p_value >= 0.05 ? " (no significant trend)" : " (trend)") << '\n';
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
