#include "specprior/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "specprior/random.hpp"

namespace specprior {

namespace {

std::string fmt(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0;
    const char* first = v.data();
    const char* last = v.data() + v.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last) throw Error(ErrorKind::ConfigError, key + ": expected a number, got '" + v + "'");
    return out;
}

long long to_int(const std::string& key, const std::string& v) {
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw Error(ErrorKind::ConfigError, key + ": expected an integer, got '" + v + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw Error(ErrorKind::ConfigError, key + ": expected true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(key, item));
    }
    return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_floating_point_v<T>) out += fmt(v[i]);
        else out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace

void PipelineConfig::validate() const {
    if (hamiltonian_kind != "heisenberg" && hamiltonian_kind != "file") {
        throw Error(ErrorKind::ConfigError, "hamiltonian.kind must be heisenberg or file");
    }
    if (!(grid_step > 0)) throw Error(ErrorKind::ConfigError, "grid.step must be positive");
    if (grid_start && grid_stop && !(*grid_start < *grid_stop)) {
        throw Error(ErrorKind::ConfigError, "grid.start must be below grid.stop");
    }
    if (layers < 1) throw Error(ErrorKind::ConfigError, "ansatz.layers must be >= 1");
    if (init_trials < 1) throw Error(ErrorKind::ConfigError, "vite.init_trials must be >= 1");
    vite.validate();
    noise.validate();
    for (double p : noise_p2_list) {
        if (!(p >= 0 && p <= 1)) throw Error(ErrorKind::ConfigError, "noise.p2_list entries must lie in [0,1]");
    }
    if (cluster_step < 0 || cluster_step > vite.steps) throw Error(ErrorKind::ConfigError, "cluster.step out of range");
    if (refine_method != "exact" && refine_method != "poly" && refine_method != "both") {
        throw Error(ErrorKind::ConfigError, "refine.method must be exact, poly or both");
    }
    if (eval_count < 1) throw Error(ErrorKind::ConfigError, "eval.count must be >= 1");
}

void set_config_value(PipelineConfig& c, const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    if (key == "hamiltonian.kind") c.hamiltonian_kind = v;
    else if (key == "hamiltonian.n") c.heisenberg.n = static_cast<int>(to_int(key, v));
    else if (key == "hamiltonian.jx") c.heisenberg.jx = to_double(key, v);
    else if (key == "hamiltonian.jy") c.heisenberg.jy = to_double(key, v);
    else if (key == "hamiltonian.jz") c.heisenberg.jz = to_double(key, v);
    else if (key == "hamiltonian.h") c.heisenberg.h = to_double(key, v);
    else if (key == "hamiltonian.field_all_sites") c.heisenberg.field_all_sites = to_bool(key, v);
    else if (key == "hamiltonian.file") c.hamiltonian_file = v;
    else if (key == "ansatz.family") c.family = parse_family(v);
    else if (key == "ansatz.layers") c.layers = static_cast<int>(to_int(key, v));
    else if (key == "grid.start") c.grid_start = v == "auto" ? std::nullopt : std::optional<double>(to_double(key, v));
    else if (key == "grid.stop") c.grid_stop = v == "auto" ? std::nullopt : std::optional<double>(to_double(key, v));
    else if (key == "grid.step") c.grid_step = to_double(key, v);
    else if (key == "vite.dt") c.vite.dt = to_double(key, v);
    else if (key == "vite.steps") c.vite.steps = static_cast<int>(to_int(key, v));
    else if (key == "vite.lambda_reg") c.vite.lambda_reg = to_double(key, v);
    else if (key == "vite.phase_correction") c.vite.phase_correction = to_bool(key, v);
    else if (key == "vite.init_trials") c.init_trials = static_cast<int>(to_int(key, v));
    else if (key == "vite.record_at") {
        c.vite.record_at.clear();
        for (double x : to_list(key, v)) c.vite.record_at.push_back(static_cast<int>(x));
    }
    else if (key == "noise.p1") c.noise.p1 = to_double(key, v);
    else if (key == "noise.p2") c.noise.p2 = to_double(key, v);
    else if (key == "noise.p2_list") c.noise_p2_list = to_list(key, v);
    else if (key == "cluster.k_min") c.cluster.k_min = static_cast<int>(to_int(key, v));
    else if (key == "cluster.k_max") c.cluster.k_max = static_cast<int>(to_int(key, v));
    else if (key == "cluster.restarts") c.cluster.restarts = static_cast<int>(to_int(key, v));
    else if (key == "cluster.max_iters") c.cluster.max_iters = static_cast<int>(to_int(key, v));
    else if (key == "cluster.iqr_multiplier") c.cluster.iqr_multiplier = to_double(key, v);
    else if (key == "cluster.step") c.cluster_step = static_cast<int>(to_int(key, v));
    else if (key == "hopkins.fraction") c.cluster.hopkins.sample_fraction = to_double(key, v);
    else if (key == "hopkins.repeats") c.cluster.hopkins.repeats = static_cast<int>(to_int(key, v));
    else if (key == "hopkins.exponent") c.cluster.hopkins.exponent = to_double(key, v);
    else if (key == "refine.method") c.refine_method = v;
    else if (key == "refine.degree") c.refine_degree = static_cast<int>(to_int(key, v));
    else if (key == "refine.tol") c.refine.tol = to_double(key, v);
    else if (key == "refine.max_iters") c.refine.max_iters = static_cast<int>(to_int(key, v));
    else if (key == "refine.accuracy") c.refine_accuracy = to_double(key, v);
    else if (key == "eval.count") c.eval_count = static_cast<int>(to_int(key, v));
    else if (key == "run.seed") c.seed = static_cast<std::uint64_t>(to_int(key, v));
    else if (key == "run.output_dir") c.output_dir = v;
    else if (key == "run.threads") c.threads = static_cast<int>(to_int(key, v));
    else throw Error(ErrorKind::ConfigError, "unknown key '" + key + "'");
}

PipelineConfig parse_config(const std::string& text) {
    PipelineConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
        }
        try {
            set_config_value(c, trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const Error& e) {
            throw Error(ErrorKind::ConfigError, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::IoError, "cannot open config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_text(const PipelineConfig& c) {
    std::ostringstream os;
    os << "hamiltonian.kind = " << c.hamiltonian_kind << '\n'
       << "hamiltonian.n = " << c.heisenberg.n << '\n'
       << "hamiltonian.jx = " << fmt(c.heisenberg.jx) << '\n'
       << "hamiltonian.jy = " << fmt(c.heisenberg.jy) << '\n'
       << "hamiltonian.jz = " << fmt(c.heisenberg.jz) << '\n'
       << "hamiltonian.h = " << fmt(c.heisenberg.h) << '\n'
       << "hamiltonian.field_all_sites = " << (c.heisenberg.field_all_sites ? "true" : "false") << '\n'
       << "hamiltonian.file = " << c.hamiltonian_file << '\n'
       << "ansatz.family = " << to_string(c.family) << '\n'
       << "ansatz.layers = " << c.layers << '\n'
       << "grid.start = " << (c.grid_start ? fmt(*c.grid_start) : "auto") << '\n'
       << "grid.stop = " << (c.grid_stop ? fmt(*c.grid_stop) : "auto") << '\n'
       << "grid.step = " << fmt(c.grid_step) << '\n'
       << "vite.dt = " << fmt(c.vite.dt) << '\n'
       << "vite.steps = " << c.vite.steps << '\n'
       << "vite.lambda_reg = " << fmt(c.vite.lambda_reg) << '\n'
       << "vite.phase_correction = " << (c.vite.phase_correction ? "true" : "false") << '\n'
       << "vite.record_at = " << join(c.vite.record_at) << '\n'
       << "vite.init_trials = " << c.init_trials << '\n'
       << "noise.p1 = " << fmt(c.noise.p1) << '\n'
       << "noise.p2 = " << fmt(c.noise.p2) << '\n'
       << "noise.p2_list = " << join(c.noise_p2_list) << '\n'
       << "cluster.k_min = " << c.cluster.k_min << '\n'
       << "cluster.k_max = " << c.cluster.k_max << '\n'
       << "cluster.restarts = " << c.cluster.restarts << '\n'
       << "cluster.max_iters = " << c.cluster.max_iters << '\n'
       << "cluster.iqr_multiplier = " << fmt(c.cluster.iqr_multiplier) << '\n'
       << "cluster.step = " << c.cluster_step << '\n'
       << "hopkins.fraction = " << fmt(c.cluster.hopkins.sample_fraction) << '\n'
       << "hopkins.repeats = " << c.cluster.hopkins.repeats << '\n'
       << "hopkins.exponent = " << fmt(c.cluster.hopkins.exponent) << '\n'
       << "refine.method = " << c.refine_method << '\n'
       << "refine.degree = " << c.refine_degree << '\n'
       << "refine.tol = " << fmt(c.refine.tol) << '\n'
       << "refine.max_iters = " << c.refine.max_iters << '\n'
       << "refine.accuracy = " << fmt(c.refine_accuracy) << '\n'
       << "eval.count = " << c.eval_count << '\n'
       << "run.seed = " << c.seed << '\n'
       << "run.output_dir = " << c.output_dir << '\n'
       << "run.threads = " << c.threads << '\n';
    return os.str();
}

std::string manifest_hash(const PipelineConfig& cfg) {
    // Output location and thread count do not change results.
    PipelineConfig c = cfg;
    c.output_dir.clear();
    c.threads = 0;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : config_to_text(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PauliSum build_hamiltonian(const PipelineConfig& cfg) {
    if (cfg.hamiltonian_kind == "file") return load_hamiltonian_file(cfg.hamiltonian_file);
    return build_heisenberg_1d(cfg.heisenberg);
}

AnsatzCircuit build_config_ansatz(const PipelineConfig& cfg) {
    const int n = cfg.hamiltonian_kind == "file" ? build_hamiltonian(cfg).n_qubits() : cfg.heisenberg.n;
    return build_ansatz(cfg.family, n, cfg.layers);
}

std::vector<TheoreticalInterval> theoretical_intervals(const std::vector<double>& distinct, double lo, double hi) {
    std::vector<TheoreticalInterval> out;
    for (std::size_t i = 0; i < distinct.size(); ++i) {
        TheoreticalInterval t;
        t.lambda = distinct[i];
        t.lo = i == 0 ? lo : std::max(lo, 0.5 * (distinct[i - 1] + distinct[i]));
        t.hi = i + 1 == distinct.size() ? hi : std::min(hi, 0.5 * (distinct[i] + distinct[i + 1]));
        t.median = 0.5 * (t.lo + t.hi);
        out.push_back(t);
    }
    return out;
}

ExactSpectrum exact_spectrum(const PauliSum& h, const PipelineConfig& cfg) {
    if (h.n_qubits() > kMaxDenseQubits) throw Error(ErrorKind::TooLarge, "exact spectrum capped at 13 qubits");
    ExactSpectrum spec;
    spec.eigenvalues = hermitian_eigendecomposition(to_dense(h)).values;
    spec.distinct = distinct_eigenvalues(spec.eigenvalues);
    spec.window_lo = cfg.grid_start.value_or(spec.distinct.front() - cfg.grid_step);
    spec.window_hi = cfg.grid_stop.value_or(spec.distinct.back() + cfg.grid_step);
    spec.intervals = theoretical_intervals(spec.distinct, spec.window_lo, spec.window_hi);
    return spec;
}

std::vector<double> drift_grid(const PipelineConfig& cfg, const ExactSpectrum& spec) {
    std::vector<double> grid;
    const double span = spec.window_hi - spec.window_lo;
    const auto count = static_cast<long long>(std::floor(span / cfg.grid_step + 1e-9));
    for (long long i = 0; i <= count; ++i) grid.push_back(spec.window_lo + static_cast<double>(i) * cfg.grid_step);
    return grid;
}

std::string spectrum_csv(const ExactSpectrum& spec, const std::string& hash) {
    std::ostringstream os;
    if (!hash.empty()) os << "# manifest_hash=" << hash << '\n';
    os << "index,eigenvalue,distinct_index,v_lo,v_hi,theoretical_median\n";
    for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
        const auto it = std::min_element(spec.distinct.begin(), spec.distinct.end(), [&](double a, double b) {
            return std::abs(a - spec.eigenvalues(i)) < std::abs(b - spec.eigenvalues(i));
        });
        const auto d = static_cast<std::size_t>(it - spec.distinct.begin());
        const auto& v = spec.intervals[d];
        os << i << ',' << fmt(spec.eigenvalues(i)) << ',' << d << ',' << fmt(v.lo) << ',' << fmt(v.hi) << ','
           << fmt(v.median) << '\n';
    }
    return os.str();
}

SweepResult run_sweep(const PauliSum& h, const PipelineConfig& cfg, const std::vector<double>& grid,
                      const std::optional<NoiseModel>& noise, const std::vector<ClusterSummary>& warm_start) {
    const AnsatzCircuit ansatz = build_ansatz(cfg.family, h.n_qubits(), cfg.layers);
    const int trials = warm_start.empty() ? cfg.init_trials : 1;
    std::vector<std::uint64_t> trial_seed(static_cast<std::size_t>(trials));
    std::vector<Eigen::VectorXd> theta0(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
        trial_seed[static_cast<std::size_t>(t)] = derive_seed(cfg.seed, static_cast<std::uint64_t>(t));
        SplitMix64 rng(trial_seed[static_cast<std::size_t>(t)]);
        Eigen::VectorXd th(ansatz.n_params);
        for (Eigen::Index k = 0; k < th.size(); ++k) th(k) = rng.angle();
        theta0[static_cast<std::size_t>(t)] = th;
    }

    auto warm_theta = [&](double s) -> const Eigen::VectorXd* {
        const ClusterSummary* best = nullptr;
        for (const auto& c : warm_start) {
            if (c.median_theta.size() != ansatz.n_params) continue;
            if (!best || std::abs(c.median_s - s) < std::abs(best->median_s - s)) best = &c;
        }
        return best ? &best->median_theta : nullptr;
    };

    const std::size_t runs = static_cast<std::size_t>(trials) * grid.size();
    std::vector<std::optional<VITERun>> results(runs);
    std::vector<std::string> errors(runs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < runs; r = next++) {
            const std::size_t t = r / grid.size(), si = r % grid.size();
            try {
                const Eigen::VectorXd* warm = warm_start.empty() ? nullptr : warm_theta(grid[si]);
                const Eigen::VectorXd& start = warm ? *warm : theta0[t];
                results[r] = vite_run(h, grid[si], ansatz, start, cfg.vite, noise, trial_seed[t]);
            } catch (const std::exception& e) {
                errors[r] = "s=" + fmt(grid[si]) + " seed=" + std::to_string(trial_seed[t]) + ": " + e.what();
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned nthreads = static_cast<unsigned>(std::min<std::size_t>(runs, cfg.threads > 0 ? cfg.threads : hw));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < nthreads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    SweepResult out;
    out.grid = grid;
    for (std::size_t r = 0; r < runs; ++r) {
        if (!results[r]) {
            ++out.skipped;
            out.failures.push_back(errors[r]);
            continue;
        }
        for (auto& rec : results[r]->records) out.records.push_back(std::move(rec));
        out.energy_histories.push_back(std::move(results[r]->energy_history));
    }
    return out;
}

ClusterOutcome run_cluster(const std::vector<ParameterRecord>& records, const PipelineConfig& cfg) {
    if (records.empty()) throw Error(ErrorKind::TooFewPoints, "no records to cluster");
    int step = cfg.cluster_step;
    if (step == 0) {
        step = 0;
        for (const auto& r : records) step = std::max(step, r.step);
    }
    std::map<std::uint64_t, std::vector<ParameterRecord>> by_seed;
    const std::string& tag = records.front().ansatz_tag;
    for (const auto& r : records) {
        if (r.ansatz_tag != tag) throw Error(ErrorKind::MixedAnsatz, "records mix ansatz tags");
        if (r.step == step) by_seed[r.seed].push_back(r);
    }
    if (by_seed.empty()) throw Error(ErrorKind::TooFewPoints, "no records at step " + std::to_string(step));

    ClusterOutcome out;
    bool have = false;
    double best_score = 0;
    for (auto& [seed, recs] : by_seed) {
        std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.s < b.s; });
        const EmbeddedDataset data = embed_angles(recs);
        ClusterReport rep = select_k_and_cluster(data, cfg.cluster, derive_seed(cfg.seed, seed));
        const double score = rep.k * rep.mean_silhouette;
        out.trials.push_back({seed, rep.k, rep.mean_silhouette, score});
        if (!have || score > best_score + 1e-12) {
            have = true;
            best_score = score;
            out.report = std::move(rep);
            out.chosen_seed = seed;
            out.chosen_records = recs;
        }
    }
    for (auto& c : out.report.clusters) {
        RealMatrix th(static_cast<Eigen::Index>(c.members.size()), out.chosen_records.front().theta.size());
        for (std::size_t i = 0; i < c.members.size(); ++i) {
            th.row(static_cast<Eigen::Index>(i)) = out.chosen_records[c.members[i]].theta.transpose();
        }
        c.median_theta = circular_median(th);
    }
    return out;
}

SpectrumScore score_estimates(const std::vector<SpectrumEstimate>& estimates,
                              const std::vector<TheoreticalInterval>& intervals, int count) {
    SpectrumScore sc;
    sc.all_contained = !estimates.empty();
    const int n = std::min<int>(count, static_cast<int>(intervals.size()));
    for (int i = 0; i < n; ++i) {
        const auto& v = intervals[static_cast<std::size_t>(i)];
        EigenvalueScore e{v.lambda, v.median, std::nan(""), std::numeric_limits<double>::infinity(), false};
        for (const auto& est : estimates) {
            if (std::abs(est.median_s - v.median) < e.error) {
                e.error = std::abs(est.median_s - v.median);
                e.estimate = est.median_s;
            }
        }
        e.contained = e.estimate >= v.lo && e.estimate <= v.hi;
        sc.all_contained = sc.all_contained && e.contained;
        sc.mean_error += e.error / n;
        sc.per_eigenvalue.push_back(e);
    }
    return sc;
}

constexpr double kRefineNudge = 1e-3;

std::vector<RefineRow> run_refine(const ClusterReport& report, const PauliSum& h, const PipelineConfig& cfg) {
    const DenseHamiltonian dense = DenseHamiltonian::from(h);
    const std::vector<double> distinct = distinct_eigenvalues(dense.eig.values);
    const AnsatzCircuit ansatz = build_ansatz(cfg.family, h.n_qubits(), cfg.layers);
    std::vector<RefineRow> rows;
    for (const auto& c : report.clusters) {
        if (c.filtered_s.empty()) continue;
        const double target = nearest_eigenvalue(distinct, c.median_s).lambda;
        // A median sitting exactly on an eigenvalue is nudged off it; the
        // shifted solve is then merely ill-conditioned, which inverse
        // iteration tolerates.
        const double s = std::abs(c.median_s - target) <= kSingularShiftTol ? c.median_s + kRefineNudge : c.median_s;
        std::vector<std::pair<std::string, Statevector>> starts;
        if (c.median_theta.size() == ansatz.n_params) {
            starts.emplace_back("warm", reconstruct_state_from_params(ansatz, c.median_theta));
        }
        starts.emplace_back("uniform", uniform_state(h.n_qubits()));
        for (const auto& [label, v0] : starts) {
            auto record = [&, label = label](const std::string& method, const RefinementResult& r) {
                rows.push_back({c.id, method, label, s, target, r.eigenvalue_estimate, r.iterations,
                                r.iterations_to_accuracy(target, cfg.refine_accuracy), r.residual, r.converged});
            };
            if (cfg.refine_method != "poly") record("exact_inverse", inverse_power_iterate(dense, s, v0, cfg.refine));
            if (cfg.refine_method != "exact") {
                try {
                    record("poly_inverse", polynomial_inverse_power(dense, s, v0, cfg.refine_degree, cfg.refine));
                } catch (const Error&) {
                    // Window too narrow for the surrogate at this shift; the exact row stands.
                }
            }
        }
    }
    return rows;
}

std::string refine_csv(const std::vector<RefineRow>& rows, const std::string& hash) {
    std::ostringstream os;
    if (!hash.empty()) os << "# manifest_hash=" << hash << '\n';
    os << "cluster,method,start,s,target,eigenvalue,iterations,iterations_to_accuracy,residual,converged\n";
    for (const auto& r : rows) {
        os << r.cluster_id << ',' << r.method << ',' << r.start << ',' << fmt(r.s) << ',' << fmt(r.target) << ','
           << fmt(r.eigenvalue) << ',' << r.iterations << ',' << r.iterations_to_accuracy << ',' << fmt(r.residual)
           << ',' << (r.converged ? "true" : "false") << '\n';
    }
    return os.str();
}

NoiseStudy run_noise_study(const PauliSum& h, const PipelineConfig& cfg) {
    if (h.n_qubits() > kMaxDensityQubits) throw Error(ErrorKind::TooLarge, "noise study capped at 8 qubits");
    const ExactSpectrum spec = exact_spectrum(h, cfg);
    const std::vector<double> grid = drift_grid(cfg, spec);
    std::vector<double> p2s = cfg.noise_p2_list;
    // The trend runs from the noiseless baseline upward.
    if (std::find(p2s.begin(), p2s.end(), 0.0) == p2s.end()) p2s.push_back(0.0);
    std::sort(p2s.begin(), p2s.end());
    NoiseStudy study;
    for (double p2 : p2s) {
        NoiseLevelResult lvl;
        lvl.p2 = p2;
        lvl.p1 = p2 == 0 ? 0.0 : cfg.noise.p1;
        const NoiseModel nm{lvl.p1, lvl.p2};
        const SweepResult sw = run_sweep(h, cfg, grid, nm);
        for (int step : cfg.vite.record_at) {
            PipelineConfig c = cfg;
            c.cluster_step = step;
            try {
                const ClusterOutcome co = run_cluster(sw.records, c);
                const SpectrumScore sc = score_estimates(estimate_spectrum(co.report), spec.intervals, cfg.eval_count);
                lvl.error_by_step[step] = sc.mean_error;
                lvl.clusters_by_step[step] = co.report.k;
            } catch (const Error&) {
                // Clustering failure is a reported outcome here, not a crash.
                lvl.error_by_step[step] = std::nan("");
                lvl.clusters_by_step[step] = 0;
            }
        }
        study.levels.push_back(std::move(lvl));
    }
    for (int step : cfg.vite.record_at) {
        std::vector<double> series;
        for (const auto& l : study.levels) series.push_back(l.error_by_step.at(step));
        if (series.size() >= 4 && std::none_of(series.begin(), series.end(), [](double x) { return std::isnan(x); })) {
            study.trend_by_step[step] = mann_kendall(series);
        }
    }
    return study;
}

std::string noise_study_csv(const NoiseStudy& study, const std::string& hash) {
    std::ostringstream os;
    if (!hash.empty()) os << "# manifest_hash=" << hash << '\n';
    os << "p1,p2,step,clusters,avg_error,mk_tau,mk_p\n";
    for (const auto& l : study.levels) {
        for (const auto& [step, err] : l.error_by_step) {
            os << fmt(l.p1) << ',' << fmt(l.p2) << ',' << step << ',' << l.clusters_by_step.at(step) << ','
               << fmt(err) << ',';
            const auto it = study.trend_by_step.find(step);
            if (it != study.trend_by_step.end()) os << fmt(it->second.tau) << ',' << fmt(it->second.p_value);
            else os << ',';
            os << '\n';
        }
    }
    return os.str();
}

std::string sweep_manifest_json(const PipelineConfig& cfg, const SweepResult& sweep) {
    nlohmann::ordered_json j;
    j["manifest_hash"] = manifest_hash(cfg);
    j["version"] = "0.1.0";
    j["config"] = config_to_text(cfg);
    std::vector<std::uint64_t> seeds;
    for (int t = 0; t < cfg.init_trials; ++t) seeds.push_back(derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    j["trial_seeds"] = seeds;
    j["grid"] = sweep.grid;
    j["records"] = sweep.records.size();
    j["skipped"] = sweep.skipped;
    j["failures"] = sweep.failures;
    return j.dump(2) + "\n";
}

}  // namespace specprior
