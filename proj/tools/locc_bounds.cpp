// Command-line front end: certified upper bounds and see-saw lower bounds on
// LOCC state discrimination, parameter sweeps, benchmark tables, and
// certificate checking. Machine-readable output goes to stdout, progress and
// diagnostics to stderr.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include <locc/certify.hpp>

using namespace locc;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitCertifyFail = 3;
constexpr int kExitUsage = 64;
constexpr int kExitSchema = 65;

int worker_count() {
    if (const char* env = std::getenv("LOCC_BOUNDS_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs jobs on a bounded pool; results are collected by index so output
// order never depends on completion order.
template <typename Fn>
void run_pool(int njobs, Fn&& fn) {
    const int threads = std::min(worker_count(), njobs);
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= njobs) return;
                fn(i);
            }
        });
    for (auto& th : pool) th.join();
}

StateEnsemble parse_ensemble(const std::string& spec) {
    if (spec == "trine") return double_trine();
    if (spec == "ququart") return ququart_ensemble();
    if (spec.rfind("bell:", 0) == 0) {
        double d, t, x;
        char c1, c2;
        std::istringstream in(spec.substr(5));
        if (!(in >> d >> c1 >> t >> c2 >> x) || c1 != ',' || c2 != ',')
            throw CLI::ValidationError("--ensemble",
                                       "bell spec must be bell:delta,tau,xi in units of pi");
        return bell_basis_family(d * M_PI, t * M_PI, x * M_PI);
    }
    if (spec.rfind("file:", 0) == 0) return load_ensemble(spec.substr(5));
    throw CLI::ValidationError("--ensemble",
                               "expected trine | ququart | bell:d,t,x | file:PATH");
}

struct RunRecord {
    std::string ensemble;
    std::string method;
    std::optional<int> m, k;
    std::optional<std::string> direction;
    std::string kind;
    std::optional<double> value, gap;
    double wall_time_s = 0.0;
    std::optional<std::uint64_t> seed;
    std::string status = "optimal";
};

json record_json(const RunRecord& r) {
    json j;
    j["ensemble"] = r.ensemble;
    j["method"] = r.method;
    j["m"] = r.m ? json(*r.m) : json(nullptr);
    j["k"] = r.k ? json(*r.k) : json(nullptr);
    j["direction"] = r.direction ? json(*r.direction) : json(nullptr);
    j["kind"] = r.kind;
    j["value"] = r.value ? json(*r.value) : json(nullptr);
    j["gap"] = r.gap ? json(*r.gap) : json(nullptr);
    j["wall_time_s"] = r.wall_time_s;
    j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
    j["status"] = r.status;
    return j;
}

std::string csv_cell(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream out;
    out.precision(10);
    out << *v;
    return out.str();
}

void print_record(const RunRecord& r, const std::string& format) {
    if (format == "csv") {
        std::cout << "ensemble,method,m,k,direction,kind,value,gap,wall_time_s,seed,status\n"
                  << r.ensemble << ',' << r.method << ',' << (r.m ? std::to_string(*r.m) : "")
                  << ',' << (r.k ? std::to_string(*r.k) : "") << ','
                  << (r.direction ? *r.direction : "") << ',' << r.kind << ','
                  << csv_cell(r.value) << ',' << csv_cell(r.gap) << ',' << r.wall_time_s << ','
                  << (r.seed ? std::to_string(*r.seed) : "") << ',' << r.status << "\n";
    } else {
        std::cout << record_json(r).dump() << "\n";
    }
}

double now_seconds(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- bound ----------------------------------------------------------------------

int cmd_bound(const std::string& espec, const std::string& method, int m, int k,
              const std::string& direction, double eps, const std::string& format,
              bool relabel, long long size_cap) {
    const auto t0 = std::chrono::steady_clock::now();
    StateEnsemble e = parse_ensemble(espec);
    RunRecord rec;
    rec.ensemble = espec;
    rec.method = method;
    rec.kind = "upper";

    BoundMethod bm;
    std::optional<HierarchyParams> params;
    if (method == "global") {
        bm = BoundMethod::global;
    } else if (method == "ppt") {
        bm = BoundMethod::ppt;
    } else if (method == "1r" || method == "na") {
        bm = method == "1r" ? BoundMethod::oneround : BoundMethod::nonadaptive;
        HierarchyParams p;
        p.m = m;
        p.k = k;
        p.direction = direction == "ba" ? Direction::BtoA : Direction::AtoB;
        params = p;
        rec.m = m;
        rec.k = k;
        rec.direction = direction;
    } else {
        throw CLI::ValidationError("--method", "expected global | ppt | 1r | na");
    }

    BuildOptions opts;
    opts.relabel_reduction = relabel;
    if (size_cap > 0) opts.size_cap = size_cap;
    try {
        BoundResult b = upper_bound(e, bm, params, eps, opts);
        rec.value = b.value;
        rec.gap = b.gap;
        rec.wall_time_s = now_seconds(t0);
        print_record(rec, format);
        return kExitOk;
    } catch (const SolveError& err) {
        rec.status = to_string(err.status);
        rec.wall_time_s = now_seconds(t0);
        print_record(rec, format);
        return err.status == SolveStatus::infeasible ? kExitInfeasible : kExitError;
    }
}

// ---- seesaw ---------------------------------------------------------------------

int cmd_seesaw(const std::string& espec, const std::string& variant, int m, int m_B,
               int restarts, std::uint64_t seed, const std::string& direction,
               const std::string& dump_path, const std::string& format, bool verbose) {
    const auto t0 = std::chrono::steady_clock::now();
    StateEnsemble e = parse_ensemble(espec);
    const bool swapped = direction == "ba";
    StateEnsemble frame = swapped ? swap_parties(e) : e;

    SeesawOptions opts;
    opts.restarts = restarts;
    opts.seed = seed;
    opts.verbose = verbose;

    RunRecord rec;
    rec.ensemble = espec;
    rec.method = variant == "na" ? "seesaw-na" : "seesaw-1r";
    rec.kind = "lower";
    rec.m = m;
    rec.direction = direction;
    rec.seed = seed;

    if (variant == "1r") {
        auto res = seesaw_oneround(frame, m, opts);
        rec.value = res.bound.value;
        rec.gap = res.bound.gap;
        if (!dump_path.empty()) {
            CertificateArray1R c = certificate_from_strategy(frame, res.strategy, 1);
            save_certificate(certificate_to_json(c), dump_path);
        }
    } else if (variant == "na") {
        auto res = seesaw_nonadaptive(frame, m, m_B, opts);
        rec.value = res.bound.value;
        rec.gap = res.bound.gap;
        if (!dump_path.empty()) {
            CertificateArrayNA c = certificate_from_strategy(frame, res.strategy, 1);
            save_certificate(certificate_to_json(c), dump_path);
        }
    } else {
        throw CLI::ValidationError("--variant", "expected 1r | na");
    }
    rec.wall_time_s = now_seconds(t0);
    print_record(rec, format);
    return kExitOk;
}

// ---- sweep ----------------------------------------------------------------------

struct SweepRow {
    double tau;  // in units of pi
    std::string method;
    std::optional<int> m, k;
    std::string direction;
    std::string kind;
    double value;
    double gap;
};

std::string sweep_csv_row(const SweepRow& r) {
    std::ostringstream out;
    out.precision(10);
    out << r.tau << ',' << r.method << ',' << (r.m ? std::to_string(*r.m) : "") << ','
        << (r.k ? std::to_string(*r.k) : "") << ',' << r.direction << ',' << r.kind << ','
        << r.value << ',' << r.gap;
    return out.str();
}

int cmd_sweep(const std::string& grid_spec, const std::string& methods_list, int m, int k,
              double eps, int restarts, std::uint64_t seed, bool with_tangle,
              const std::string& out_path) {
    double start = 0, stop = 0;
    int count = 0;
    {
        char c1, c2;
        std::istringstream in(grid_spec);
        if (!(in >> start >> c1 >> stop >> c2 >> count) || c1 != ':' || c2 != ':' || count < 1)
            throw CLI::ValidationError("--tau-grid", "expected START:STOP:COUNT in units of pi");
    }
    std::vector<std::string> methods;
    {
        std::istringstream in(methods_list);
        std::string tok;
        while (std::getline(in, tok, ',')) methods.push_back(tok);
    }
    if (with_tangle) methods.push_back("tangle");
    std::vector<double> taus(count);
    for (int i = 0; i < count; ++i)
        taus[i] = count == 1 ? start : start + (stop - start) * i / (count - 1);

    struct Job {
        double tau;
        std::string method;
    };
    std::vector<Job> jobs;
    for (double tau : taus)
        for (const auto& mth : methods) jobs.push_back({tau, mth});

    std::vector<std::vector<SweepRow>> results(jobs.size());
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex mu;

    run_pool(static_cast<int>(jobs.size()), [&](int i) {
        if (failed) return;
        const Job& job = jobs[i];
        const double tau = job.tau * M_PI;
        try {
            StateEnsemble bell = bell_basis_family(M_PI / 4, tau, M_PI / 2);
            std::vector<SweepRow>& rows = results[i];
            BuildOptions opts;
            opts.relabel_reduction = true;
            if (job.method == "analytic") {
                rows.push_back({job.tau, "analytic", {}, {}, "ab", "analytic",
                                analytic_p_succ_AtoB(tau), 0.0});
                rows.push_back({job.tau, "analytic", {}, {}, "ba", "analytic",
                                analytic_p_succ_BtoA(tau), 0.0});
            } else if (job.method == "tangle") {
                rows.push_back({job.tau, "tangle", {}, {}, "", "analytic",
                                tangle(bell.items[0].state), 0.0});
            } else if (job.method == "global" || job.method == "ppt") {
                BoundResult b = upper_bound(
                    bell, job.method == "ppt" ? BoundMethod::ppt : BoundMethod::global,
                    std::nullopt, eps, opts);
                rows.push_back({job.tau, job.method, {}, {}, "", "upper", b.value, b.gap});
            } else if (job.method == "seesaw:ab" || job.method == "seesaw:ba") {
                const bool ba = job.method == "seesaw:ba";
                StateEnsemble frame = ba ? swap_parties(bell) : bell;
                SeesawOptions so;
                so.restarts = restarts;
                so.seed = seed;
                auto res = seesaw_oneround(frame, m, so);
                rows.push_back({job.tau, "seesaw-1r", m, {}, ba ? "ba" : "ab", "lower",
                                res.bound.value, res.bound.gap});
            } else if (job.method == "1r:ab" || job.method == "1r:ba" || job.method == "na") {
                const bool ba = job.method == "1r:ba";
                HierarchyParams p;
                p.m = m;
                p.k = k;
                p.direction = ba ? Direction::BtoA : Direction::AtoB;
                BoundResult b = upper_bound(
                    bell, job.method == "na" ? BoundMethod::nonadaptive : BoundMethod::oneround,
                    p, eps, opts);
                rows.push_back({job.tau, job.method == "na" ? "na" : "1r", m, k,
                                ba ? "ba" : "ab", "upper", b.value, b.gap});
            } else {
                throw std::invalid_argument("unknown sweep method: " + job.method);
            }
        } catch (const std::exception& err) {
            std::lock_guard<std::mutex> lock(mu);
            failed = true;
            failure = err.what();
        }
    });
    if (failed) {
        std::cerr << "sweep failed: " << failure << "\n";
        return kExitError;
    }

    std::ostringstream csv;
    csv << "tau,method,m,k,direction,kind,value,gap\n";
    csv.precision(10);
    for (const auto& rows : results)
        for (const auto& r : rows) csv << sweep_csv_row(r) << "\n";
    if (out_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "cannot write " << out_path << "\n";
            return kExitError;
        }
        out << csv.str();
    }
    return kExitOk;
}

// ---- tables ---------------------------------------------------------------------

json load_expected_tables(const std::string& override_path) {
    std::string path = override_path;
    if (path.empty()) path = std::string(LOCC_DATA_DIR) + "/expected_tables.json";
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open expected-value file " + path);
    json j;
    in >> j;
    return j;
}

int cmd_tables(const std::string& which, int k_override, int restarts, double eps,
               std::uint64_t seed, const std::string& expected_path) {
    json expected = load_expected_tables(expected_path);
    if (!expected.contains(which)) throw std::runtime_error("no expected table for " + which);
    const json& table = expected[which];
    const int k = k_override > 0 ? k_override : table["k"].get<int>();
    StateEnsemble e = which == "ququart" ? ququart_ensemble() : double_trine();

    struct Cell {
        int m;
        std::string method;  // seesaw-1r, 1r, seesaw-na, na
        std::string kind;
        double expected;
        double tol;
        std::optional<double> value, gap;
        std::string verdict;
        double wall = 0;
    };
    std::vector<Cell> cells;
    for (const auto& row : table["rows"]) {
        const int m = row["m"].get<int>();
        for (const auto& [method, spec] : row["cells"].items()) {
            Cell c;
            c.m = m;
            c.method = method;
            c.kind = method.rfind("seesaw", 0) == 0 ? "lower" : "upper";
            c.expected = spec["value"].get<double>();
            c.tol = spec["tol"].get<double>();
            cells.push_back(c);
        }
    }

    run_pool(static_cast<int>(cells.size()), [&](int i) {
        Cell& c = cells[i];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if (c.method == "seesaw-1r") {
                SeesawOptions so;
                so.restarts = restarts;
                so.seed = seed;
                auto res = seesaw_oneround(e, c.m, so);
                c.value = res.bound.value;
                c.gap = res.bound.gap;
                c.verdict = *c.value >= c.expected - c.tol ? "ok" : "MISS";
            } else if (c.method == "seesaw-na") {
                SeesawOptions so;
                so.restarts = restarts;
                so.seed = seed;
                auto res = seesaw_nonadaptive(e, c.m, -1, so);
                c.value = res.bound.value;
                c.gap = res.bound.gap;
                c.verdict = *c.value >= c.expected - c.tol ? "ok" : "MISS";
            } else {
                HierarchyParams p;
                p.m = c.m;
                p.k = k;
                p.direction = Direction::AtoB;
                BuildOptions opts;
                opts.relabel_reduction = true;
                opts.size_cap = 400000000;  // the table runs raise the default cap
                BoundResult b = upper_bound(
                    e, c.method == "na" ? BoundMethod::nonadaptive : BoundMethod::oneround, p,
                    eps, opts);
                c.value = b.value;
                c.gap = b.gap;
                c.verdict = std::abs(*c.value - c.expected) <= c.tol ? "ok" : "MISS";
            }
        } catch (const SizeCapExceeded&) {
            c.verdict = "refused(size-cap)";
        } catch (const std::exception& err) {
            c.verdict = std::string("error(") + err.what() + ")";
        }
        c.wall = now_seconds(t0);
        std::cerr << "cell " << which << " m=" << c.m << " " << c.method << ": "
                  << (c.value ? std::to_string(*c.value) : std::string("-")) << " ["
                  << c.verdict << "] in " << c.wall << "s\n";
    });

    // human-readable table on stderr, machine CSV on stdout
    std::cerr << "\n" << which << " (k=" << k << ", restarts=" << restarts << ")\n";
    std::cerr << "  m  method      value      expected  verdict\n";
    for (const auto& c : cells) {
        std::cerr << "  " << c.m << "  " << c.method;
        for (size_t pad = c.method.size(); pad < 10; ++pad) std::cerr << ' ';
        std::cerr << ' ' << (c.value ? std::to_string(*c.value) : std::string("-")) << "  "
                  << c.expected << "  " << c.verdict << "\n";
    }

    std::cout << "table,m,method,kind,value,gap,expected,tol,verdict,wall_time_s\n";
    std::cout.precision(10);
    bool all_ok = true;
    for (const auto& c : cells) {
        std::cout << which << ',' << c.m << ',' << c.method << ',' << c.kind << ','
                  << csv_cell(c.value) << ',' << csv_cell(c.gap) << ',' << c.expected << ','
                  << c.tol << ',' << c.verdict << ',' << c.wall << "\n";
        if (c.verdict != "ok") all_ok = false;
    }
    return all_ok ? kExitOk : kExitError;
}

// ---- certify --------------------------------------------------------------------

int cmd_certify(const std::string& cert_path, const std::string& espec,
                const std::string& variant, double tol) {
    StateEnsemble e = parse_ensemble(espec);
    std::string text;
    try {
        text = load_text_file(cert_path);
    } catch (const std::exception& err) {
        std::cerr << err.what() << "\n";
        return kExitSchema;
    }
    ResidualReport rep;
    try {
        if (variant == "1r") {
            CertificateArray1R c = certificate_1r_from_json(text);
            if (c.n != e.size() || c.d_A * c.d_B != e.d_A * e.d_B)
                throw std::invalid_argument("certificate does not match the ensemble shape");
            rep = check_1r_certificate(c, std::nullopt, tol);
        } else if (variant == "na") {
            CertificateArrayNA c = certificate_na_from_json(text);
            if (c.n != e.size() || c.d_A * c.d_B != e.d_A * e.d_B)
                throw std::invalid_argument("certificate does not match the ensemble shape");
            rep = check_na_certificate(c, std::nullopt, tol);
        } else {
            throw CLI::ValidationError("--variant", "expected 1r | na");
        }
    } catch (const CLI::ValidationError&) {
        throw;
    } catch (const std::invalid_argument& err) {
        std::cerr << "certificate schema error: " << err.what() << "\n";
        return kExitSchema;
    }
    std::cout << rep.to_json() << "\n";
    return rep.pass ? kExitOk : kExitCertifyFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bounds on LOCC state discrimination with bounded classical communication"};
    app.require_subcommand(1);

    std::string espec = "trine", method = "global", direction = "ab", format = "json";
    std::string variant = "1r", dump_path, grid_spec = "0:0.5:9";
    std::string methods_list = "ppt,1r:ba,1r:ab,analytic", out_path, expected_path, cert_path;
    std::string which = "trine";
    int m = 2, k = 1, m_B = -1, restarts = 50, k_override = 0;
    std::uint64_t seed = 0;
    double eps = 1e-6, tol = 1e-5;
    long long size_cap = 0;
    bool relabel = true, verbose = false, with_tangle = false;

    auto* bound = app.add_subcommand("bound", "certified upper bound for one method");
    bound->add_option("--ensemble", espec,
                      "trine | ququart | bell:d,t,x (units of pi) | file:PATH");
    bound->add_option("--method", method, "global | ppt | 1r | na");
    bound->add_option("--m", m, "message alphabet size");
    bound->add_option("--k", k, "hierarchy level");
    bound->add_option("--direction", direction, "ab | ba");
    bound->add_option("--eps", eps, "target duality gap");
    bound->add_option("--format", format, "json | csv");
    bound->add_flag("--no-relabel-reduction{false}", relabel,
                    "disable the message-relabel reduction");
    bound->add_option("--size-cap", size_cap, "override the build size cap");

    auto* seesaw = app.add_subcommand("seesaw", "see-saw lower bound with explicit strategy");
    seesaw->add_option("--ensemble", espec);
    seesaw->add_option("--variant", variant, "1r | na");
    seesaw->add_option("--m", m, "message alphabet size");
    seesaw->add_option("--m-bob", m_B, "second-party outcomes (na; default d_B^2)");
    seesaw->add_option("--restarts", restarts);
    seesaw->add_option("--seed", seed);
    seesaw->add_option("--direction", direction, "ab | ba");
    seesaw->add_option("--dump-strategy", dump_path, "write the product certificate JSON here");
    seesaw->add_option("--format", format, "json | csv");
    seesaw->add_flag("--verbose", verbose);

    auto* sweep = app.add_subcommand("sweep", "tau sweep over the Bell-basis family (CSV)");
    sweep->add_option("--tau-grid", grid_spec, "START:STOP:COUNT in units of pi");
    sweep->add_option("--methods", methods_list,
                      "comma list: global,ppt,1r:ab,1r:ba,na,seesaw:ab,seesaw:ba,analytic,tangle");
    sweep->add_option("--m", m);
    sweep->add_option("--k", k);
    sweep->add_option("--eps", eps);
    sweep->add_option("--restarts", restarts);
    sweep->add_option("--seed", seed);
    sweep->add_flag("--with-tangle", with_tangle, "append tangle rows");
    sweep->add_option("--out", out_path, "write CSV here instead of stdout");

    auto* tables = app.add_subcommand("tables", "reproduce the benchmark tables");
    tables->add_option("--which", which, "trine | ququart");
    tables->add_option("--k", k_override, "hierarchy level override");
    tables->add_option("--restarts", restarts);
    tables->add_option("--eps", eps)->default_val(2e-5);
    tables->add_option("--seed", seed);
    tables->add_option("--expected", expected_path, "expected-value JSON override");

    auto* certify = app.add_subcommand("certify", "check a certificate file");
    certify->add_option("--certificate", cert_path)->required();
    certify->add_option("--ensemble", espec);
    certify->add_option("--variant", variant, "1r | na");
    certify->add_option("--tol", tol);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        if (err.get_exit_code() == 0) return app.exit(err);  // --help
        app.exit(err);
        return kExitUsage;
    }

    try {
        if (bound->parsed())
            return cmd_bound(espec, method, m, k, direction, eps, format, relabel, size_cap);
        if (seesaw->parsed())
            return cmd_seesaw(espec, variant, m, m_B, restarts, seed, direction, dump_path,
                              format, verbose);
        if (sweep->parsed())
            return cmd_sweep(grid_spec, methods_list, m, k, eps, restarts, seed, with_tangle,
                             out_path);
        if (tables->parsed())
            return cmd_tables(which, k_override, restarts, eps, seed, expected_path);
        if (certify->parsed()) return cmd_certify(cert_path, espec, variant, tol);
    } catch (const CLI::ValidationError& err) {
        std::cerr << err.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitError;
    }
    return kExitUsage;
}
