// Command-line front end: exact spherical sampling, NLS MCMC, Green's
// function queries, free-energy landscapes, the phase diagram, and the
// verification suites. All randomness derives from --seed; rerunning any
// subcommand with the same arguments reproduces every artifact byte for byte
// (wall-clock timing goes to a separate timing.txt sidecar).

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "nlstorus/experiments.hpp"

using namespace nlstorus;
namespace fs = std::filesystem;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SiteSet read_hole(const std::string& path, const TorusShape& s) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read hole file " + path);
    std::vector<long> sites;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<int> x(std::size_t(s.d));
        for (int a = 0; a < s.d; ++a)
            if (!(ls >> x[std::size_t(a)]))
                throw std::runtime_error("hole file: expected " + std::to_string(s.d) +
                                         " coordinates per line");
        sites.push_back(s.index(x));
    }
    return SiteSet::of(s, sites);
}

void write_batch(const std::string& dir, const SampleBatch& batch, const RunConfig& cfg,
                 double wall) {
    ensure_dir(dir);
    ensure_dir(dir + "/snapshots");
    long keep = std::min<long>(batch.count, 64);
    for (long i = 0; i < keep; ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "%s/snapshots/sample_%04ld.nlsf", dir.c_str(), i);
        write_field(name, batch.fields[std::size_t(i)]);
    }
    nlohmann::ordered_json j;
    j["sampler"] = "spherical";
    j["seed"] = batch.seed;
    j["count"] = batch.count;
    j["attempts"] = batch.attempts;
    j["acceptance_rate"] = batch.acceptance;
    j["exact"] = batch.exact;
    j["theta"] = batch.theta;
    j["gamma"] = batch.gamma;
    j["snapshots_written"] = keep;
    write_text(dir + "/report.json", j.dump(2) + "\n");
    write_text(dir + "/config.echo", serialize_config(cfg));
    write_text(dir + "/timing.txt", "wall_seconds = " + std::to_string(wall) + "\n");
}

int run_greens(int d, double m, int n, const std::string& out) {
    double value = zd_greens_diag(d, m);
    // independent-oracle error estimate: transformed quadrature vs the
    // midpoint rule with Richardson refinement
    double oracle = zd_greens_diag_midpoint(d, m, 5, 1e-9);
    double err = std::abs(value - oracle);
    std::cout << "zd_greens_diag(d=" << d << ", m=" << format_double(m)
              << ") = " << format_double(value) << "\n";
    std::cout << "quadrature error estimate (vs midpoint oracle): " << format_double(err) << "\n";
    if (m == 0.0) std::cout << "C_" << d << " = " << format_double(value) << "\n";
    if (!out.empty() && n > 0) {
        ensure_dir(out);
        ensure_dir(out + "/curves");
        TorusShape s = TorusShape::make(d, n);
        std::ostringstream csv;
        csv << "distance,value,mass,n,d\n";
        if (m > 0) {
            TorusGreens g(s, m);
            for (int r = 0; r <= n / 2; ++r) {
                std::vector<int> off(std::size_t(d), 0);
                off[0] = r;
                csv << r << "," << format_double(g.at_offset(s.index(off))) << ","
                    << format_double(m) << "," << n << "," << d << "\n";
            }
        } else {
            ZeroAvgGreens g(s);
            for (int r = 0; r <= n / 2; ++r) {
                std::vector<int> off(std::size_t(d), 0);
                off[0] = r;
                csv << r << "," << format_double(g.at_offset(s.index(off))) << ",0," << n << ","
                    << d << "\n";
            }
        }
        write_text(out + "/curves/greens_slice.csv", csv.str());
    }
    return 0;
}

void write_trace_csv(const std::string& path, const ChainRecord& rec) {
    std::ostringstream csv;
    csv << "sweep,mass_fraction,linf_over_sqrtN,tilt,sep_mass_fraction\n";
    for (const TraceRow& row : rec.trace)
        csv << row.sweep << "," << format_double(row.mass_fraction_total) << ","
            << format_double(row.linf_over_sqrtN) << "," << format_double(row.tilt) << ","
            << format_double(row.sep_mass_fraction) << "\n";
    write_text(path, csv.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lattice NLS Gibbs-measure toolkit"};
    app.require_subcommand(1);

    // ---- greens ----
    auto* cmd_g = app.add_subcommand("greens", "Z^d Green's diagonal / torus kernel slices");
    int g_d = 3, g_n = 0;
    double g_m = 0.0;
    std::string g_out;
    cmd_g->add_option("--d", g_d);
    cmd_g->add_option("--m", g_m);
    cmd_g->add_option("--n", g_n);
    cmd_g->add_option("--out", g_out);

    // ---- sample-spherical ----
    auto* cmd_s = app.add_subcommand("sample-spherical", "exact spherical-law sampler");
    RunConfig scfg;
    scfg.count = 1000;
    std::string s_hole, s_boundary, s_out;
    cmd_s->add_option("--d", scfg.d);
    cmd_s->add_option("--n", scfg.n);
    cmd_s->add_option("--theta", scfg.theta)->required();
    cmd_s->add_option("--gamma", scfg.gamma);
    cmd_s->add_option("--count", scfg.count);
    cmd_s->add_option("--seed", scfg.seed);
    cmd_s->add_option("--hole", s_hole);
    cmd_s->add_option("--boundary", s_boundary);
    cmd_s->add_option("--out", s_out)->required();

    // ---- sample-nls ----
    auto* cmd_n = app.add_subcommand("sample-nls", "Metropolis sampler for the NLS measure");
    RunConfig ncfg;
    std::string n_hole, n_boundary, n_out;
    double n_linf = 0;
    cmd_n->add_option("--d", ncfg.d);
    cmd_n->add_option("--n", ncfg.n);
    cmd_n->add_option("--theta", ncfg.theta)->required();
    cmd_n->add_option("--nu", ncfg.nu)->required();
    cmd_n->add_option("--p", ncfg.p);
    cmd_n->add_option("--gamma", ncfg.gamma);
    cmd_n->add_option("--eps", ncfg.eps);
    cmd_n->add_option("--steps", ncfg.steps);
    cmd_n->add_option("--burnin", ncfg.burnin);
    cmd_n->add_option("--thinning", ncfg.thinning);
    cmd_n->add_option("--seed", ncfg.seed);
    cmd_n->add_option("--linf-cap", n_linf);
    cmd_n->add_option("--hole", n_hole);
    cmd_n->add_option("--boundary", n_boundary);
    cmd_n->add_option("--out", n_out)->required();

    // ---- landscape ----
    auto* cmd_l = app.add_subcommand("landscape", "free-energy landscape table");
    double l_theta = 0.5, l_nu = 1.0, l_p = 6.0;
    int l_d = 3, l_agrid = 321;
    std::string l_out;
    cmd_l->add_option("--theta", l_theta)->required();
    cmd_l->add_option("--nu", l_nu)->required();
    cmd_l->add_option("--p", l_p);
    cmd_l->add_option("--d", l_d);
    cmd_l->add_option("--a-grid", l_agrid);
    cmd_l->add_option("--out", l_out)->required();

    // ---- phase-diagram ----
    auto* cmd_p = app.add_subcommand("phase-diagram", "critical curve nu_c(theta)");
    double p_p = 6.0;
    int p_d = 3;
    std::string p_range = "0.05:0.6:12", p_out;
    cmd_p->add_option("--p", p_p);
    cmd_p->add_option("--d", p_d);
    cmd_p->add_option("--theta-range", p_range);
    cmd_p->add_option("--out", p_out)->required();

    // ---- verify ----
    auto* cmd_v = app.add_subcommand("verify", "verification suites");
    std::string v_suite = "all", v_config, v_out;
    cmd_v->add_option("--suite", v_suite)
        ->check(CLI::IsMember({"subcritical", "massless", "scaling", "supercritical", "double",
                               "tempering", "tails", "all"}));
    cmd_v->add_option("--config", v_config);
    cmd_v->add_option("--out", v_out)->required();

    try {
        app.parse(argc, argv);
        auto t0 = clock_type::now();

        if (cmd_g->parsed()) return run_greens(g_d, g_m, g_n, g_out);

        if (cmd_s->parsed()) {
            TorusShape shape = TorusShape::make(scfg.d, scfg.n);
            SphericalParams sp;
            sp.shape = shape;
            sp.theta = scfg.theta;
            sp.gamma = scfg.gamma;
            SampleBatch batch;
            if (!s_hole.empty()) {
                Boundary bd;
                bd.U = read_hole(s_hole, shape);
                bd.f = s_boundary.empty() ? Field(shape) : read_field(s_boundary);
                sp.boundary = bd;
                batch = sample_spherical_boundary(sp, scfg.count, scfg.seed);
            } else {
                batch = sample_spherical(sp, scfg.count, scfg.seed);
            }
            scfg.experiment = "sample-spherical";
            scfg.out = s_out;
            write_batch(s_out, batch, scfg, seconds_since(t0));
            std::cout << "acceptance_rate = " << format_double(batch.acceptance) << "\n";
            return 0;
        }

        if (cmd_n->parsed()) {
            TorusShape shape = TorusShape::make(ncfg.d, ncfg.n);
            NlsParams np;
            np.shape = shape;
            np.theta = ncfg.theta;
            np.nu = ncfg.nu;
            np.p = ncfg.p;
            np.gamma = ncfg.gamma;
            if (n_linf > 0) np.linf_cap = n_linf;
            if (!n_hole.empty()) {
                Boundary bd;
                bd.U = read_hole(n_hole, shape);
                bd.f = n_boundary.empty() ? Field(shape) : read_field(n_boundary);
                np.boundary = bd;
            }
            Schedule sch;
            sch.sweeps = ncfg.steps;
            sch.burnin = ncfg.burnin;
            sch.thin_snapshots = ncfg.thinning;
            sch.sep_eps = ncfg.eps;
            ChainRecord rec = run_mcmc(np, sch, ncfg.seed);
            ensure_dir(n_out);
            ensure_dir(n_out + "/curves");
            ensure_dir(n_out + "/snapshots");
            write_trace_csv(n_out + "/curves/trace.csv", rec);
            long keep = std::min<long>(long(rec.snapshots.size()), 64);
            for (long i = 0; i < keep; ++i) {
                char name[96];
                std::snprintf(name, sizeof name, "%s/snapshots/state_%04ld.nlsf", n_out.c_str(), i);
                write_field(name, rec.snapshots[std::size_t(i)]);
            }
            nlohmann::ordered_json j;
            j["sampler"] = "nls-mcmc";
            j["seed"] = rec.seed;
            j["sweeps"] = rec.sweeps;
            j["burnin"] = rec.burnin;
            j["thin"] = rec.thin;
            j["acceptance"] = {{"site", rec.accept_site},
                               {"radial", rec.accept_radial},
                               {"zero_shift", rec.accept_shift},
                               {"teleport", rec.accept_teleport}};
            j["iat_tilt_trace"] = rec.iat_tilt;
            j["snapshots_written"] = keep;
            ncfg.experiment = "sample-nls";
            ncfg.out = n_out;
            ncfg.linf_cap = n_linf;
            write_text(n_out + "/report.json", j.dump(2) + "\n");
            write_text(n_out + "/config.echo", serialize_config(ncfg));
            write_text(n_out + "/timing.txt",
                       "wall_seconds = " + std::to_string(seconds_since(t0)) + "\n");
            return 0;
        }

        if (cmd_l->parsed()) {
            Landscape ls(l_p, l_d);
            double numax = std::max(l_nu, 1.0);
            ls.ensure_i_grid(numax);
            LandscapeTable t = landscape_table(ls, l_theta, l_nu, l_agrid);
            ensure_dir(l_out);
            ensure_dir(l_out + "/curves");
            std::ostringstream csv;
            csv << "a,F,I_arg,I,W_arg,W\n";
            for (std::size_t i = 0; i < t.a_grid.size(); ++i)
                csv << format_double(t.a_grid[i]) << "," << format_double(t.f_values[i]) << ","
                    << format_double(t.i_arg[i]) << "," << format_double(t.i_values[i]) << ","
                    << format_double(t.w_arg[i]) << "," << format_double(t.w_values[i]) << "\n";
            write_text(l_out + "/curves/landscape.csv", csv.str());
            nlohmann::ordered_json j;
            j["theta"] = t.theta;
            j["nu"] = t.nu;
            j["p"] = t.p;
            j["d"] = t.d;
            j["phase"] = t.phase_label;
            j["f_min"] = t.minimizers.f_min;
            j["contains_zero"] = t.minimizers.contains_zero;
            j["minimizer_intervals"] = nlohmann::ordered_json::array();
            for (auto& iv : t.minimizers.intervals)
                j["minimizer_intervals"].push_back({iv.first, iv.second});
            write_text(l_out + "/report.json", j.dump(2) + "\n");
            write_text(l_out + "/timing.txt",
                       "wall_seconds = " + std::to_string(seconds_since(t0)) + "\n");
            std::cout << "phase = " << t.phase_label << "\n";
            return 0;
        }

        if (cmd_p->parsed()) {
            double lo, hi;
            int cnt;
            if (std::sscanf(p_range.c_str(), "%lf:%lf:%d", &lo, &hi, &cnt) != 3 || cnt < 2)
                throw std::runtime_error("--theta-range expects lo:hi:count");
            Landscape ls(p_p, p_d);
            ensure_dir(p_out);
            ensure_dir(p_out + "/curves");
            std::ostringstream csv;
            csv << "theta,nu_c,label_below,label_above\n";
            double prev = 1e300;
            bool monotone = true;
            for (int i = 0; i < cnt; ++i) {
                double th = lo + (hi - lo) * double(i) / double(cnt - 1);
                double nc = ls.critical_nu(th);
                monotone = monotone && nc < prev;
                prev = nc;
                auto below = ls.classify(th, 0.9 * nc);
                auto above = ls.classify(th, 1.1 * nc);
                csv << format_double(th) << "," << format_double(nc) << "," << below.label << ","
                    << above.label << "\n";
            }
            write_text(p_out + "/curves/phase_diagram.csv", csv.str());
            nlohmann::ordered_json j;
            j["p"] = p_p;
            j["d"] = p_d;
            j["r_p"] = ls.r_p();
            j["c_d"] = ls.c_d_value();
            j["strictly_decreasing"] = monotone;
            write_text(p_out + "/report.json", j.dump(2) + "\n");
            write_text(p_out + "/timing.txt",
                       "wall_seconds = " + std::to_string(seconds_since(t0)) + "\n");
            std::cout << "nu_c strictly decreasing: " << (monotone ? "yes" : "no") << "\n";
            return 0;
        }

        if (cmd_v->parsed()) {
            RunConfig cfg;
            if (!v_config.empty()) cfg = parse_config(read_text(v_config));
            cfg.out = v_out;
            std::vector<std::string> suites;
            if (v_suite == "all")
                suites = {"subcritical", "massless", "scaling", "tempering", "tails"};
            else
                suites = {v_suite};
            bool ok = true;
            std::unique_ptr<Landscape> ls;
            auto need_ls = [&]() -> Landscape* {
                if (!ls) ls = std::make_unique<Landscape>(cfg.p, cfg.d);
                return ls.get();
            };
            for (const std::string& suite : suites) {
                auto ts = clock_type::now();
                ExperimentReport rep;
                RunConfig c = cfg;
                if (suite == "subcritical") {
                    c.theta = std::min(cfg.theta, 0.6 * c_d(cfg.d));
                    rep = verify_subcritical_massive(c);
                } else if (suite == "massless") {
                    c.theta = std::max(cfg.theta, 2.0 * c_d(cfg.d));
                    rep = verify_massless_shift(c);
                } else if (suite == "scaling") {
                    rep = verify_scaling_relation(c);
                } else if (suite == "supercritical") {
                    rep = verify_supercritical(c, need_ls());
                } else if (suite == "double") {
                    rep = verify_double_transition(c, need_ls());
                } else if (suite == "tempering") {
                    rep = verify_tempering(c, need_ls());
                } else if (suite == "tails") {
                    rep = verify_tails(c);
                }
                write_report(v_out + "/" + suite, rep, seconds_since(ts));
                for (const CheckResult& ck : rep.checks)
                    std::cout << (ck.pass ? "[PASS] " : "[FAIL] ") << suite << ": " << ck.name
                              << " measured=" << format_double(ck.measured)
                              << " target=" << format_double(ck.target) << "\n";
                ok = ok && rep.all_pass;
            }
            return ok ? 0 : 2;
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        nlohmann::ordered_json err;
        err["error"] = e.what();
        std::cout << err.dump() << "\n";
        return 1;
    }
    return 0;
}
