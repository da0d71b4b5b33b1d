#include "bnls/io.hpp"

#include <nlohmann/json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bnls {

namespace {

std::string fmt_full(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void save_field(const Field& u, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw io_error("save_field: cannot open " + path.string());
    const Grid& g = *u.grid;
    os << "# bnls-field v" << kFieldSchemaVersion << " flavor=" << g.flavor()
       << " dim=" << g.dim() << " n=" << g.size() << " extent=" << fmt_full(g.extent())
       << "\n";
    if (g.flavor() == "radial") {
        const auto& rg = static_cast<const RadialGrid&>(g);
        os << "r,re,im\n";
        for (std::size_t i = 0; i < u.size(); ++i)
            os << fmt_full(rg.nodes()[i]) << ',' << fmt_full(u.values[i].real()) << ','
               << fmt_full(u.values[i].imag()) << '\n';
    } else {
        const auto& pg = static_cast<const PeriodicGrid&>(g);
        const std::size_t n = pg.n_per_dim();
        if (pg.dim() == 1) {
            os << "x,re,im\n";
            for (std::size_t j = 0; j < u.size(); ++j)
                os << fmt_full(pg.coord(j)) << ',' << fmt_full(u.values[j].real())
                   << ',' << fmt_full(u.values[j].imag()) << '\n';
        } else {
            os << "x,y,re,im\n";
            for (std::size_t jx = 0; jx < n; ++jx)
                for (std::size_t jy = 0; jy < n; ++jy) {
                    const cplx z = u.values[jx * n + jy];
                    os << fmt_full(pg.coord(jx)) << ',' << fmt_full(pg.coord(jy))
                       << ',' << fmt_full(z.real()) << ',' << fmt_full(z.imag())
                       << '\n';
                }
        }
    }
    if (!os) throw io_error("save_field: write failed for " + path.string());
}

Field load_field(const std::filesystem::path& path,
                 std::shared_ptr<const Grid> grid) {
    std::ifstream is(path);
    if (!is) throw io_error("load_field: cannot open " + path.string());
    std::string header;
    std::getline(is, header);
    int version = -1, dim = 0;
    char flavor[32] = {0};
    std::uint64_t n = 0;
    double extent = 0.0;
    if (std::sscanf(header.c_str(),
                    "# bnls-field v%d flavor=%31s dim=%d n=%" SCNu64 " extent=%lf",
                    &version, flavor, &dim, &n, &extent) != 5)
        throw io_error("load_field: unrecognized header in " + path.string());
    if (version != kFieldSchemaVersion)
        throw io_error("load_field: schema v" + std::to_string(version) +
                       " not supported (expected v" +
                       std::to_string(kFieldSchemaVersion) +
                       "); re-export the field with this tool version");
    const std::string fl(flavor);
    if (fl != grid->flavor() || dim != grid->dim() || n != grid->size() ||
        std::abs(extent - grid->extent()) > 1e-12 * grid->extent()) {
        std::ostringstream msg;
        msg << "load_field: grid mismatch; file has flavor=" << fl << " dim=" << dim
            << " n=" << n << " extent=" << extent << ", run expects flavor="
            << grid->flavor() << " dim=" << grid->dim() << " n=" << grid->size()
            << " extent=" << grid->extent();
        throw io_error(msg.str());
    }
    std::string colnames;
    std::getline(is, colnames);
    Field u(grid);
    const int coords = (fl == "periodic" && dim == 2) ? 2 : 1;
    for (std::size_t i = 0; i < u.size(); ++i) {
        std::string line;
        if (!std::getline(is, line))
            throw io_error("load_field: truncated file " + path.string());
        std::istringstream ls(line);
        double tmp, re, im;
        char comma;
        for (int c = 0; c < coords; ++c) ls >> tmp >> comma;
        ls >> re >> comma >> im;
        if (!ls) throw io_error("load_field: malformed row in " + path.string());
        u.values[i] = cplx{re, im};
    }
    return u;
}

void save_trajectory(const TrajectoryRecord& rec,
                     const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw io_error("save_trajectory: cannot open " + path.string());
    os << "t,mass,energy,q_p,bilap\n";
    for (std::size_t i = 0; i < rec.times.size(); ++i)
        os << fmt_full(rec.times[i]) << ',' << fmt_full(rec.mass_series[i]) << ','
           << fmt_full(rec.energy_series[i]) << ',' << fmt_full(rec.q_series[i])
           << ',' << fmt_full(rec.bilap_series[i]) << '\n';
}

nlohmann::json grid_metadata(const Grid& g) {
    return {{"flavor", g.flavor()},
            {"dim", g.dim()},
            {"n", g.size()},
            {"extent", g.extent()}};
}

nlohmann::json to_json(const ProblemParams& prm) {
    return {{"N", prm.N},      {"p", prm.p},         {"mu", prm.mu},
            {"a", prm.a},      {"gamma_p", prm.gamma_p},
            {"p_bar", prm.p_bar},
            {"p_star", std::isfinite(prm.p_star) ? nlohmann::json(prm.p_star)
                                                 : nlohmann::json("inf")}};
}

nlohmann::json to_json(const FiberingDiagnostics& d) {
    nlohmann::json j{{"A", d.A},       {"G", d.G},
                     {"P", d.P},       {"s_tilde", d.s_tilde},
                     {"f_tilde_max", d.f_tilde_max}};
    j["s_plus"] = d.s_plus ? nlohmann::json(*d.s_plus) : nlohmann::json();
    j["s_minus"] = d.s_minus ? nlohmann::json(*d.s_minus) : nlohmann::json();
    j["phi_dd_plus"] =
        d.phi_dd_plus ? nlohmann::json(*d.phi_dd_plus) : nlohmann::json();
    j["phi_dd_minus"] =
        d.phi_dd_minus ? nlohmann::json(*d.phi_dd_minus) : nlohmann::json();
    return j;
}

nlohmann::json to_json(const ConstantsReport& rep) {
    nlohmann::json j{{"N", rep.N},
                     {"p", rep.p},
                     {"mu", rep.mu},
                     {"a", rep.a},
                     {"C_Np", rep.C_Np},
                     {"C_source", rep.C_source},
                     {"a0", rep.a0},
                     {"rho_a", rep.rho_a},
                     {"rho_0", rep.rho_0},
                     {"C0", rep.C0},
                     {"h_max", rep.h_max},
                     {"condition_holds", rep.condition_holds},
                     {"b", rep.b},
                     {"c", rep.c}};
    j["S"] = rep.S ? nlohmann::json(*rep.S) : nlohmann::json();
    if (rep.landmarks) {
        j["g_landmarks"] = {{"s1", rep.landmarks->s1},   {"s2", rep.landmarks->s2},
                            {"R0", rep.landmarks->R0},   {"R1", rep.landmarks->R1},
                            {"s_bar", rep.landmarks->s_bar},
                            {"g_s1", rep.landmarks->g_s1},
                            {"g_s2", rep.landmarks->g_s2}};
    } else {
        j["g_landmarks"] = nlohmann::json();
    }
    return j;
}

nlohmann::json to_json(const SolverConfig& cfg) {
    return {{"step", cfg.step},
            {"max_iters", cfg.max_iters},
            {"tol_grad", cfg.tol_grad},
            {"seed", cfg.seed},
            {"backtrack_factor", cfg.backtrack_factor},
            {"backtrack_max", cfg.backtrack_max},
            {"r_max_check", cfg.r_max_check}};
}

nlohmann::json to_json(const SolveReport& rep) {
    nlohmann::json j{{"kind", rep.kind},
                     {"level", rep.level},
                     {"lambda", rep.lambda},
                     {"lambda_rayleigh", rep.lambda_rayleigh},
                     {"multiplier_mismatch", rep.multiplier_mismatch},
                     {"residual", rep.residual},
                     {"residual_rel", rep.residual_rel},
                     {"A", rep.A},
                     {"G", rep.G},
                     {"P", rep.P},
                     {"mass", rep.mass},
                     {"manifold", {{"q_value", rep.q_value}, {"phi_dd_1", rep.phi_dd_1}}},
                     {"iterations", rep.iterations},
                     {"converged", rep.converged}};
    if (rep.state.grid) j["grid"] = grid_metadata(*rep.state.grid);
    j["level_doubled_domain"] = rep.level_doubled_domain
                                    ? nlohmann::json(*rep.level_doubled_domain)
                                    : nlohmann::json();
    if (rep.constants) j["constants"] = to_json(*rep.constants);
    return j;
}

nlohmann::json to_json(const IntegratorConfig& icfg) {
    return {{"dt", icfg.dt},
            {"T", icfg.T},
            {"monitor_every", icfg.monitor_every},
            {"blowup_threshold", icfg.blowup_threshold},
            {"snapshot_times", icfg.snapshot_times}};
}

nlohmann::json to_json(const TrajectoryRecord& rec) {
    nlohmann::json j{{"samples", rec.times.size()},
                     {"blowup_indicated", rec.blowup_indicated},
                     {"aborted", rec.aborted}};
    j["q_sign_flip_time"] = rec.q_sign_flip_time
                                ? nlohmann::json(*rec.q_sign_flip_time)
                                : nlohmann::json();
    j["abort_time"] = rec.abort_time ? nlohmann::json(*rec.abort_time)
                                     : nlohmann::json();
    if (!rec.times.empty()) {
        j["t_final"] = rec.times.back();
        j["mass_drift"] =
            std::abs(rec.mass_series.back() - rec.mass_series.front()) /
            rec.mass_series.front();
        j["energy_drift"] =
            std::abs(rec.energy_series.back() - rec.energy_series.front());
    }
    return j;
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw io_error("write_json: cannot open " + path.string());
    os << j.dump(2) << '\n';
}

}  // namespace bnls
