#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "confluence/harness.hpp"

using namespace confluence;
using namespace confluence::harness;

namespace {

struct Flags {
    std::string a = "0.3", b = "0.7";
    std::string eps, eps_grid, sector = "auto", format = "csv", out;
    double gamma = pi / 4.0;
    std::uint64_t seed = 1;
};

ScanConfig make_config(const Flags& f) {
    ScanConfig c;
    c.a = parse_poly(f.a);
    c.b = parse_poly(f.b);
    c.sectors = SectorConfig::with_opening(f.gamma);
    c.sector = parse_sector(f.sector);
    if (f.format == "csv") c.format = Format::csv;
    else if (f.format == "json") c.format = Format::json;
    else throw Error(ErrorCode::config_invalid, "format must be csv or json");
    if (!f.eps.empty()) c.eps_grid = parse_eps_item(f.eps);
    for (auto& e : parse_eps_grid(f.eps_grid)) c.eps_grid.push_back(e);
    return c;
}

// writes to --out when given, stdout otherwise
template <class F>
void emit(const Flags& f, F write) {
    if (f.out.empty()) return write(std::cout);
    std::ofstream os(f.out);
    if (!os) throw Error(ErrorCode::config_invalid, "cannot open " + f.out);
    write(os);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unfolded Stokes data of the confluent hypergeometric family"};
    app.require_subcommand(1);
    Flags f;
    auto common = [&](CLI::App* s) {
        s->add_option("--a", f.a, "a, or coefficients of a(eps) constant term first, comma separated");
        s->add_option("--b", f.b, "b, same format as --a");
        s->add_option("--eps", f.eps, "one eps as modulus@argument");
        s->add_option("--eps-grid", f.eps_grid, "comma list of modulus@argument or m0:m1:n@argument");
        s->add_option("--sector", f.sector, "+, - or auto");
        s->add_option("--gamma", f.gamma, "sector opening in (0, pi/2)");
        s->add_option("--format", f.format, "csv or json");
        s->add_option("--seed", f.seed, "seed of the sampled parameters");
        s->add_option("--out", f.out, "output file");
    };
    auto* stokes = app.add_subcommand("stokes", "unfolded multipliers over an eps grid");
    common(stokes);
    std::string suite;
    auto* verify = app.add_subcommand("verify", "run an identity suite and print a JSON report");
    verify->add_option("suite", suite, "monodromy, borel, riccati, symmetry or universal")->required();
    common(verify);
    std::string kind;
    auto* plot = app.add_subcommand("plotdata", "emit CSV data for plots");
    plot->add_option("kind", kind, "h_limit_scan, stokes_limit_scan or riccati_portrait")->required();
    common(plot);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        ScanConfig cfg = make_config(f);
        if (*stokes) {
            Table t = cmd_stokes(cfg);
            emit(f, [&](std::ostream& os) { write_table(os, t, cfg.format); });
            return 0;
        }
        if (*plot) {
            Table t = cmd_plotdata(kind, cfg);
            emit(f, [&](std::ostream& os) { write_table(os, t, Format::csv); });
            return 0;
        }
        VerifyOptions o;
        if (!cfg.a.is_constant() || !cfg.b.is_constant())
            throw Error(ErrorCode::config_invalid, "verify takes constant a and b");
        o.a = cfg.a.c[0];
        o.b = cfg.b.c[0];
        o.seed = f.seed;
        o.sectors = cfg.sectors;
        if (!cfg.eps_grid.empty()) o.eps = cfg.eps_grid.front();
        VerifyReport r = cmd_verify(suite, o);
        emit(f, [&](std::ostream& os) { os << r.to_json().dump(2) << '\n'; });
        return r.all_pass() ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
        return e.code() == ErrorCode::config_invalid || e.code() == ErrorCode::out_of_disk ? 1 : 2;
    }
}
