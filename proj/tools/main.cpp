#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "itereig/harness.hpp"

namespace {

using itereig::Complex;
using itereig::RunConfig;

std::vector<double> parse_numbers(const std::string& s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size())
            throw itereig::ConfigError("malformed number in list: " + tok);
        out.push_back(v);
    }
    return out;
}

itereig::GenSpec parse_gen(const std::string& s)
{
    const std::vector<double> v = parse_numbers(s);
    if (v.size() != 7)
        throw itereig::ConfigError("--gen expects m,ax,bx,gx,ay,by,gy");
    if (v[0] < 2 || v[0] != std::floor(v[0]))
        throw itereig::ConfigError("--gen grid size must be an integer >= 2");
    return {static_cast<std::size_t>(v[0]), v[1], v[2], v[3], v[4], v[5], v[6]};
}

Complex parse_sigma(const std::string& s)
{
    const std::vector<double> v = parse_numbers(s);
    if (v.empty() || v.size() > 2)
        throw itereig::ConfigError("--sigma expects RE or RE,IM");
    return Complex(v[0], v.size() == 2 ? v[1] : 0.0);
}

struct Opts {
    std::string gen;
    std::string matrix, mass, eig;
    std::string sigma = "0";
    double delta = 0.1;
    std::size_t max_outer = 30;
    double outer_tol = 1e-10;
    std::size_t max_inner = 0;
    std::vector<std::string> precond{"none"};
    double droptol = 1e-2;
    std::size_t degree = 10;
    std::string poly_scheme = "cheb";
    std::size_t block = 1;
    std::string emit = "summary,outer";
    std::string out_dir = ".";
};

void add_options(CLI::App& sub, Opts& o, bool multi_precond)
{
    sub.add_option("--gen", o.gen, "generated problem: m,ax,bx,gx,ay,by,gy");
    sub.add_option("--matrix", o.matrix, "Matrix Market file for A");
    sub.add_option("--mass", o.mass, "Matrix Market file for the mass matrix M");
    sub.add_option("--eig", o.eig, "EIGB1 eigenbasis sidecar file");
    sub.add_option("--sigma", o.sigma, "shift RE[,IM]");
    sub.add_option("--delta", o.delta, "inner tolerance factor");
    sub.add_option("--max-outer", o.max_outer, "outer iteration cap");
    sub.add_option("--outer-tol", o.outer_tol, "eigenvalue residual stopping tolerance");
    sub.add_option("--max-inner", o.max_inner, "inner iteration cap (0 = dimension)");
    auto* p = sub.add_option("--precond", o.precond,
                             "preconditioner: none|ilu|tuned-i|tuned-a|poly");
    if (!multi_precond)
        p->expected(1);
    sub.add_option("--droptol", o.droptol, "ILU drop tolerance");
    sub.add_option("--degree", o.degree, "polynomial degree");
    sub.add_option("--poly-scheme", o.poly_scheme, "polynomial scheme: cheb|contour");
    sub.add_option("--block", o.block, "block width (1 = single vector)");
    sub.add_option("--emit", o.emit, "comma list of summary,outer,inner");
    sub.add_option("--out", o.out_dir, "output directory");
    sub.set_config("--config", "", "key=value configuration file (flags override)");
}

RunConfig make_config(const Opts& o, const std::string& precond)
{
    RunConfig c;
    if (!o.gen.empty())
        c.gen = parse_gen(o.gen);
    c.matrix_path = o.matrix;
    c.mass_path = o.mass;
    c.eig_path = o.eig;
    c.sigma = parse_sigma(o.sigma);
    c.delta = o.delta;
    c.max_outer = o.max_outer;
    c.outer_tol = o.outer_tol;
    c.max_inner = o.max_inner;
    c.precond = precond;
    c.droptol = o.droptol;
    c.degree = o.degree;
    c.poly_scheme = o.poly_scheme;
    c.block = o.block;
    std::stringstream ss(o.emit);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty())
            c.emit.insert(tok);
    c.out_dir = o.out_dir;
    return c;
}

void print_spectrum(const Opts& o)
{
    if (o.gen.empty())
        throw itereig::ConfigError("spectrum requires --gen");
    const itereig::GenSpec g = parse_gen(o.gen);
    itereig::ConvDiffProblem p =
        itereig::gen_convdiff(g.m, g.ax, g.bx, g.gx, g.ay, g.by, g.gy, parse_sigma(o.sigma));
    std::vector<Complex> ev = p.basis.eigenvalues();
    std::sort(ev.begin(), ev.end(), [](const Complex& a, const Complex& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    for (const Complex& l : ev)
        std::printf("%.17g %.17g\n", l.real(), l.imag());
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Shift-invert eigensolver with inexact preconditioned GMRES inner solves"};
    app.require_subcommand(1);

    Opts run_opts, cmp_opts, spec_opts;
    CLI::App* run_cmd = app.add_subcommand("run", "execute one configuration");
    add_options(*run_cmd, run_opts, false);
    CLI::App* cmp_cmd =
        app.add_subcommand("compare", "run several preconditioner regimes on one problem");
    add_options(*cmp_cmd, cmp_opts, true);
    CLI::App* spec_cmd =
        app.add_subcommand("spectrum", "print the analytic spectrum of a generated problem");
    spec_cmd->add_option("--gen", spec_opts.gen, "generated problem: m,ax,bx,gx,ay,by,gy");
    spec_cmd->add_option("--sigma", spec_opts.sigma, "shift RE[,IM]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (spec_cmd->parsed()) {
            print_spectrum(spec_opts);
            return 0;
        }
        if (run_cmd->parsed()) {
            if (run_opts.precond.size() != 1)
                throw itereig::ConfigError("run takes exactly one --precond");
            itereig::RunResult r = itereig::run(make_config(run_opts, run_opts.precond.front()));
            if (!r.trace.converged) {
                std::fprintf(stderr, "did not converge within %zu outer iterations "
                                     "(final residual %.3e)\n",
                             r.trace.steps.size(), r.trace.final_rho_norm);
                return 3;
            }
            return 0;
        }
        if (cmp_opts.precond.size() < 2)
            throw itereig::ConfigError("compare needs at least two --precond values");
        std::vector<RunConfig> configs;
        for (const std::string& p : cmp_opts.precond)
            configs.push_back(make_config(cmp_opts, p));
        std::vector<itereig::RunResult> results = compare(std::move(configs));
        for (const itereig::RunResult& r : results)
            if (!r.trace.converged) {
                std::fprintf(stderr, "a compared run did not converge\n");
                return 3;
            }
        return 0;
    } catch (const itereig::NumericalError& e) {
        std::fprintf(stderr, "numerical breakdown: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
