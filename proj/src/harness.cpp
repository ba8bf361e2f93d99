#include "itereig/harness.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace itereig {

namespace {

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

std::string count(std::size_t v)
{
    return std::to_string(v);
}

struct LoadedProblem {
    SparseMatrix A;
    std::optional<SparseMatrix> M;
    std::optional<EigenBasis> basis;   // basis of A (unshifted eigenvalues)
    std::optional<EigenBasis> shifted; // diagnostics view of B = A - sigma I
};

std::string problem_key(const RunConfig& c)
{
    if (c.gen) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "gen:%zu,%g,%g,%g,%g,%g,%g", c.gen->m, c.gen->ax,
                      c.gen->bx, c.gen->gx, c.gen->ay, c.gen->by, c.gen->gy);
        return std::string(buf) + "|" + c.mass_path + "|s=" + num(c.sigma.real()) + "," +
               num(c.sigma.imag());
    }
    return "file:" + c.matrix_path + "|" + c.mass_path + "|" + c.eig_path + "|s=" +
           num(c.sigma.real()) + "," + num(c.sigma.imag());
}

LoadedProblem load_problem(const RunConfig& c)
{
    if (c.gen && !c.matrix_path.empty())
        throw ConfigError("exactly one problem source allowed (generator or matrix file)");
    if (!c.gen && c.matrix_path.empty())
        throw ConfigError("no problem source given (use a generator spec or a matrix file)");

    LoadedProblem p;
    if (c.gen) {
        if (!c.eig_path.empty())
            throw ConfigError("eigenbasis files apply to ingested matrices only");
        ConvDiffProblem gp = gen_convdiff(c.gen->m, c.gen->ax, c.gen->bx, c.gen->gx, c.gen->ay,
                                          c.gen->by, c.gen->gy, c.sigma);
        p.A = std::move(gp.A);
        p.basis = std::move(gp.basis);
    } else {
        p.A = mm_read(c.matrix_path);
        if (p.A.nrows != p.A.ncols)
            throw ConfigError("matrix file is not square");
    }
    if (!c.mass_path.empty()) {
        p.M = mm_read(c.mass_path);
        if (p.M->nrows != p.A.nrows || p.M->ncols != p.A.ncols)
            throw ConfigError("mass matrix dimensions do not match");
    }
    if (!c.eig_path.empty()) {
        const SparseMatrix& A = p.A;
        p.basis = eigb_read(
            c.eig_path, [&A](const Vector& v) { return spmv(A, v); }, sparse_frobenius_norm(A),
            c.sigma);
    }
    // diagnostics run against the shifted operator; for a mass matrix the
    // analytic basis of A alone does not diagonalize the pencil, so weight
    // tracking needs a pencil basis supplied via the sidecar route instead.
    if (p.basis && !p.M)
        p.shifted = p.basis->shifted(c.sigma);
    return p;
}

PrecondRegime build_regime(const RunConfig& c, const SparseMatrix& B)
{
    PrecondRegime regime;
    const LinearOp apply_B = [&B](const Vector& v) { return spmv(B, v); };
    if (c.precond == "none") {
        // identity
    } else if (c.precond == "ilu") {
        regime.fixed = std::make_shared<IluPrecond>(ilu_factor(B, c.droptol));
    } else if (c.precond == "tuned-i" || c.precond == "tuned-a") {
        regime.fixed = std::make_shared<IluPrecond>(ilu_factor(B, c.droptol));
        regime.tuned = true;
        regime.variant = (c.precond == "tuned-i") ? TuneTarget::Identity : TuneTarget::ATarget;
    } else if (c.precond == "poly") {
        PolyScheme scheme;
        if (c.poly_scheme == "cheb")
            scheme = PolyScheme::Chebyshev;
        else if (c.poly_scheme == "contour")
            scheme = PolyScheme::Contour;
        else
            throw ConfigError("unknown polynomial scheme: " + c.poly_scheme);
        regime.fixed = std::make_shared<PolyPrecond>(
            apply_B, poly_setup(apply_B, B.nrows, c.degree, scheme));
    } else {
        throw ConfigError("unknown preconditioner: " + c.precond);
    }
    return regime;
}

std::string theta_or_d(const RunConfig& c)
{
    if (c.precond == "ilu" || c.precond == "tuned-i" || c.precond == "tuned-a")
        return num(c.droptol);
    if (c.precond == "poly")
        return count(c.degree);
    return "";
}

struct Emitter {
    std::vector<std::string> files;

    std::ofstream open(const std::string& path)
    {
        std::ofstream out(path);
        if (!out)
            throw ConfigError("cannot write output file: " + path);
        files.push_back(path);
        return out;
    }

    void discard()
    {
        for (const std::string& f : files)
            std::filesystem::remove(f);
        files.clear();
    }
};

void emit_outer(Emitter& em, const RunConfig& c, const OuterTrace& trace,
                const EigenBasis* shifted, bool block_run)
{
    const double znorm = shifted ? shifted->z_norm2() : 0.0;
    std::ofstream out = em.open(c.out_dir + "/outer.csv");
    if (block_run)
        out << "i,lambda_re,lambda_im,rho_norm,W1_norm,W2_norm,Zw_norm,Zwt_norm,Zwt_over_tau,"
               "inner_its\n";
    else
        out << "i,lambda_re,lambda_im,rho_norm,abs_w1,norm_w2,Zw_norm,Zwt_norm,Zwt_over_tau,"
               "inner_its\n";
    for (const OuterStep& s : trace.steps) {
        out << count(s.i) << ',' << num(s.lambda.real()) << ',' << num(s.lambda.imag()) << ','
            << num(s.rho_norm) << ',';
        if (block_run && s.block_w_split) {
            out << num(s.block_w_split->first) << ',' << num(s.block_w_split->second) << ",,,";
        } else if (!block_run && s.weights) {
            const WeightRecord& w = *s.weights;
            out << num(std::abs(w.w1)) << ',' << num(w.w2_norm) << ',';
            out << num(znorm * norm2(w.w)) << ',' << num(znorm * w.wt_norm) << ','
                << num(znorm * w.wt_norm / s.tau) << ',';
        } else {
            out << ",,,,,";
        }
        out << count(s.inner_iterations) << '\n';
    }
}

void emit_inner(Emitter& em, const RunConfig& c, const OuterTrace& trace,
                const EigenBasis* shifted, bool block_run)
{
    for (const OuterStep& s : trace.steps) {
        std::ofstream out = em.open(c.out_dir + "/inner_" + count(s.i) + ".csv");
        out << "k,residual,bound25,bound26a\n";
        const std::vector<double>& hist =
            block_run ? s.inner_block.residual_fro_norms : s.inner.residual_norms;
        for (std::size_t k = 0; k < hist.size(); ++k) {
            out << count(k) << ',' << num(hist[k]) << ',';
            if (!block_run && shifted && s.weights) {
                out << num(bound_25(*shifted, *s.weights, k)) << ',';
                if (k >= 1)
                    out << num(bound_26a(*shifted, *s.weights, k));
            } else {
                out << ',';
            }
            out << '\n';
        }
    }
}

void emit_summary_row(std::ostream& out, const RunConfig& c, const OuterTrace& trace,
                      bool block_run)
{
    out << c.precond << ',' << theta_or_d(c) << ',';
    if (!trace.steps.empty()) {
        const OuterStep& last = trace.steps.back();
        if (block_run && last.block_w_split)
            out << num(last.block_w_split->first) << ',' << num(last.block_w_split->second);
        else if (!block_run && last.weights)
            out << num(std::abs(last.weights->w1)) << ',' << num(last.weights->w2_norm);
        else
            out << ',';
    } else {
        out << ',';
    }
    out << ',' << count(trace.steps.size()) << ',' << count(trace.inner_total());
}

RunResult run_loaded(const RunConfig& config, const LoadedProblem& problem)
{
    const std::size_t n = problem.A.nrows;
    const SparseMatrix B =
        shifted_operator(problem.A, problem.M ? &*problem.M : nullptr, config.sigma);

    ProblemSpec spec;
    spec.A = &problem.A;
    spec.M = problem.M ? &*problem.M : nullptr;
    spec.sigma = config.sigma;
    spec.delta = config.delta;
    spec.max_outer = config.max_outer;
    spec.outer_tol = config.outer_tol;
    spec.max_inner = config.max_inner;
    spec.precond = build_regime(config, B);
    if (spec.M && spec.precond.tuned && spec.precond.variant != TuneTarget::Identity)
        spec.precond.variant = TuneTarget::MTarget;

    const bool block_run = config.block > 1;
    const EigenBasis* diag = problem.shifted ? &*problem.shifted : nullptr;

    RunResult result;
    if (block_run) {
        DenseMatrix Y0(n, config.block);
        for (std::size_t j = 0; j < config.block; ++j)
            for (std::size_t i = 0; i < n; ++i)
                Y0(i, j) = std::cos(static_cast<double>(i * (j + 1) + j + 1));
        result.trace = subspace_iteration(spec, config.block, Y0, diag);
    } else {
        spec.y0.assign(n, 1.0 / static_cast<double>(n));
        result.trace = inverse_iteration(spec, diag);
    }

    Emitter em;
    try {
        std::filesystem::create_directories(config.out_dir);
        if (config.emit.count("outer"))
            emit_outer(em, config, result.trace, diag, block_run);
        if (config.emit.count("inner"))
            emit_inner(em, config, result.trace, diag, block_run);
        if (config.emit.count("summary")) {
            std::ofstream out = em.open(config.out_dir + "/summary.csv");
            out << "precond,theta_or_d,final_abs_w1,final_norm_w2,outer_total,inner_total\n";
            emit_summary_row(out, config, result.trace, block_run);
            out << '\n';
        }
    } catch (...) {
        em.discard();
        throw;
    }
    result.files = std::move(em.files);
    return result;
}

}  // namespace

RunResult run(const RunConfig& config)
{
    return run_loaded(config, load_problem(config));
}

std::vector<RunResult> compare(std::vector<RunConfig> configs)
{
    if (configs.size() < 2)
        throw ConfigError("compare needs at least two configurations");
    for (const RunConfig& c : configs)
        if (problem_key(c) != problem_key(configs.front()))
            throw ConfigError("compare requires a shared problem source");

    LoadedProblem problem = load_problem(configs.front());
    const std::string base_dir = configs.front().out_dir;
    std::vector<RunResult> results;
    Emitter em;
    try {
        for (std::size_t i = 0; i < configs.size(); ++i) {
            RunConfig& c = configs[i];
            c.out_dir = base_dir + "/run_" + std::to_string(i) + "_" + c.precond;
            results.push_back(run_loaded(c, problem));
            for (const std::string& f : results.back().files)
                em.files.push_back(f);
        }
        std::ofstream out = em.open(base_dir + "/comparison.csv");
        out << "precond,theta_or_d,final_abs_w1,final_norm_w2,outer_total,inner_total,"
               "cumulative_inner\n";
        for (std::size_t i = 0; i < configs.size(); ++i) {
            emit_summary_row(out, configs[i], results[i].trace, configs[i].block > 1);
            out << ',' << count(results[i].trace.inner_total()) << '\n';
        }
    } catch (...) {
        em.discard();
        throw;
    }
    return results;
}

}  // namespace itereig
