// SPDX-License-Identifier: Apache-2.0

#include "cfrelay/gp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace cfrelay
{

double Monomial::eval(const arma::vec &x) const
{
    double v = coeff;
    for (const auto &[k, e] : exps)
        v *= std::pow(x(k), e);
    return v;
}

double eval(const Posynomial &p, const arma::vec &x)
{
    double v = 0.0;
    for (const auto &m : p)
        v += m.eval(x);
    return v;
}

std::size_t GpProblem::add_variable(std::string name)
{
    names.push_back(std::move(name));
    return names.size() - 1;
}

void GpProblem::add(Posynomial terms, std::string label)
{
    constraints.push_back({std::move(terms), std::move(label)});
}

void GpProblem::validate() const
{
    auto check = [this](const Monomial &m, const std::string &where) {
        if (!(m.coeff > 0.0) || !std::isfinite(m.coeff))
            throw std::invalid_argument("non-positive coefficient in " + where);
        for (const auto &[k, e] : m.exps)
        {
            if (k >= names.size())
                throw std::invalid_argument("variable index out of range in " + where);
            if (!std::isfinite(e))
                throw std::invalid_argument("non-finite exponent in " + where);
        }
    };
    check(objective, "objective");
    for (const auto &c : constraints)
    {
        if (c.terms.empty())
            throw std::invalid_argument("empty constraint '" + c.label + "'");
        for (const auto &m : c.terms)
            check(m, "constraint '" + c.label + "'");
    }
}

double GpProblem::max_constraint(const arma::vec &x) const
{
    double worst = 0.0;
    for (const auto &c : constraints)
        worst = std::max(worst, eval(c.terms, x));
    return worst;
}

std::string to_string(GpStatus s)
{
    switch (s)
    {
    case GpStatus::kOptimal:
        return "optimal";
    case GpStatus::kInfeasible:
        return "infeasible";
    case GpStatus::kUnbounded:
        return "unbounded";
    case GpStatus::kMaxIterations:
        return "max-iterations";
    }
    return "unknown";
}

namespace
{

// log-sum-exp constraint F(y) = log sum_j exp(a_j^T y + b_j) <= 0.
struct LseConstraint
{
    arma::mat a;
    arma::vec b;
};

// minimize c^T y subject to every F_k(y) <= 0.
struct LogProblem
{
    arma::vec c;
    std::vector<LseConstraint> cons;
};

constexpr double kUnboundedLog = 700.0;
constexpr double kPhaseOneBox = 60.0;

double lse(const LseConstraint &k, const arma::vec &y, arma::vec *weights = nullptr)
{
    arma::vec z = k.a * y + k.b;
    const double zmax = z.max();
    z = arma::exp(z - zmax);
    const double s = arma::accu(z);
    if (weights)
        *weights = z / s;
    return zmax + std::log(s);
}

bool strictly_feasible(const LogProblem &lp, const arma::vec &y)
{
    for (const auto &k : lp.cons)
        if (!(lse(k, y) < 0.0))
            return false;
    return true;
}

double barrier_value(const LogProblem &lp, const arma::vec &y, double t)
{
    double f = t * arma::dot(lp.c, y);
    for (const auto &k : lp.cons)
    {
        const double v = lse(k, y);
        if (!(v < 0.0))
            return std::numeric_limits<double>::infinity();
        f -= std::log(-v);
    }
    return f;
}

struct LogResult
{
    GpStatus status = GpStatus::kMaxIterations;
    arma::vec y;
    std::size_t steps = 0;
};

// Barrier method from a strictly feasible y0. `done` may end the run early
// after any centering step.
LogResult barrier_solve(const LogProblem &lp, arma::vec y, const GpOptions &opt,
                        const std::function<bool(const arma::vec &, double)> &done = {})
{
    const std::size_t n = y.n_elem;
    const double m = static_cast<double>(std::max<std::size_t>(lp.cons.size(), 1));
    LogResult res;
    double t = 1.0;
    for (std::size_t outer = 0; outer < opt.max_outer; ++outer)
    {
        for (std::size_t it = 0; it < opt.max_newton; ++it)
        {
            arma::vec g = t * lp.c;
            arma::mat h(n, n, arma::fill::zeros);
            for (const auto &k : lp.cons)
            {
                arma::vec w;
                const double f = lse(k, y, &w);
                const arma::vec df = k.a.t() * w;
                const arma::mat d2f = k.a.t() * arma::diagmat(w) * k.a - df * df.t();
                g += df / (-f);
                h += d2f / (-f) + df * df.t() / (f * f);
            }
            // Tiny diagonal shift for directions the constraints leave flat,
            // grown only if the factorization fails.
            arma::vec dy;
            const double scale = std::max(h.diag().max(), 1e-300);
            bool solved = false;
            for (double reg = 1e-15; reg < 1.0 && !solved; reg *= 1e3)
            {
                arma::mat hr = h;
                hr.diag() += reg * scale;
                arma::mat r;
                if (arma::chol(r, hr))
                {
                    dy = -arma::solve(arma::trimatu(r), arma::solve(arma::trimatl(r.t()), g));
                    solved = dy.is_finite();
                }
            }
            if (!solved)
                dy = -g / scale;
            const double decrement = -arma::dot(g, dy);
            ++res.steps;
            if (decrement / 2.0 <= 1e-10)
                break;

            const double f0 = barrier_value(lp, y, t);
            double s = 1.0;
            arma::vec next = y + dy;
            while (s > 1e-16)
            {
                next = y + s * dy;
                const double f1 = barrier_value(lp, next, t);
                if (std::isfinite(f1) && f1 <= f0 - 0.01 * s * decrement)
                    break;
                s *= 0.5;
            }
            if (s <= 1e-16)
                break;
            // Progress below rounding level: the center is as good as it gets.
            const bool stalled = f0 - barrier_value(lp, next, t) <= 1e-14 * std::max(1.0, std::fabs(f0));
            y = next;
            if (arma::abs(y).max() > kUnboundedLog)
            {
                res.status = GpStatus::kUnbounded;
                res.y = y;
                return res;
            }
            if (stalled)
                break;
        }
        if (done && done(y, m / t))
        {
            res.status = GpStatus::kOptimal;
            break;
        }
        if (m / t < opt.tol)
        {
            res.status = GpStatus::kOptimal;
            break;
        }
        t *= opt.barrier_growth;
    }
    res.y = y;
    return res;
}

LogProblem to_log(const GpProblem &gp)
{
    const std::size_t n = gp.num_variables();
    LogProblem lp;
    lp.c.zeros(n);
    for (const auto &[k, e] : gp.objective.exps)
        lp.c(k) += e;
    for (const auto &con : gp.constraints)
    {
        LseConstraint k;
        k.a.zeros(con.terms.size(), n);
        k.b.set_size(con.terms.size());
        for (std::size_t j = 0; j < con.terms.size(); ++j)
        {
            k.b(j) = std::log(con.terms[j].coeff);
            for (const auto &[v, e] : con.terms[j].exps)
                k.a(j, v) += e;
        }
        lp.cons.push_back(std::move(k));
    }
    return lp;
}

// Phase I: minimize s subject to F_k(y) <= s and s >= -1. It stops once s is
// negative and within a factor two of its optimum, which leaves y strictly
// feasible and reasonably centered. y is boxed around its start so the barrier
// stays bounded when the feasible set is not.
bool find_feasible(const LogProblem &lp, arma::vec &y, const GpOptions &opt, std::size_t &steps)
{
    const std::size_t n = y.n_elem;
    LogProblem p1;
    p1.c.zeros(n + 1);
    p1.c(n) = 1.0;
    double worst = -1.0;
    for (const auto &k : lp.cons)
    {
        LseConstraint a;
        a.a = arma::join_rows(k.a, -arma::ones(k.a.n_rows));
        a.b = k.b;
        p1.cons.push_back(std::move(a));
        worst = std::max(worst, lse(k, y));
    }
    LseConstraint floor;
    floor.a.zeros(1, n + 1);
    floor.a(0, n) = -1.0;
    floor.b = {-1.0};
    p1.cons.push_back(std::move(floor));
    for (std::size_t v = 0; v < n; ++v)
    {
        for (double sign : {-1.0, 1.0})
        {
            LseConstraint box;
            box.a.zeros(1, n + 1);
            box.a(0, v) = sign;
            box.b = {-sign * y(v) - kPhaseOneBox};
            p1.cons.push_back(std::move(box));
        }
    }

    arma::vec z(n + 1);
    z.head(n) = y;
    z(n) = std::max(worst + 1.0, 0.0);
    GpOptions o = opt;
    o.tol = std::max(opt.tol, 1e-9);
    const LogResult r = barrier_solve(p1, z, o, [n](const arma::vec &v, double gap) { return v(n) < 0.0 && gap < -0.5 * v(n); });
    steps += r.steps;
    y = r.y.head(n);
    return r.y(n) < -1e-9 && strictly_feasible(lp, y);
}

} // namespace

GpResult solve_gp(const GpProblem &gp, const arma::vec &start, const GpOptions &opt)
{
    gp.validate();
    const std::size_t n = gp.num_variables();
    if (!start.is_empty() && start.n_elem != n)
        throw std::invalid_argument("GP start point has the wrong dimension");
    if (!start.is_empty() && arma::any(start <= 0.0))
        throw std::invalid_argument("GP start point must be positive");

    const LogProblem lp = to_log(gp);
    arma::vec y = start.is_empty() ? arma::vec(n, arma::fill::zeros) : arma::vec(arma::log(start));

    GpResult out;
    if (!strictly_feasible(lp, y) && !find_feasible(lp, y, opt, out.newton_steps))
    {
        out.status = GpStatus::kInfeasible;
        out.x = arma::exp(y);
        out.objective = gp.objective.eval(out.x);
        out.max_constraint = gp.max_constraint(out.x);
        out.message = "no strictly feasible point found";
        return out;
    }

    const LogResult r = barrier_solve(lp, y, opt);
    out.status = r.status;
    out.newton_steps += r.steps;
    out.x = arma::exp(r.y);
    out.objective = gp.objective.eval(out.x);
    out.max_constraint = gp.max_constraint(out.x);
    if (r.status == GpStatus::kUnbounded)
        out.message = "objective unbounded below";
    else if (r.status == GpStatus::kMaxIterations)
        out.message = "barrier method did not reach the duality-gap target";
    return out;
}

} // namespace cfrelay
