use clap::ValueEnum;
use varinv_core::expr::{simplify, Expr};
use varinv_core::helmholtz::{conditions_m1, conditions_m2, conditions_n1, helmholtz_check, Verdict};
use varinv_core::reduction::reduce_order;
use varinv_core::solver::{solve, SolverCase, SolverOptions, DEFAULT_ANSATZ_DEGREE};
use varinv_core::tonti::{tonti_lagrangian, TontiResult, DEFAULT_QUAD_ORDER};
use varinv_core::variational::{decompose_second_order, el_split_first_order, euler_lagrange, InverseProblemData};
use varinv_core::{is_zero, Error, JetContext, ZeroStatus, ZeroTestConfig};

use crate::problem::{ProblemError, ProblemFile};
use crate::report::{Failure, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    El,
    Split,
    Helmholtz,
    Tonti,
    Solve,
    Reduce,
    Simplify,
    ZeroTest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::El => "el",
            Command::Split => "split",
            Command::Helmholtz => "helmholtz",
            Command::Tonti => "tonti",
            Command::Solve => "solve",
            Command::Reduce => "reduce",
            Command::Simplify => "simplify",
            Command::ZeroTest => "zero-test",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CaseFlag {
    M1,
    N1,
    M2,
    Auto,
}

/// Command-line settings; each overrides the problem-file header.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    pub case: Option<CaseFlag>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub quad_order: Option<usize>,
    pub ansatz_degree: Option<usize>,
}

struct Run<'a> {
    pf: &'a ProblemFile,
    ctx: JetContext,
    zero: ZeroTestConfig,
    settings: &'a Settings,
}

pub fn run(command: Command, pf: &ProblemFile, settings: &Settings) -> Report {
    let name = command.name();
    let result = pf.context().map_err(Failure::from).and_then(|ctx| {
        let mut zero = ZeroTestConfig::default();
        if let Some(seed) = settings.seed.or(pf.seed) {
            zero.seed = seed;
        }
        if let Some(samples) = settings.samples.or(pf.samples) {
            zero.samples = samples;
        }
        let r = Run { pf, ctx, zero, settings };
        let mut report = Report::new(name, "ok");
        match command {
            Command::El => r.el(&mut report),
            Command::Split => r.split(&mut report),
            Command::Helmholtz => r.helmholtz(&mut report),
            Command::Tonti => r.tonti(&mut report),
            Command::Solve => r.solve(&mut report),
            Command::Reduce => r.reduce(&mut report),
            Command::Simplify => r.simplify(&mut report),
            Command::ZeroTest => r.zero_test(&mut report),
        }
        .map(|()| report)
    });
    result.unwrap_or_else(|e| Report::error(name, &e))
}

fn push_data(report: &mut Report, prefix: &str, data: &InverseProblemData) {
    for (j, e) in data.f1.iter().enumerate() {
        report.expr(format!("{prefix}{}", j + 1), e);
    }
    for ((j, jp, i, ip), e) in data.f2.iter() {
        // One representative per symmetry orbit.
        if (j < jp || (j == jp && i <= ip)) && !e.is_zero() {
            report.expr(format!("{prefix}{j}{jp}[{i},{ip}]"), e);
        }
    }
}

impl Run<'_> {
    fn validate(&self, e: &Expr) -> Result<(), Failure> {
        Ok(self.ctx.validate(e)?)
    }

    /// Bound equations, else those of the data, else those of `f`.
    fn equations(&self) -> Result<Vec<Expr>, Failure> {
        if let Some(e) = self.pf.equations() {
            e.iter().try_for_each(|x| self.validate(x))?;
            return Ok(e);
        }
        if self.pf.has_data() {
            let d = self.pf.data();
            d.validate()?;
            return Ok(d.reconstruct());
        }
        let f = self.pf.lagrangian().map_err(|_| ProblemError::Missing("e<j>, F<j> or f"))?;
        self.validate(f)?;
        Ok(euler_lagrange(f, &self.ctx)?)
    }

    /// Bound data, else the decomposition of the equations.
    fn data(&self) -> Result<InverseProblemData, Failure> {
        if self.pf.has_data() {
            let d = self.pf.data();
            d.validate()?;
            return Ok(d);
        }
        Ok(decompose_second_order(&self.equations()?, &self.ctx, &self.zero)?)
    }

    fn el(&self, report: &mut Report) -> Result<(), Failure> {
        let f = self.pf.lagrangian()?;
        self.validate(f)?;
        for (j, e) in euler_lagrange(f, &self.ctx)?.iter().enumerate() {
            report.expr(format!("e{}", j + 1), e);
        }
        Ok(())
    }

    fn split(&self, report: &mut Report) -> Result<(), Failure> {
        if self.pf.equations.is_empty() && !self.pf.has_data() {
            let f = self.pf.lagrangian()?;
            self.validate(f)?;
            push_data(report, "E", &el_split_first_order(f, &self.ctx)?.as_data());
        } else {
            push_data(report, "F", &self.data()?);
        }
        Ok(())
    }

    fn helmholtz(&self, report: &mut Report) -> Result<(), Failure> {
        let e = self.equations()?;
        let h = helmholtz_check(&e, &self.ctx, &self.zero)?;
        report.verdict = h.verdict.to_string();
        for r in &h.residuals {
            report.conditions.push(crate::report::Condition::new(r.id(), &r.status));
        }
        let mut failed = h.verdict == Verdict::NotVariational;
        match decompose_second_order(&e, &self.ctx, &self.zero) {
            Ok(data) => {
                let (n, m) = (self.ctx.n(), self.ctx.m());
                let case = if m == 1 {
                    Some(conditions_m1(&data, &self.zero))
                } else if n == 1 {
                    let refs = self.pf.references();
                    let c: Vec<Expr> = (1..=m).map(|j| refs.c2.get(j, 1).clone()).collect();
                    Some(conditions_n1(&data, &c, &self.zero))
                } else if m == 2 {
                    Some(conditions_m2(&data, &self.zero))
                } else {
                    None
                };
                match case {
                    Some(Ok(c)) => {
                        failed |= c.has_failure();
                        report.conditions(&c);
                    }
                    Some(Err(err)) => report.diagnostics.push(format!("case conditions unavailable: {err}")),
                    None => report.diagnostics.push(format!("no case conditions for n = {n}, m = {m}")),
                }
            }
            Err(err) => report.diagnostics.push(format!("case conditions unavailable: {err}")),
        }
        if failed {
            report.exit = 2;
        }
        Ok(())
    }

    fn tonti(&self, report: &mut Report) -> Result<(), Failure> {
        let e = self.equations()?;
        let c = self.pf.references().c0;
        let order = self.settings.quad_order.unwrap_or(DEFAULT_QUAD_ORDER);
        match tonti_lagrangian(&e, &c, &self.ctx, order)? {
            TontiResult::ClosedForm(f) => {
                report.verdict = "closed-form".into();
                report.expr("f", f);
            }
            TontiResult::QuadratureForm { integrand, order } => {
                report.verdict = "quadrature".into();
                report.expr("integrand", integrand);
                report.diagnostics.push(format!("f = integral over t in [0, 1], Gauss-Legendre order {order}"));
            }
        }
        Ok(())
    }

    fn solve(&self, report: &mut Report) -> Result<(), Failure> {
        let data = self.data()?;
        let case = match self.settings.case {
            Some(CaseFlag::M1) => Some(SolverCase::M1),
            Some(CaseFlag::N1) => Some(SolverCase::N1),
            Some(CaseFlag::M2) => Some(SolverCase::M2),
            Some(CaseFlag::Auto) | None => None,
        };
        let opts = SolverOptions {
            zero: self.zero,
            ansatz_degree: self.settings.ansatz_degree.or(self.pf.ansatz_degree).unwrap_or(DEFAULT_ANSATZ_DEGREE),
        };
        let sol = solve(&data, &self.pf.references(), &self.ctx, case, &opts)?;
        if sol.diagnostics.contract.has_failure() {
            return Err(Error::VerificationFailed("residual contract".into()).into());
        }
        report.verdict = "solved".into();
        report.expr("f", &sol.f);
        report.expr("fbar", &sol.fbar);
        for (j, i, a) in sol.a1.iter() {
            report.expr(format!("A{j}[{i}]"), a);
        }
        report.expr("A", &sol.a0);
        if let Some(g) = &sol.g {
            for (i, ip, e) in g.gbar.iter().filter(|(i, ip, _)| i < ip) {
                report.expr(format!("Gbar[{i},{ip}]"), e);
                report.expr(format!("C[{i},{ip}]"), g.c.get(i, ip));
            }
        }
        report.conditions(&sol.diagnostics.conditions);
        report.conditions(&sol.diagnostics.contract);
        report.diagnostics.extend(sol.diagnostics.notes.iter().cloned());
        Ok(())
    }

    fn reduce(&self, report: &mut Report) -> Result<(), Failure> {
        let f = self.pf.lagrangian()?;
        let trace = reduce_order(f, &self.ctx)?;
        report.verdict = trace.stop.to_string();
        for (k, s) in trace.steps.iter().enumerate() {
            report.expr(format!("subtract[{}]", k + 1), &s.subtracted);
            report.expr(format!("step[{}]", k + 1), &s.result);
        }
        report.expr("reduced", &trace.reduced);
        Ok(())
    }

    fn simplify(&self, report: &mut Report) -> Result<(), Failure> {
        report.expr("expr", simplify(self.pf.free_expr()?));
        Ok(())
    }

    fn zero_test(&self, report: &mut Report) -> Result<(), Failure> {
        let e = self.pf.free_expr()?;
        let status = is_zero(e, &self.zero)?;
        report.verdict = status.label().to_string();
        report.expr("expr", e);
        if let ZeroStatus::NonZero(w) = &status {
            report.diagnostics.push(format!("witness: {w}"));
        }
        Ok(())
    }
}
