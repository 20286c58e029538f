//! Line-oriented problem files: `key = expression`, `#` starts a comment.
//!
//! Header keys are `n`, `m`, `max_order`, `seed`, `samples`,
//! `ansatz_degree`. Bindings are `f` (a Lagrangian), `expr` (a free
//! expression), `e<j>` (equations), `F<j>` and `F<j><j'>[i,i']` (data, with
//! `F<j>,<j'>[i,i']` accepted for two-digit indices), `c<j>[i]` (first-order
//! reference) and `c<j>` (order-zero reference).

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;
use varinv_core::expr::{parse, Expr};
use varinv_core::jet::DEFAULT_MAX_ORDER;
use varinv_core::solver::ReferenceFunctions;
use varinv_core::tables::Grid;
use varinv_core::variational::InverseProblemData;
use varinv_core::JetContext;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: in `{key}`: {source}")]
    Expr {
        line: usize,
        key: String,
        source: varinv_core::Error,
    },
    #[error("`{key}`: index out of range for n = {n}, m = {m}")]
    OutOfRange { key: String, n: usize, m: usize },
    #[error("`{key}` conflicts with `{other}`: second-order data must be symmetric")]
    Asymmetric { key: String, other: String },
    #[error("missing binding: {0}")]
    Missing(&'static str),
}

type Pair4 = (usize, usize, usize, usize);

#[derive(Clone, Debug, Default)]
pub struct ProblemFile {
    pub n: usize,
    pub m: usize,
    pub max_order: Option<usize>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub ansatz_degree: Option<usize>,
    pub lagrangian: Option<Expr>,
    pub expr: Option<Expr>,
    pub equations: BTreeMap<usize, Expr>,
    pub f1: BTreeMap<usize, Expr>,
    pub f2: BTreeMap<Pair4, Expr>,
    pub c2: BTreeMap<(usize, usize), Expr>,
    pub c0: BTreeMap<usize, Expr>,
}

enum Key {
    Header(&'static str),
    Lagrangian,
    Free,
    Equation(usize),
    F1(usize),
    F2(Pair4),
    C2(usize, usize),
    C0(usize),
}

fn number<T: FromStr>(s: &str) -> Option<T> {
    (!s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())).then(|| s.parse().ok()).flatten()
}

/// `"[a,b,..]"` suffix split off `s`.
fn split_brackets(s: &str) -> Option<(&str, Option<Vec<usize>>)> {
    match s.find('[') {
        None => Some((s, None)),
        Some(k) => {
            let inner = s[k..].strip_prefix('[')?.strip_suffix(']')?;
            let idx = inner.split(',').map(|t| number(t.trim())).collect::<Option<Vec<usize>>>()?;
            Some((&s[..k], Some(idx)))
        }
    }
}

fn parse_key(key: &str) -> Option<Key> {
    const HEADERS: [&str; 6] = ["n", "m", "max_order", "seed", "samples", "ansatz_degree"];
    if let Some(h) = HEADERS.iter().find(|h| **h == key) {
        return Some(Key::Header(h));
    }
    match key {
        "f" => return Some(Key::Lagrangian),
        "expr" => return Some(Key::Free),
        _ => {}
    }
    let mut chars = key.chars();
    let head = chars.next()?;
    let (body, idx) = split_brackets(chars.as_str())?;
    match (head, idx.as_deref()) {
        ('e', None) => number(body).map(Key::Equation),
        ('F', None) => number(body).map(Key::F1),
        ('F', Some(&[i, ip])) => {
            let (j, jp) = match body.split_once(',') {
                Some((a, b)) => (number(a.trim())?, number(b.trim())?),
                None if body.len() == 2 => (number(&body[..1])?, number(&body[1..])?),
                None => return None,
            };
            Some(Key::F2((j, jp, i, ip)))
        }
        ('c', None) => number(body).map(Key::C0),
        ('c', Some(&[i])) => number(body).map(|j| Key::C2(j, i)),
        _ => None,
    }
}

fn orbit((j, jp, i, ip): Pair4) -> [Pair4; 4] {
    [(j, jp, i, ip), (j, jp, ip, i), (jp, j, ip, i), (jp, j, i, ip)]
}

fn f2_key((j, jp, i, ip): Pair4) -> String {
    format!("F{j}{jp}[{i},{ip}]")
}

impl ProblemFile {
    pub fn parse(src: &str) -> Result<ProblemFile, ProblemError> {
        let mut pf = ProblemFile { n: 1, m: 1, ..ProblemFile::default() };
        let mut seen = BTreeMap::new();
        for (k, raw) in src.lines().enumerate() {
            let line = k + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let syntax = |msg: String| ProblemError::Syntax { line, msg };
            let (key, value) = text.split_once('=').ok_or_else(|| syntax(format!("expected `key = value`, found `{text}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(prev) = seen.insert(key.to_string(), line) {
                return Err(syntax(format!("`{key}` already bound on line {prev}")));
            }
            let parsed = parse_key(key).ok_or_else(|| syntax(format!("unknown key `{key}`")))?;
            if let Key::Header(h) = parsed {
                let bad = || syntax(format!("`{h}` needs a non-negative integer, found `{value}`"));
                match h {
                    "n" => pf.n = number(value).ok_or_else(bad)?,
                    "m" => pf.m = number(value).ok_or_else(bad)?,
                    "max_order" => pf.max_order = Some(number(value).ok_or_else(bad)?),
                    "seed" => pf.seed = Some(number(value).ok_or_else(bad)?),
                    "samples" => pf.samples = Some(number(value).ok_or_else(bad)?),
                    _ => pf.ansatz_degree = Some(number(value).ok_or_else(bad)?),
                }
                continue;
            }
            let e = parse(value).map_err(|source| ProblemError::Expr { line, key: key.to_string(), source })?;
            match parsed {
                Key::Header(_) => unreachable!("handled above"),
                Key::Lagrangian => pf.lagrangian = Some(e),
                Key::Free => pf.expr = Some(e),
                Key::Equation(j) => {
                    pf.equations.insert(j, e);
                }
                Key::F1(j) => {
                    pf.f1.insert(j, e);
                }
                Key::F2(q) => {
                    pf.f2.insert(q, e);
                }
                Key::C2(j, i) => {
                    pf.c2.insert((j, i), e);
                }
                Key::C0(j) => {
                    pf.c0.insert(j, e);
                }
            }
        }
        pf.check_ranges()?;
        pf.check_symmetry()?;
        Ok(pf)
    }

    fn check_ranges(&self) -> Result<(), ProblemError> {
        let (n, m) = (self.n, self.m);
        let jr = |j: &usize| (1..=m).contains(j);
        let ir = |i: &usize| (1..=n).contains(i);
        let out = |key: String| Err(ProblemError::OutOfRange { key, n, m });
        for j in self.equations.keys().filter(|j| !jr(j)) {
            return out(format!("e{j}"));
        }
        for j in self.f1.keys().filter(|j| !jr(j)) {
            return out(format!("F{j}"));
        }
        for &q in self.f2.keys().filter(|(j, jp, i, ip)| !(jr(j) && jr(jp) && ir(i) && ir(ip))) {
            return out(f2_key(q));
        }
        for (j, i) in self.c2.keys().filter(|(j, i)| !(jr(j) && ir(i))) {
            return out(format!("c{j}[{i}]"));
        }
        for j in self.c0.keys().filter(|j| !jr(j)) {
            return out(format!("c{j}"));
        }
        Ok(())
    }

    fn check_symmetry(&self) -> Result<(), ProblemError> {
        for (&q, e) in &self.f2 {
            for other in orbit(q) {
                if self.f2.get(&other).is_some_and(|e2| e2 != e) {
                    return Err(ProblemError::Asymmetric { key: f2_key(q), other: f2_key(other) });
                }
            }
        }
        Ok(())
    }

    fn all_exprs(&self) -> impl Iterator<Item = &Expr> {
        self.lagrangian
            .iter()
            .chain(&self.expr)
            .chain(self.equations.values())
            .chain(self.f1.values())
            .chain(self.f2.values())
            .chain(self.c2.values())
            .chain(self.c0.values())
    }

    /// Unless given, the maximal order leaves room for Euler-Lagrange
    /// expressions of every bound expression.
    pub fn context(&self) -> Result<JetContext, varinv_core::Error> {
        let needed = self.all_exprs().filter_map(Expr::jet_order).max().unwrap_or(0);
        let max_order = self.max_order.unwrap_or(DEFAULT_MAX_ORDER.max(2 * needed + 2));
        JetContext::with_max_order(self.n, self.m, max_order)
    }

    pub fn has_data(&self) -> bool {
        !self.f1.is_empty() || !self.f2.is_empty()
    }

    pub fn data(&self) -> InverseProblemData {
        let mut d = InverseProblemData::zeros(self.n, self.m);
        for (&j, e) in &self.f1 {
            d.f1[j - 1] = e.clone();
        }
        for (&(j, jp, i, ip), e) in &self.f2 {
            d.f2.set_symmetric(j, jp, i, ip, e.clone());
        }
        d
    }

    /// `e^1..e^m`, unbound entries zero; `None` when no equation is bound.
    pub fn equations(&self) -> Option<Vec<Expr>> {
        (!self.equations.is_empty())
            .then(|| (1..=self.m).map(|j| self.equations.get(&j).cloned().unwrap_or_else(Expr::zero)).collect())
    }

    pub fn references(&self) -> ReferenceFunctions {
        let mut c2 = Grid::zeros(self.m, self.n);
        for (&(j, i), e) in &self.c2 {
            c2.set(j, i, e.clone());
        }
        let c0 = (1..=self.m).map(|j| self.c0.get(&j).cloned().unwrap_or_else(Expr::zero)).collect();
        ReferenceFunctions { c2, c0 }
    }

    pub fn lagrangian(&self) -> Result<&Expr, ProblemError> {
        self.lagrangian.as_ref().ok_or(ProblemError::Missing("f"))
    }

    pub fn free_expr(&self) -> Result<&Expr, ProblemError> {
        self.expr.as_ref().ok_or(ProblemError::Missing("expr"))
    }
}
