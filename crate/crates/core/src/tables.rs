//! Dense index tables with 1-based accessors.

use crate::expr::Expr;

/// `rows x cols` table, e.g. `A^j_i` or `G_{ii'}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    rows: usize,
    cols: usize,
    data: Vec<Expr>,
}

impl Grid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Grid { rows, cols, data: vec![Expr::zero(); rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn at(&self, r: usize, c: usize) -> usize {
        assert!((1..=self.rows).contains(&r) && (1..=self.cols).contains(&c), "grid index ({r},{c}) out of range");
        (r - 1) * self.cols + (c - 1)
    }

    pub fn get(&self, r: usize, c: usize) -> &Expr {
        &self.data[self.at(r, c)]
    }

    pub fn set(&mut self, r: usize, c: usize, e: Expr) {
        let k = self.at(r, c);
        self.data[k] = e;
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Expr)> {
        self.data.iter().enumerate().map(move |(k, e)| (k / self.cols + 1, k % self.cols + 1, e))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Expr::is_zero)
    }

    /// Structural skew-symmetry (square grids only).
    pub fn is_skew(&self) -> bool {
        self.rows == self.cols
            && (1..=self.rows).all(|a| (1..=self.cols).all(|b| *self.get(a, b) == -self.get(b, a)))
    }
}

/// Table `T^{jj'}_{ii'}` indexed by two dependent and two independent indices.
#[derive(Clone, Debug, PartialEq)]
pub struct PairTable {
    m: usize,
    n: usize,
    data: Vec<Expr>,
}

impl PairTable {
    pub fn zeros(m: usize, n: usize) -> Self {
        PairTable { m, n, data: vec![Expr::zero(); m * m * n * n] }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn at(&self, j: usize, jp: usize, i: usize, ip: usize) -> usize {
        let (m, n) = (self.m, self.n);
        assert!(
            [j, jp].iter().all(|k| (1..=m).contains(k)) && [i, ip].iter().all(|k| (1..=n).contains(k)),
            "table index ({j},{jp};{i},{ip}) out of range"
        );
        (((j - 1) * m + (jp - 1)) * n + (i - 1)) * n + (ip - 1)
    }

    pub fn get(&self, j: usize, jp: usize, i: usize, ip: usize) -> &Expr {
        &self.data[self.at(j, jp, i, ip)]
    }

    pub fn set(&mut self, j: usize, jp: usize, i: usize, ip: usize, e: Expr) {
        let k = self.at(j, jp, i, ip);
        self.data[k] = e;
    }

    /// Sets all four entries related by `(j,i) <-> (j',i')` and `i <-> i'`.
    pub fn set_symmetric(&mut self, j: usize, jp: usize, i: usize, ip: usize, e: Expr) {
        self.set(j, jp, i, ip, e.clone());
        self.set(j, jp, ip, i, e.clone());
        self.set(jp, j, ip, i, e.clone());
        self.set(jp, j, i, ip, e);
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize, usize, usize), &Expr)> {
        let (m, n) = (self.m, self.n);
        self.data.iter().enumerate().map(move |(k, e)| {
            let ip = k % n + 1;
            let i = (k / n) % n + 1;
            let jp = (k / (n * n)) % m + 1;
            let j = k / (n * n * m) + 1;
            ((j, jp, i, ip), e)
        })
    }

    /// Structural check of `T^{jj'}_{ii'} = T^{jj'}_{i'i} = T^{j'j}_{i'i}`.
    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|((j, jp, i, ip), e)| e == self.get(j, jp, ip, i) && e == self.get(jp, j, ip, i))
    }
}
