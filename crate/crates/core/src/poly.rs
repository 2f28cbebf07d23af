//! Sparse multivariate real polynomials.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// A polynomial in `nvars` variables stored as exponent vector → coefficient.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn monomial(exponents: Vec<u32>, c: f64) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::dim("monomial exponent", nvars, e.len()));
            }
            if !c.is_finite() {
                return Err(Error::NonFinite("polynomial coefficient".into()));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &f64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Largest coefficient magnitude.
    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), c * s);
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.nvars, 1.0);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.nvars {
            return Err(Error::dim("polynomial argument", self.nvars, x.len()));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(x)
                    .fold(*c, |acc, (&k, &xi)| if k == 0 { acc } else { acc * xi.powi(k as i32) })
            })
            .sum()
    }

    /// Exact partial derivative in the variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut d = e.clone();
                d[i] -= 1;
                p.add_term(d, c * e[i] as f64);
            }
        }
        p
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.nvars).map(|i| self.derivative(i)).collect()
    }

    /// Substitutes `subs[i]` for the variable `x_i`.
    pub fn compose(&self, subs: &[Polynomial]) -> Result<Self> {
        if subs.len() != self.nvars {
            return Err(Error::dim("substitution", self.nvars, subs.len()));
        }
        let m = subs.first().map(|s| s.nvars).unwrap_or(0);
        if subs.iter().any(|s| s.nvars != m) {
            return Err(Error::input("substituted polynomials have different arities"));
        }
        let mut out = Self::zero(m);
        for (e, c) in &self.terms {
            let mut t = Self::constant(m, *c);
            for (s, &k) in subs.iter().zip(e) {
                if k > 0 {
                    t = &t * &s.pow(k);
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// The polynomial `x ↦ p(M x)` for a linear change of variables.
    pub fn pullback_linear(&self, m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != self.nvars {
            return Err(Error::dim("linear substitution rows", self.nvars, m.nrows()));
        }
        let subs: Vec<Polynomial> = (0..m.nrows())
            .map(|i| {
                let mut p = Self::zero(m.ncols());
                for j in 0..m.ncols() {
                    let mut e = vec![0; m.ncols()];
                    e[j] = 1;
                    p.add_term(e, m[(i, j)]);
                }
                p
            })
            .collect();
        self.compose(&subs)
    }

    /// Re-embeds into more variables, sending `x_i` to `x_{map[i]}`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Result<Self> {
        if map.len() != self.nvars || map.iter().any(|&j| j >= nvars) {
            return Err(Error::input("invalid variable embedding"));
        }
        let mut p = Self::zero(nvars);
        for (e, c) in &self.terms {
            let mut f = vec![0; nvars];
            for (i, &k) in e.iter().enumerate() {
                f[map[i]] += k;
            }
            p.add_term(f, *c);
        }
        Ok(p)
    }
}

fn binary(a: &Polynomial, b: &Polynomial, sign: f64) -> Polynomial {
    assert_eq!(a.nvars, b.nvars, "polynomial arity mismatch");
    let mut p = a.clone();
    for (e, c) in &b.terms {
        p.add_term(e.clone(), sign * c);
    }
    p
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        binary(self, rhs, 1.0)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        binary(self, rhs, -1.0)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "polynomial arity mismatch");
        let mut p = Polynomial::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                p.add_term(e, ca * cb);
            }
        }
        p
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (i, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, p)?,
                }
            }
        }
        Ok(())
    }
}

/// A polynomial map `R^n → R^m` with its exact Jacobian.
#[derive(Debug, Clone, Serialize)]
pub struct PolynomialMap {
    pub source_dim: usize,
    pub components: Vec<Polynomial>,
    #[serde(skip)]
    jacobian: Vec<Vec<Polynomial>>,
}

impl PolynomialMap {
    pub fn new(source_dim: usize, components: Vec<Polynomial>) -> Result<Self> {
        if let Some(p) = components.iter().find(|p| p.nvars() != source_dim) {
            return Err(Error::dim("polynomial map component", source_dim, p.nvars()));
        }
        let jacobian = components.iter().map(|p| p.gradient()).collect();
        Ok(PolynomialMap {
            source_dim,
            components,
            jacobian,
        })
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.source_dim {
            return Err(Error::dim("polynomial map argument", self.source_dim, x.len()));
        }
        Ok(DVector::from_iterator(
            self.components.len(),
            self.components.iter().map(|p| p.eval_unchecked(x.as_slice())),
        ))
    }

    pub fn jacobian(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        if x.len() != self.source_dim {
            return Err(Error::dim("polynomial map argument", self.source_dim, x.len()));
        }
        Ok(DMatrix::from_fn(self.components.len(), self.source_dim, |i, j| {
            self.jacobian[i][j].eval_unchecked(x.as_slice())
        }))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PolynomialMap) -> Result<PolynomialMap> {
        let comps = self
            .components
            .iter()
            .map(|p| p.compose(&inner.components))
            .collect::<Result<Vec<_>>>()?;
        PolynomialMap::new(inner.source_dim, comps)
    }
}

/// A complex polynomial as a pair of real polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPolynomial {
    pub re: Polynomial,
    pub im: Polynomial,
}

impl ComplexPolynomial {
    pub fn one(nvars: usize) -> Self {
        ComplexPolynomial {
            re: Polynomial::constant(nvars, 1.0),
            im: Polynomial::zero(nvars),
        }
    }

    /// `z_j = x_{2j} + i x_{2j+1}` in interleaved real coordinates.
    pub fn z(nvars: usize, j: usize) -> Self {
        ComplexPolynomial {
            re: Polynomial::var(nvars, 2 * j),
            im: Polynomial::var(nvars, 2 * j + 1),
        }
    }

    pub fn conj(&self) -> Self {
        ComplexPolynomial {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        ComplexPolynomial {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }
}
