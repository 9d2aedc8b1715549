//! Truncated multivariate Taylor jets.
//!
//! A [`Jet`] carries every partial derivative of a scalar up to a fixed total
//! order with respect to a set of variables. For tangent-bundle computations
//! the variables are the base coordinates followed by the fiber coordinates,
//! so a chart of dimension `d` uses `2d` slots: `0..d` for `x`, `d..2d` for `y`.
//!
//! Coefficients are stored as true partial derivatives (factorials folded
//! in), not as Taylor coefficients: `jet.derivative(&[1, 2])` on a two
//! variable jet is exactly `∂³f/∂v₀∂v₁²`. Multiplication uses the multivariate
//! Leibniz rule with precomputed binomial weights.
//!
//! Monomials are ordered by total degree, so a jet of order `k` is a prefix
//! of the coefficient vector of a jet of order `k + 1` over the same
//! [`JetSpace`]. Differentiation lowers the order by one; binary operations
//! on jets of different orders truncate to the lower order.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Default truncation order used by the curvature pipeline.
pub const DEFAULT_ORDER: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Product {
    a: u32,
    b: u32,
    out: u32,
    weight: f64,
}

/// Index tables shared by every jet over the same variables.
pub struct JetSpace {
    nvars: usize,
    max_order: usize,
    monomials: Vec<Box<[u8]>>,
    degree_start: Vec<usize>,
    lookup: HashMap<Box<[u8]>, usize>,
    products: Vec<Product>,
    product_end: Vec<usize>,
    // shifts[v][i] = index of monomial i + e_v, for monomials of degree < max_order
    shifts: Vec<Vec<u32>>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("nvars", &self.nvars)
            .field("max_order", &self.max_order)
            .field("monomials", &self.monomials.len())
            .finish()
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    acc
}

fn monomials_of_degree(nvars: usize, degree: usize, out: &mut Vec<Box<[u8]>>) {
    fn rec(prefix: &mut Vec<u8>, nvars: usize, left: usize, out: &mut Vec<Box<[u8]>>) {
        if prefix.len() == nvars - 1 {
            prefix.push(left as u8);
            out.push(prefix.clone().into_boxed_slice());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k as u8);
            rec(prefix, nvars, left - k, out);
            prefix.pop();
        }
    }
    rec(&mut Vec::with_capacity(nvars), nvars, degree, out);
}

fn sub_indices(gamma: &[u8]) -> Vec<Vec<u8>> {
    let mut all = vec![Vec::with_capacity(gamma.len())];
    for &g in gamma {
        let mut next = Vec::with_capacity(all.len() * (g as usize + 1));
        for prefix in &all {
            for a in 0..=g {
                let mut p = prefix.clone();
                p.push(a);
                next.push(p);
            }
        }
        all = next;
    }
    all
}

impl JetSpace {
    fn build(nvars: usize, max_order: usize) -> Self {
        assert!(nvars > 0, "a jet space needs at least one variable");
        assert!(max_order < 16, "jet order {max_order} is unreasonably large");
        let mut monomials = Vec::new();
        let mut degree_start = Vec::with_capacity(max_order + 2);
        for deg in 0..=max_order {
            degree_start.push(monomials.len());
            monomials_of_degree(nvars, deg, &mut monomials);
        }
        degree_start.push(monomials.len());

        let lookup: HashMap<Box<[u8]>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();

        let mut products = Vec::new();
        let mut product_end = Vec::with_capacity(max_order + 1);
        for deg in 0..=max_order {
            for out in degree_start[deg]..degree_start[deg + 1] {
                let gamma = &monomials[out];
                for alpha in sub_indices(gamma) {
                    let beta: Vec<u8> = gamma.iter().zip(&alpha).map(|(g, a)| g - a).collect();
                    let weight = gamma
                        .iter()
                        .zip(&alpha)
                        .map(|(&g, &a)| binomial(u32::from(g), u32::from(a)))
                        .product();
                    products.push(Product {
                        a: lookup[alpha.as_slice()] as u32,
                        b: lookup[beta.as_slice()] as u32,
                        out: out as u32,
                        weight,
                    });
                }
            }
            product_end.push(products.len());
        }

        let below = if max_order == 0 { 0 } else { degree_start[max_order] };
        let shifts = (0..nvars)
            .map(|v| {
                (0..below)
                    .map(|i| {
                        let mut m = monomials[i].to_vec();
                        m[v] += 1;
                        lookup[m.as_slice()] as u32
                    })
                    .collect()
            })
            .collect();

        JetSpace {
            nvars,
            max_order,
            monomials,
            degree_start,
            lookup,
            products,
            product_end,
            shifts,
        }
    }

    /// Process-wide cached space for `nvars` variables up to `max_order`.
    pub fn shared(nvars: usize, max_order: usize) -> Arc<JetSpace> {
        static SPACES: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let cache = SPACES.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|p| p.into_inner());
        guard
            .entry((nvars, max_order))
            .or_insert_with(|| Arc::new(JetSpace::build(nvars, max_order)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Number of stored coefficients for a jet of the given order.
    pub fn count(&self, order: usize) -> usize {
        self.degree_start[order + 1]
    }

    pub fn monomial(&self, index: usize) -> &[u8] {
        &self.monomials[index]
    }

    pub fn index_of(&self, multi_index: &[u8]) -> Option<usize> {
        self.lookup.get(multi_index).copied()
    }
}

/// A scalar together with all of its partial derivatives up to `order`.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("value", &self.value())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, order: usize, value: f64) -> Jet {
        assert!(order <= space.max_order, "order exceeds jet space");
        let mut coeffs = vec![0.0; space.count(order)];
        coeffs[0] = value;
        Jet { space: space.clone(), order, coeffs }
    }

    /// Identity jet in one slot: value `value`, unit first derivative in `slot`.
    pub fn variable(space: &Arc<JetSpace>, order: usize, slot: usize, value: f64) -> Result<Jet> {
        if slot >= space.nvars {
            return Err(Error::SlotOutOfRange { slot, nvars: space.nvars });
        }
        let mut jet = Jet::constant(space, order, value);
        if order >= 1 {
            let mut m = vec![0u8; space.nvars];
            m[slot] = 1;
            jet.coeffs[space.lookup[m.as_slice()]] = 1.0;
        }
        Ok(jet)
    }

    /// Lift coordinate `slot` of `point` (x-slots then y-slots) to its identity jet.
    pub fn lift(space: &Arc<JetSpace>, order: usize, point: &[f64], slot: usize) -> Result<Jet> {
        let value = *point.get(slot).ok_or(Error::SlotOutOfRange {
            slot,
            nvars: space.nvars,
        })?;
        Jet::variable(space, order, slot, value)
    }

    /// Build a jet from true partial derivatives in the space's monomial order.
    pub fn from_derivatives(space: &Arc<JetSpace>, order: usize, derivatives: Vec<f64>) -> Jet {
        assert_eq!(derivatives.len(), space.count(order), "coefficient count mismatch");
        Jet { space: space.clone(), order, coeffs: derivatives }
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn derivatives(&self) -> &[f64] {
        &self.coeffs
    }

    /// The partial derivative selected by `multi_index` (one count per variable).
    pub fn derivative(&self, multi_index: &[u8]) -> Result<f64> {
        if multi_index.len() != self.space.nvars {
            return Err(Error::SlotOutOfRange {
                slot: multi_index.len(),
                nvars: self.space.nvars,
            });
        }
        let degree: usize = multi_index.iter().map(|&k| k as usize).sum();
        if degree > self.order {
            return Err(Error::DegreeTooHigh { degree, order: self.order });
        }
        Ok(self.coeffs[self.space.lookup[multi_index]])
    }

    /// Partial derivative with respect to a list of slots (repetition allowed).
    pub fn partial(&self, slots: &[usize]) -> Result<f64> {
        let mut m = vec![0u8; self.space.nvars];
        for &s in slots {
            if s >= self.space.nvars {
                return Err(Error::SlotOutOfRange { slot: s, nvars: self.space.nvars });
            }
            m[s] += 1;
        }
        self.derivative(&m)
    }

    /// Differentiate along `slot`, giving a jet one order lower.
    ///
    /// Panics on an order-0 jet: the caller asked for a derivative the jet
    /// does not carry.
    pub fn d(&self, slot: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        assert!(slot < self.space.nvars, "slot {slot} out of range");
        let order = self.order - 1;
        let shift = &self.space.shifts[slot];
        let coeffs = (0..self.space.count(order))
            .map(|i| self.coeffs[shift[i] as usize])
            .collect();
        Jet { space: self.space.clone(), order, coeffs }
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order {
            return self.clone();
        }
        Jet {
            space: self.space.clone(),
            order,
            coeffs: self.coeffs[..self.space.count(order)].to_vec(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }

    /// True when every coefficient, including the value, is zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    fn scaled(&self, factor: f64) -> Jet {
        Jet {
            space: self.space.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space), "jets from different spaces");
        let order = self.order.min(other.order);
        let n = self.space.count(order);
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(&a, &b)| f(a, b))
            .collect();
        Jet { space: self.space.clone(), order, coeffs }
    }

    fn product(&self, other: &Jet) -> Jet {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space), "jets from different spaces");
        let order = self.order.min(other.order);
        if self.is_constant() {
            return other.truncate(order).scaled(self.value());
        }
        if other.is_constant() {
            return self.truncate(order).scaled(other.value());
        }
        let mut coeffs = vec![0.0; self.space.count(order)];
        let a = &self.coeffs;
        let b = &other.coeffs;
        for p in &self.space.products[..self.space.product_end[order]] {
            coeffs[p.out as usize] += p.weight * a[p.a as usize] * b[p.b as usize];
        }
        Jet { space: self.space.clone(), order, coeffs }
    }

    /// Compose with a univariate function given its derivatives at the base value.
    fn compose(&self, derivs: &[f64]) -> Jet {
        let k = self.order;
        debug_assert!(derivs.len() > k);
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut factorial = 1.0;
        let mut taylor = Vec::with_capacity(k + 1);
        for (m, d) in derivs.iter().take(k + 1).enumerate() {
            if m > 0 {
                factorial *= m as f64;
            }
            taylor.push(d / factorial);
        }
        let mut acc = Jet::constant(&self.space, k, taylor[k]);
        for m in (0..k).rev() {
            acc = acc.product(&delta);
            acc.coeffs[0] += taylor[m];
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet> {
        let u = self.value();
        if u == 0.0 || !u.is_finite() {
            return Err(Error::Domain { op: "recip", value: u });
        }
        let mut derivs = Vec::with_capacity(self.order + 1);
        let mut d = 1.0 / u;
        for m in 0..=self.order {
            derivs.push(d);
            d *= -((m + 1) as f64) / u;
        }
        Ok(self.compose(&derivs))
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet> {
        Ok(self * &other.recip()?)
    }

    /// Real power `u^p`; requires a positive base value when derivatives are carried.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        let u = self.value();
        if u < 0.0 || (u == 0.0 && self.order > 0) || !u.is_finite() {
            return Err(Error::Domain { op: "powf", value: u });
        }
        let mut derivs = Vec::with_capacity(self.order + 1);
        let mut c = 1.0;
        for m in 0..=self.order {
            derivs.push(c * u.powf(p - m as f64));
            c *= p - m as f64;
        }
        Ok(self.compose(&derivs))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let u = self.value();
        if u < 0.0 || (u == 0.0 && self.order > 0) || !u.is_finite() {
            return Err(Error::Domain { op: "sqrt", value: u });
        }
        if self.order == 0 {
            return Ok(Jet::constant(&self.space, 0, u.sqrt()));
        }
        self.powf(0.5)
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut acc = Jet::constant(&self.space, self.order, 1.0);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.product(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.product(&base);
            }
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order + 1])
    }

    pub fn ln(&self) -> Result<Jet> {
        let u = self.value();
        if u <= 0.0 {
            return Err(Error::Domain { op: "ln", value: u });
        }
        let mut derivs = vec![u.ln()];
        let mut d = 1.0 / u;
        for m in 1..=self.order {
            derivs.push(d);
            d *= -(m as f64) / u;
        }
        Ok(self.compose(&derivs))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let derivs: Vec<f64> = (0..=self.order).map(|m| cycle[m % 4]).collect();
        self.compose(&derivs)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let derivs: Vec<f64> = (0..=self.order).map(|m| cycle[m % 4]).collect();
        self.compose(&derivs)
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

binary_op!(Add, add, |a, b| a.zip_with(b, |x, y| x + y));
binary_op!(Sub, sub, |a, b| a.zip_with(b, |x, y| x - y));
binary_op!(Mul, mul, |a, b| a.product(b));

macro_rules! scalar_op {
    ($trait:ident, $method:ident, $jet_f:expr, $rev_f:expr) => {
        impl $trait<f64> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                let f: fn(&Jet, f64) -> Jet = $jet_f;
                f(self, rhs)
            }
        }
        impl $trait<f64> for Jet {
            type Output = Jet;
            fn $method(self, rhs: f64) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<&Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(f64, &Jet) -> Jet = $rev_f;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for f64 {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

scalar_op!(
    Add,
    add,
    |j, c| {
        let mut out = j.clone();
        out.coeffs[0] += c;
        out
    },
    |c, j| j + c
);
scalar_op!(
    Sub,
    sub,
    |j, c| {
        let mut out = j.clone();
        out.coeffs[0] -= c;
        out
    },
    |c, j| -j + c
);
scalar_op!(Mul, mul, |j, c| j.scaled(c), |c, j| j.scaled(c));

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scaled(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scaled(-1.0)
    }
}

/// Sum of an iterator of jets; `None` for an empty iterator.
pub fn sum(jets: impl IntoIterator<Item = Jet>) -> Option<Jet> {
    jets.into_iter().reduce(|a, b| a + b)
}
