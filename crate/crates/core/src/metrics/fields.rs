//! Coefficient fields on a chart: scalars, one-forms, quadratic forms and
//! vector fields. Everything evaluates on jets so derivatives in `x` come for
//! free.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::Jet;

/// One monomial `coeff · Π x_i^{powers[i]}`; missing powers are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    #[serde(default)]
    pub powers: Vec<u32>,
}

/// Polynomial scalar field in the chart coordinates.
///
/// In JSON either a bare number or `{"terms": [{"coeff": c, "powers": [..]}, ..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarField {
    Constant(f64),
    Polynomial { terms: Vec<Term> },
}

impl ScalarField {
    pub fn constant(c: f64) -> Self {
        ScalarField::Constant(c)
    }

    pub fn zero() -> Self {
        ScalarField::Constant(0.0)
    }

    /// The coordinate function `x^i`.
    pub fn coordinate(i: usize) -> Self {
        let mut powers = vec![0; i + 1];
        powers[i] = 1;
        ScalarField::Polynomial { terms: vec![Term { coeff: 1.0, powers }] }
    }

    pub fn monomial(coeff: f64, powers: &[u32]) -> Self {
        ScalarField::Polynomial {
            terms: vec![Term { coeff, powers: powers.to_vec() }],
        }
    }

    pub fn polynomial(terms: &[(f64, &[u32])]) -> Self {
        ScalarField::Polynomial {
            terms: terms
                .iter()
                .map(|(c, p)| Term { coeff: *c, powers: p.to_vec() })
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ScalarField::Constant(c) => *c == 0.0,
            ScalarField::Polynomial { terms } => terms.iter().all(|t| t.coeff == 0.0),
        }
    }

    /// Highest coordinate index the field depends on, plus one.
    pub fn arity(&self) -> usize {
        match self {
            ScalarField::Constant(_) => 0,
            ScalarField::Polynomial { terms } => terms
                .iter()
                .map(|t| t.powers.iter().rposition(|&p| p > 0).map_or(0, |i| i + 1))
                .max()
                .unwrap_or(0),
        }
    }

    pub fn eval(&self, x: &[Jet]) -> Jet {
        let space = x[0].space();
        let order = x.iter().map(Jet::order).min().unwrap_or(0);
        match self {
            ScalarField::Constant(c) => Jet::constant(space, order, *c),
            ScalarField::Polynomial { terms } => {
                let mut acc = Jet::constant(space, order, 0.0);
                for t in terms {
                    let mut m = Jet::constant(space, order, t.coeff);
                    for (i, &p) in t.powers.iter().enumerate() {
                        if p > 0 {
                            m = m * x[i].powi(p);
                        }
                    }
                    acc = acc + m;
                }
                acc
            }
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        match self {
            ScalarField::Constant(c) => *c,
            ScalarField::Polynomial { terms } => terms
                .iter()
                .map(|t| {
                    t.powers
                        .iter()
                        .enumerate()
                        .fold(t.coeff, |acc, (i, &p)| acc * x[i].powi(p as i32))
                })
                .sum(),
        }
    }
}

impl From<f64> for ScalarField {
    fn from(c: f64) -> Self {
        ScalarField::Constant(c)
    }
}

/// A one-form `ω = ω_i(x) dx^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OneForm(pub Vec<ScalarField>);

impl OneForm {
    pub fn zero(dim: usize) -> Self {
        OneForm(vec![ScalarField::zero(); dim])
    }

    pub fn constant(components: &[f64]) -> Self {
        OneForm(components.iter().map(|&c| ScalarField::constant(c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(ScalarField::is_zero)
    }

    pub fn components(&self, x: &[Jet]) -> Vec<Jet> {
        self.0.iter().map(|c| c.eval(x)).collect()
    }

    /// `ω_x(y)`.
    pub fn apply(&self, x: &[Jet], y: &[Jet]) -> Jet {
        let mut acc = Jet::constant(x[0].space(), y[0].order(), 0.0);
        for (c, yi) in self.0.iter().zip(y) {
            if !c.is_zero() {
                acc = acc + c.eval(x) * yi;
            }
        }
        acc
    }

    pub fn apply_f64(&self, x: &[f64], y: &[f64]) -> f64 {
        self.0.iter().zip(y).map(|(c, yi)| c.eval_f64(x) * yi).sum()
    }
}

/// Symmetric bilinear form field `h_x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixField {
    /// `diag(-1, 1, .., 1)`.
    Minkowski { dim: usize },
    Euclidean { dim: usize },
    /// Schwarzschild in coordinates `(t, r, θ, φ)`, geometric units.
    Schwarzschild { mass: f64 },
    /// Round 2-sphere of radius ρ in coordinates `(θ, φ)`.
    RoundSphere { radius: f64 },
    /// `S²(ρ) × ℝ` in coordinates `(θ, φ, z)`.
    SphereTimesLine { radius: f64 },
    /// Arbitrary polynomial entries (symmetrized on evaluation).
    Explicit { matrix: Vec<Vec<ScalarField>> },
}

impl MatrixField {
    pub fn dim(&self) -> usize {
        match self {
            MatrixField::Minkowski { dim } | MatrixField::Euclidean { dim } => *dim,
            MatrixField::Schwarzschild { .. } => 4,
            MatrixField::RoundSphere { .. } => 2,
            MatrixField::SphereTimesLine { .. } => 3,
            MatrixField::Explicit { matrix } => matrix.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MatrixField::Schwarzschild { mass } if !(*mass > 0.0) => {
                Err(Error::InvalidSpec(format!("Schwarzschild mass must be positive, got {mass}")))
            }
            MatrixField::RoundSphere { radius } | MatrixField::SphereTimesLine { radius }
                if !(*radius > 0.0) =>
            {
                Err(Error::InvalidSpec(format!("sphere radius must be positive, got {radius}")))
            }
            MatrixField::Explicit { matrix } => {
                let n = matrix.len();
                if matrix.iter().any(|row| row.len() != n) {
                    return Err(Error::InvalidSpec("explicit matrix field must be square".into()));
                }
                for i in 0..n {
                    for j in 0..i {
                        if matrix[i][j] != matrix[j][i] {
                            return Err(Error::InvalidSpec(format!(
                                "explicit matrix field is not symmetric at ({i},{j})"
                            )));
                        }
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn check_chart(&self, x: &[f64]) -> Result<()> {
        match self {
            MatrixField::Schwarzschild { mass } => schwarzschild_chart(*mass, x),
            MatrixField::RoundSphere { .. } | MatrixField::SphereTimesLine { .. } => {
                let th = x[0];
                if th > 0.0 && th < std::f64::consts::PI {
                    Ok(())
                } else {
                    Err(Error::Chart(format!("polar angle θ = {th} outside (0, π)")))
                }
            }
            _ => Ok(()),
        }
    }

    /// Entries `h_ij(x)` as a row-major `d×d` list of jets.
    pub fn entries(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let xv: Vec<f64> = x.iter().map(Jet::value).collect();
        self.check_chart(&xv)?;
        let d = self.dim();
        let space = x[0].space();
        let order = x.iter().map(Jet::order).min().unwrap_or(0);
        let zero = || Jet::constant(space, order, 0.0);
        let mut m: Vec<Jet> = (0..d * d).map(|_| zero()).collect();
        match self {
            MatrixField::Minkowski { dim } => {
                for i in 0..*dim {
                    m[i * d + i] = Jet::constant(space, order, if i == 0 { -1.0 } else { 1.0 });
                }
            }
            MatrixField::Euclidean { dim } => {
                for i in 0..*dim {
                    m[i * d + i] = Jet::constant(space, order, 1.0);
                }
            }
            MatrixField::Schwarzschild { mass } => {
                let f = 1.0 - 2.0 * *mass * x[1].recip()?;
                let r2 = &x[1] * &x[1];
                let s = x[2].sin();
                m[0] = -&f;
                m[5] = f.recip()?;
                m[10] = r2.clone();
                m[15] = r2 * &s * &s;
            }
            MatrixField::RoundSphere { radius } => {
                let s = x[0].sin();
                m[0] = Jet::constant(space, order, radius * radius);
                m[3] = (&s * &s) * (radius * radius);
            }
            MatrixField::SphereTimesLine { radius } => {
                let s = x[0].sin();
                m[0] = Jet::constant(space, order, radius * radius);
                m[4] = (&s * &s) * (radius * radius);
                m[8] = Jet::constant(space, order, 1.0);
            }
            MatrixField::Explicit { matrix } => {
                for i in 0..d {
                    for j in 0..d {
                        m[i * d + j] = matrix[i][j].eval(x);
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn matrix_f64(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let d = self.dim();
        let space = crate::jets::JetSpace::shared(d, 0);
        let xj: Vec<Jet> = x.iter().map(|&v| Jet::constant(&space, 0, v)).collect();
        let e = self.entries(&xj)?;
        Ok((0..d).map(|i| (0..d).map(|j| e[i * d + j].value()).collect()).collect())
    }

    /// `h_x(y, y)`.
    pub fn quadratic(&self, x: &[Jet], y: &[Jet]) -> Result<Jet> {
        match self {
            MatrixField::Schwarzschild { mass } => schwarzschild_energy(*mass, x, y),
            _ => {
                let d = self.dim();
                let m = self.entries(x)?;
                let mut acc = Jet::constant(x[0].space(), y[0].order(), 0.0);
                for i in 0..d {
                    if !m[i * d + i].is_zero() {
                        acc = acc + &m[i * d + i] * &(&y[i] * &y[i]);
                    }
                    for j in (i + 1)..d {
                        if !m[i * d + j].is_zero() {
                            acc = acc + (&m[i * d + j] * &(&y[i] * &y[j])) * 2.0;
                        }
                    }
                }
                Ok(acc)
            }
        }
    }
}

pub(crate) fn schwarzschild_chart(mass: f64, x: &[f64]) -> Result<()> {
    let (r, th) = (x[1], x[2]);
    if !(r > 2.0 * mass) {
        return Err(Error::Chart(format!("r = {r} not outside the horizon r = {}", 2.0 * mass)));
    }
    if !(th > 0.0 && th < std::f64::consts::PI) {
        return Err(Error::Chart(format!("polar angle θ = {th} outside (0, π)")));
    }
    Ok(())
}

/// Angular part `y_θ² + sin²θ y_φ²` of the Schwarzschild chart.
pub(crate) fn sphere_part(x: &[Jet], y: &[Jet]) -> Jet {
    let s = x[2].sin();
    &y[2] * &y[2] + &(&s * &s) * &(&y[3] * &y[3])
}

/// `-(1-2m/r)τ² + y_r²/(1-2m/r) + r²(y_θ² + sin²θ y_φ²)`, optionally with an
/// extra `τ`-linear term inserted after the first summand.
pub(crate) fn schwarzschild_energy_with(
    mass: f64,
    x: &[Jet],
    y: &[Jet],
    extra: Option<&dyn Fn(&Jet) -> Result<Jet>>,
) -> Result<Jet> {
    let xv: Vec<f64> = x.iter().map(Jet::value).collect();
    schwarzschild_chart(mass, &xv)?;
    let f = 1.0 - 2.0 * mass * x[1].recip()?;
    let mut l = -(&f * &(&y[0] * &y[0]));
    if let Some(extra) = extra {
        l = l + extra(&f)?;
    }
    let radial = (&y[1] * &y[1]).try_div(&f)?;
    let angular = &(&x[1] * &x[1]) * &sphere_part(x, y);
    Ok(l + radial + angular)
}

pub(crate) fn schwarzschild_energy(mass: f64, x: &[Jet], y: &[Jet]) -> Result<Jet> {
    schwarzschild_energy_with(mass, x, y, None)
}

/// A vector field `K = K^i(x) ∂_i` with polynomial components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorField(pub Vec<ScalarField>);

impl VectorField {
    /// The coordinate field `∂_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut c = vec![ScalarField::zero(); dim];
        c[i] = ScalarField::constant(1.0);
        VectorField(c)
    }

    /// Infinitesimal rotation in the `(i, j)` plane: `-x^j ∂_i + x^i ∂_j`.
    pub fn rotation(dim: usize, i: usize, j: usize) -> Self {
        let mut c = vec![ScalarField::zero(); dim];
        let mut pj = vec![0; dim];
        pj[j] = 1;
        let mut pi = vec![0; dim];
        pi[i] = 1;
        c[i] = ScalarField::monomial(-1.0, &pj);
        c[j] = ScalarField::monomial(1.0, &pi);
        VectorField(c)
    }

    /// Isotropic dilation `x^i ∂_i`.
    pub fn dilation(dim: usize) -> Self {
        VectorField((0..dim).map(ScalarField::coordinate).collect())
    }

    /// Dilation along one axis, `x^i ∂_i` for a single `i`.
    pub fn axis_dilation(dim: usize, i: usize) -> Self {
        let mut c = vec![ScalarField::zero(); dim];
        c[i] = ScalarField::coordinate(i);
        VectorField(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn eval(&self, x: &[Jet]) -> Vec<Jet> {
        self.0.iter().map(|c| c.eval(x)).collect()
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        self.0.iter().map(|c| c.eval_f64(x)).collect()
    }

    /// Linear combination `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &VectorField, b: f64) -> VectorField {
        let scale = |f: &ScalarField, s: f64| -> Vec<Term> {
            match f {
                ScalarField::Constant(c) => vec![Term { coeff: c * s, powers: vec![] }],
                ScalarField::Polynomial { terms } => terms
                    .iter()
                    .map(|t| Term { coeff: t.coeff * s, powers: t.powers.clone() })
                    .collect(),
            }
        };
        VectorField(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(p, q)| {
                    let mut terms = scale(p, a);
                    terms.extend(scale(q, b));
                    ScalarField::Polynomial { terms }
                })
                .collect(),
        )
    }
}
