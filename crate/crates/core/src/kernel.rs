//! Kernel construction, evaluation and Gram matrices.
//!
//! A [`KernelSpec`] is the declarative, serializable description of a kernel
//! `k: Ω² → ℂ`; [`make_kernel`] turns it into an evaluable [`KernelHandle`].
//! Three kinds exist: built-in closed forms, involutive lifts
//! `k(x, y) = f(x + y*)`, and tabulated grids on a finite point set.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Field};
use crate::error::{Error, Result};
use crate::function::{hermite, FunctionHandle};
use crate::lift::StarMap;
use crate::scalar::ComplexScalar;

/// Smoothness order used for kernels with derivatives of every order.
pub const UNBOUNDED_ORDER: u32 = u32::MAX;

/// Default cap on Gram matrix dimension.
pub const DEFAULT_MAX_GRAM: usize = 64;

/// Finite-difference fallback step, relative to the domain width.
pub const FD_FALLBACK_REL_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Builtin,
    Lift,
    Grid,
}

/// Declarative kernel description; this is also the JSON kernel-spec file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star: Option<StarMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<ComplexScalar>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Vec<ComplexScalar>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<Field>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
}

impl KernelSpec {
    fn empty(kind: KernelKind) -> Self {
        KernelSpec {
            kind,
            name: None,
            params: BTreeMap::new(),
            star: None,
            function: None,
            points: None,
            values: None,
            field: None,
            domain: None,
        }
    }

    pub fn builtin(name: &str) -> Self {
        KernelSpec {
            name: Some(name.to_string()),
            ..Self::empty(KernelKind::Builtin)
        }
    }

    pub fn lift(function: &str, star: StarMap) -> Self {
        KernelSpec {
            function: Some(function.to_string()),
            star: Some(star),
            ..Self::empty(KernelKind::Lift)
        }
    }

    pub fn grid(points: &[Complex64], values: &[Vec<Complex64>]) -> Self {
        KernelSpec {
            points: Some(points.iter().copied().map(Into::into).collect()),
            values: Some(
                values
                    .iter()
                    .map(|row| row.iter().copied().map(Into::into).collect())
                    .collect(),
            ),
            ..Self::empty(KernelKind::Grid)
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn with_field(mut self, field: Field) -> Self {
        self.field = Some(field);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec {
            field: json_error_field(&e),
            reason: e.to_string(),
        })
    }

    /// Short identifier used in reports.
    pub fn label(&self) -> String {
        match self.kind {
            KernelKind::Builtin => self.name.clone().unwrap_or_default(),
            KernelKind::Lift => format!(
                "lift[{}, {}]",
                self.function.as_deref().unwrap_or("?"),
                self.star.map(|s| s.as_str()).unwrap_or("?")
            ),
            KernelKind::Grid => format!("grid[{}]", self.points.as_ref().map_or(0, Vec::len)),
        }
    }
}

fn json_error_field(e: &serde_json::Error) -> &'static str {
    let msg = e.to_string();
    for field in [
        "kind", "name", "params", "star", "function", "points", "values", "field", "domain",
    ] {
        if msg.contains(&format!("`{field}`")) {
            return field;
        }
    }
    "spec"
}

/// Regularity tags. Advisory only: certification never trusts them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Smoothness {
    /// Largest `n` with all mixed partials up to `(n, n)` continuous.
    pub sn_order: u32,
    /// Sesquiholomorphic (complex field).
    pub holomorphic_flag: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeSource {
    ClosedForm,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derivative {
    #[serde(with = "crate::scalar::serde_c64")]
    pub value: Complex64,
    pub source: DerivativeSource,
}

/// Built-in kernel zoo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// `exp(-s (x - y)^2)`
    Gaussian { s: f64 },
    /// `min(x, y)` on `(0, ∞)`
    Brownian,
    /// `cos(x - y)`
    Cosine,
    /// `exp(x y)`
    ExpProduct,
    /// `1 / (1 - u conj(v))` on the unit disc
    Szego,
    /// `Re(u conj(v))`: positive definite but not sesquiholomorphic
    ReProduct,
    /// `1 - (x - y)^2`: not positive definite
    PolyNeg,
    /// `sin(x - y)`: violates Hermitian symmetry
    SineAsym,
    /// `c`
    Constant { c: f64 },
    /// `u v` (real)
    Bilinear,
}

pub const BUILTIN_NAMES: &[&str] = &[
    "gaussian",
    "brownian",
    "cosine",
    "exp_product",
    "szego",
    "re_product",
    "poly_neg",
    "sine_asym",
    "constant",
    "bilinear",
];

impl Builtin {
    fn parse(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "gaussian" => &["s"],
            "constant" => &["c"],
            _ => &[],
        };
        if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidSpec {
                field: "params",
                reason: format!("`{name}` takes no parameter `{bad}`"),
            });
        }
        Ok(match name {
            "gaussian" => {
                let s = params.get("s").copied().unwrap_or(1.0);
                if !(s.is_finite() && s > 0.0) {
                    return Err(Error::InvalidSpec {
                        field: "params",
                        reason: format!("gaussian scale s must be > 0, got {s}"),
                    });
                }
                Builtin::Gaussian { s }
            }
            "brownian" => Builtin::Brownian,
            "cosine" => Builtin::Cosine,
            "exp_product" => Builtin::ExpProduct,
            "szego" => Builtin::Szego,
            "re_product" => Builtin::ReProduct,
            "poly_neg" => Builtin::PolyNeg,
            "sine_asym" => Builtin::SineAsym,
            "constant" => Builtin::Constant {
                c: params.get("c").copied().unwrap_or(1.0),
            },
            "bilinear" => Builtin::Bilinear,
            other => return Err(Error::UnknownBuiltin(other.to_string())),
        })
    }

    fn fields(&self) -> &'static [Field] {
        match self {
            Builtin::Szego | Builtin::ReProduct => &[Field::Complex],
            Builtin::Constant { .. } => &[Field::Real, Field::Complex],
            _ => &[Field::Real],
        }
    }

    fn default_domain(&self, field: Field) -> Domain {
        match (self, field) {
            (Builtin::Brownian, _) => Domain::interval(0.1, 10.0),
            (_, Field::Complex) => Domain::disc(Complex64::new(0.0, 0.0), 0.9),
            _ => Domain::interval(-3.0, 3.0),
        }
    }

    fn smoothness(&self, field: Field) -> Smoothness {
        match self {
            Builtin::Brownian => Smoothness {
                sn_order: 0,
                holomorphic_flag: false,
            },
            Builtin::ReProduct => Smoothness {
                sn_order: 0,
                holomorphic_flag: false,
            },
            Builtin::Szego => Smoothness {
                sn_order: UNBOUNDED_ORDER,
                holomorphic_flag: true,
            },
            _ => Smoothness {
                sn_order: UNBOUNDED_ORDER,
                holomorphic_flag: field == Field::Complex,
            },
        }
    }

    fn closed_form_order(&self) -> usize {
        match self {
            Builtin::Brownian | Builtin::ReProduct => 0,
            _ => usize::MAX,
        }
    }

    fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        match *self {
            Builtin::Gaussian { s } => {
                let t = x.re - y.re;
                Complex64::new((-s * t * t).exp(), 0.0)
            }
            Builtin::Brownian => Complex64::new(x.re.min(y.re), 0.0),
            Builtin::Cosine => Complex64::new((x.re - y.re).cos(), 0.0),
            Builtin::ExpProduct => Complex64::new((x.re * y.re).exp(), 0.0),
            Builtin::Szego => Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - x * y.conj()),
            Builtin::ReProduct => Complex64::new((x * y.conj()).re, 0.0),
            Builtin::PolyNeg => {
                let t = x.re - y.re;
                Complex64::new(1.0 - t * t, 0.0)
            }
            Builtin::SineAsym => Complex64::new((x.re - y.re).sin(), 0.0),
            Builtin::Constant { c } => Complex64::new(c, 0.0),
            Builtin::Bilinear => Complex64::new(x.re * y.re, 0.0),
        }
    }

    /// `∂^{m1+m2} k / ∂y^{m2} ∂x^{m1}` (real) or `∂^{m1+m2} k / ∂v̄^{m2} ∂u^{m1}` (complex).
    fn derivative(&self, x: Complex64, y: Complex64, m1: usize, m2: usize) -> Option<Complex64> {
        if m1 == 0 && m2 == 0 {
            return Some(self.eval(x, y));
        }
        let n = m1 + m2;
        // stationary kernels g(x - y): ∂x = g', ∂y = -g'
        let sign = if m2.is_multiple_of(2) { 1.0 } else { -1.0 };
        let t = x.re - y.re;
        let r = |v: f64| Some(Complex64::new(v, 0.0));
        match *self {
            Builtin::Gaussian { s } => {
                let rs = s.sqrt();
                let dn = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                let g = dn * rs.powi(n as i32) * hermite(n, Complex64::new(rs * t, 0.0)).re
                    * (-s * t * t).exp();
                r(sign * g)
            }
            Builtin::Cosine => {
                let g = match n % 4 {
                    0 => t.cos(),
                    1 => -t.sin(),
                    2 => -t.cos(),
                    _ => t.sin(),
                };
                r(sign * g)
            }
            Builtin::SineAsym => {
                let g = match n % 4 {
                    0 => t.sin(),
                    1 => t.cos(),
                    2 => -t.sin(),
                    _ => -t.cos(),
                };
                r(sign * g)
            }
            Builtin::PolyNeg => {
                let g = match n {
                    1 => -2.0 * t,
                    2 => -2.0,
                    _ => 0.0,
                };
                r(sign * g)
            }
            Builtin::ExpProduct => {
                let (xv, yv) = (x.re, y.re);
                let mut acc = 0.0;
                for j in 0..=m1.min(m2) {
                    acc += binomial(m1, j) * falling(m2, j) * xv.powi((m2 - j) as i32)
                        * yv.powi((m1 - j) as i32);
                }
                r(acc * (xv * yv).exp())
            }
            Builtin::Szego => {
                let w = y.conj();
                let one = Complex64::new(1.0, 0.0);
                let base = one - x * w;
                let p = m2 + 1;
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..=m1.min(m2) {
                    let rr = m1 - j;
                    acc += binomial(m1, j)
                        * falling(m2, j)
                        * rising(p, rr)
                        * x.powi((m2 - j) as i32)
                        * w.powi(rr as i32)
                        / base.powi((p + rr) as i32);
                }
                Some(acc * factorial(m2))
            }
            Builtin::Constant { .. } => r(0.0),
            Builtin::Bilinear => match (m1, m2) {
                (1, 0) => Some(y),
                (0, 1) => Some(x),
                (1, 1) => r(1.0),
                _ => r(0.0),
            },
            Builtin::Brownian | Builtin::ReProduct => None,
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    falling(n, k) / factorial(k)
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

fn rising(p: usize, k: usize) -> f64 {
    (0..k).map(|i| (p + i) as f64).product()
}

#[derive(Debug, Clone)]
enum Repr {
    Builtin(Builtin),
    Lift { f: FunctionHandle, star: StarMap },
    Grid {
        points: Vec<Complex64>,
        values: Vec<Vec<Complex64>>,
    },
    /// `∂^{2m} k / ∂y^m ∂x^m` of a base kernel.
    Derivative { base: Arc<KernelHandle>, order: usize },
}

/// Evaluable kernel. Immutable; cheap to clone.
#[derive(Debug, Clone)]
pub struct KernelHandle {
    spec: KernelSpec,
    field: Field,
    domain: Domain,
    repr: Repr,
    smoothness: Option<Smoothness>,
    fd_fallback: bool,
}

/// Build a handle from a spec, validating it.
pub fn make_kernel(spec: &KernelSpec) -> Result<KernelHandle> {
    let (repr, field, default_domain, smoothness) = match spec.kind {
        KernelKind::Builtin => {
            let name = spec.name.as_deref().ok_or(Error::InvalidSpec {
                field: "name",
                reason: "builtin kernels need a name".into(),
            })?;
            let b = Builtin::parse(name, &spec.params)?;
            let field = match spec.field {
                Some(f) if b.fields().contains(&f) => f,
                Some(f) => {
                    return Err(Error::InvalidSpec {
                        field: "field",
                        reason: format!("`{name}` does not support the {f:?} field"),
                    })
                }
                None => b.fields()[0],
            };
            (Repr::Builtin(b), field, b.default_domain(field), Some(b.smoothness(field)))
        }
        KernelKind::Lift => {
            let fname = spec.function.as_deref().ok_or(Error::InvalidSpec {
                field: "function",
                reason: "lift kernels need a function".into(),
            })?;
            let star = spec.star.ok_or(Error::InvalidSpec {
                field: "star",
                reason: "lift kernels need a star map".into(),
            })?;
            let f = FunctionHandle::by_name(fname, &spec.params)?;
            let field = star.field();
            if let Some(given) = spec.field {
                if given != field {
                    return Err(Error::InvalidSpec {
                        field: "field",
                        reason: format!("star map `{}` implies the {field:?} field", star.as_str()),
                    });
                }
            }
            let domain = match field {
                Field::Real => Domain::interval(-3.0, 3.0),
                Field::Complex => Domain::disc(Complex64::new(0.0, 0.0), 0.9),
            };
            let smooth = Smoothness {
                sn_order: UNBOUNDED_ORDER,
                holomorphic_flag: field == Field::Complex,
            };
            (Repr::Lift { f, star }, field, domain, Some(smooth))
        }
        KernelKind::Grid => {
            let points: Vec<Complex64> = spec
                .points
                .as_ref()
                .ok_or(Error::InvalidSpec {
                    field: "points",
                    reason: "grid kernels need points".into(),
                })?
                .iter()
                .copied()
                .map(Into::into)
                .collect();
            let values = spec.values.as_ref().ok_or(Error::InvalidSpec {
                field: "values",
                reason: "grid kernels need values".into(),
            })?;
            let n = points.len();
            if n == 0 {
                return Err(Error::InvalidSpec {
                    field: "points",
                    reason: "grid point list is empty".into(),
                });
            }
            if values.len() != n || values.iter().any(|r| r.len() != n) {
                let (bad_row, bad_len) = values
                    .iter()
                    .enumerate()
                    .find(|(_, r)| r.len() != n)
                    .map(|(i, r)| (i, r.len()))
                    .unwrap_or((values.len(), 0));
                return Err(Error::GridDimensionMismatch {
                    points: n,
                    rows: values.len(),
                    bad_row,
                    bad_len,
                });
            }
            let values: Vec<Vec<Complex64>> = values
                .iter()
                .map(|r| r.iter().copied().map(Into::into).collect())
                .collect();
            let field = spec.field.unwrap_or_else(|| {
                if points.iter().all(|p| p.im == 0.0) {
                    Field::Real
                } else {
                    Field::Complex
                }
            });
            let domain = Domain::points(&points);
            (Repr::Grid { points, values }, field, domain, None)
        }
    };

    let domain = match (&spec.domain, spec.kind) {
        (Some(d), KernelKind::Builtin | KernelKind::Lift) => {
            d.validate()?;
            check_domain_field(d, field)?;
            if let Repr::Builtin(Builtin::Szego) = repr {
                if let Domain::Disc { center, radius } = d {
                    if Complex64::from(*center).norm() + radius >= 1.0 {
                        return Err(Error::InvalidSpec {
                            field: "domain",
                            reason: "szego domain must lie inside the open unit disc".into(),
                        });
                    }
                }
            }
            d.clone()
        }
        _ => default_domain,
    };

    if let Repr::Lift { f, star } = &repr {
        check_lift_range(f, *star, &domain)?;
    }

    Ok(KernelHandle {
        spec: spec.clone(),
        field,
        domain,
        repr,
        smoothness,
        fd_fallback: true,
    })
}

/// `f` must be holomorphic on a neighbourhood of `S = Ω + Ω*`.
fn check_lift_range(f: &FunctionHandle, star: StarMap, domain: &Domain) -> Result<()> {
    let (center, radius) = match domain {
        Domain::Interval { lo, hi } => (Complex64::new(0.5 * (lo + hi), 0.0), hi - lo),
        Domain::Disc { center, radius } => (Complex64::from(*center), 2.0 * radius),
        Domain::Points { points } => {
            for &a in points {
                for &b in points {
                    let s = Complex64::from(a) + star.apply(b.into());
                    if f.singularity_distance(s) <= crate::domain::MEMBERSHIP_TOL {
                        return Err(Error::outside(s));
                    }
                }
            }
            return Ok(());
        }
    };
    let s0 = center + star.apply(center);
    if f.singularity_distance(s0) <= radius {
        return Err(Error::InvalidSpec {
            field: "domain",
            reason: format!("`{}` is singular on Ω + Ω*", f.name),
        });
    }
    Ok(())
}

fn check_domain_field(d: &Domain, field: Field) -> Result<()> {
    let ok = match (d, field) {
        (Domain::Interval { .. }, Field::Real) => true,
        (Domain::Disc { .. }, Field::Complex) => true,
        (Domain::Points { points }, Field::Real) => points.iter().all(|p| p.im == 0.0),
        (Domain::Points { .. }, Field::Complex) => true,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidSpec {
            field: "domain",
            reason: format!("domain type does not match the {field:?} field"),
        })
    }
}

impl KernelHandle {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn smoothness(&self) -> Option<Smoothness> {
        self.smoothness
    }

    pub fn label(&self) -> String {
        match &self.repr {
            Repr::Derivative { base, order } => format!("d{order}[{}]", base.label()),
            _ => self.spec.label(),
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.repr, Repr::Grid { .. })
    }

    /// Whether finite differences may stand in for missing closed forms.
    pub fn fd_fallback(&self) -> bool {
        self.fd_fallback
    }

    pub fn with_fd_fallback(mut self, enabled: bool) -> Self {
        self.fd_fallback = enabled;
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Result<Self> {
        domain.validate()?;
        check_domain_field(&domain, self.field)?;
        self.domain = domain;
        Ok(self)
    }

    /// Highest per-variable order available in closed form.
    pub fn closed_form_order(&self) -> usize {
        match &self.repr {
            Repr::Builtin(b) => b.closed_form_order(),
            Repr::Lift { .. } => usize::MAX,
            Repr::Grid { .. } => 0,
            Repr::Derivative { base, order } => base.closed_form_order().saturating_sub(*order),
        }
    }

    fn check_point(&self, z: Complex64) -> Result<()> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::outside(z));
        }
        if self.field == Field::Real && z.im != 0.0 {
            return Err(Error::NonRealInput(z.im));
        }
        if !self.domain.contains(z) {
            return Err(match self.repr {
                Repr::Grid { .. } => Error::GridPointNotFound { re: z.re, im: z.im },
                _ => Error::outside(z),
            });
        }
        Ok(())
    }

    /// `k(x, y)`, with domain and field checks.
    pub fn eval(&self, x: Complex64, y: Complex64) -> Result<Complex64> {
        self.check_point(x)?;
        self.check_point(y)?;
        self.eval_unchecked(x, y)
    }

    /// Evaluate without domain checks. Grid kernels still require stored points.
    pub(crate) fn eval_unchecked(&self, x: Complex64, y: Complex64) -> Result<Complex64> {
        match &self.repr {
            Repr::Builtin(b) => Ok(b.eval(x, y)),
            Repr::Lift { f, star } => Ok(f.eval(x + star.apply(y))),
            Repr::Grid { points, values } => {
                let i = grid_index(points, x)?;
                let j = grid_index(points, y)?;
                Ok(values[i][j])
            }
            Repr::Derivative { base, order } => {
                base.derivative_unchecked(x, y, *order, *order).map(|d| d.value)
            }
        }
    }

    /// Mixed partial `∂^{m1+m2} k / ∂y^{m2} ∂x^{m1}` (real field) or
    /// `∂^{m1+m2} k / ∂v̄^{m2} ∂u^{m1}` (complex field).
    ///
    /// Closed forms are used when available; otherwise, if fallback is
    /// enabled, a centered tensor-product difference with step
    /// `1e-4 · width(domain)` is used (error `O(step²)`, roundoff
    /// `O(eps / step^{m1+m2})`).
    pub fn eval_derivative(&self, x: Complex64, y: Complex64, m1: usize, m2: usize) -> Result<Derivative> {
        self.check_point(x)?;
        self.check_point(y)?;
        self.derivative_unchecked(x, y, m1, m2)
    }

    fn derivative_unchecked(&self, x: Complex64, y: Complex64, m1: usize, m2: usize) -> Result<Derivative> {
        if m1 == 0 && m2 == 0 {
            return Ok(Derivative {
                value: self.eval_unchecked(x, y)?,
                source: DerivativeSource::ClosedForm,
            });
        }
        let closed = match &self.repr {
            Repr::Builtin(b) => b.derivative(x, y, m1, m2),
            Repr::Lift { f, star } => {
                let sign = if m2 % 2 == 1 && star.sign() < 0.0 { -1.0 } else { 1.0 };
                Some(f.derivative(m1 + m2, x + star.apply(y)) * sign)
            }
            Repr::Grid { .. } => None,
            Repr::Derivative { base, order } => {
                if base.closed_form_order() >= order + m1.max(m2) {
                    Some(base.derivative_unchecked(x, y, order + m1, order + m2)?.value)
                } else {
                    None
                }
            }
        };
        if let Some(value) = closed {
            return Ok(Derivative {
                value,
                source: DerivativeSource::ClosedForm,
            });
        }
        if !self.fd_fallback {
            return Err(Error::DerivativeUnavailable { m1, m2 });
        }
        let step = FD_FALLBACK_REL_STEP * self.domain.width().max(1e-3);
        let c1 = central_weights(m1);
        let c2 = central_weights(m2);
        let mut acc = Complex64::new(0.0, 0.0);
        for &(o1, w1) in &c1 {
            for &(o2, w2) in &c2 {
                let v = self.eval_unchecked(x + o1 * step, y + o2 * step)?;
                acc += v * (w1 * w2);
            }
        }
        Ok(Derivative {
            value: acc / step.powi((m1 + m2) as i32),
            source: DerivativeSource::FiniteDifference,
        })
    }

    pub fn gram(&self, points: &[Complex64]) -> Result<GramMatrix> {
        self.gram_with_limit(points, DEFAULT_MAX_GRAM)
    }

    pub fn gram_with_limit(&self, points: &[Complex64], max_dim: usize) -> Result<GramMatrix> {
        if points.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        if points.len() > max_dim {
            return Err(Error::param(
                "points",
                format!("{} points exceed the Gram limit {max_dim}", points.len()),
            ));
        }
        let n = points.len();
        let mut entries = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            for j in 0..n {
                entries[(i, j)] = self.eval(points[i], points[j])?;
            }
        }
        Ok(GramMatrix::new(points.to_vec(), entries))
    }

    /// The order-`(m, m)` derivative kernel, metadata decremented by `m`.
    pub(crate) fn derivative_handle(&self, m: usize) -> KernelHandle {
        let smoothness = self.smoothness.map(|s| Smoothness {
            sn_order: if s.sn_order == UNBOUNDED_ORDER {
                UNBOUNDED_ORDER
            } else {
                s.sn_order.saturating_sub(m as u32)
            },
            holomorphic_flag: s.holomorphic_flag,
        });
        KernelHandle {
            spec: self.spec.clone(),
            field: self.field,
            domain: self.domain.clone(),
            repr: Repr::Derivative {
                base: Arc::new(self.clone()),
                order: m,
            },
            smoothness,
            fd_fallback: self.fd_fallback,
        }
    }
}

fn grid_index(points: &[Complex64], z: Complex64) -> Result<usize> {
    points
        .iter()
        .position(|p| (p - z).norm() <= crate::domain::MEMBERSHIP_TOL)
        .ok_or(Error::GridPointNotFound { re: z.re, im: z.im })
}

/// Offsets (in units of the step) and weights of the order-`m` central difference.
fn central_weights(m: usize) -> Vec<(f64, f64)> {
    (0..=m)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            (m as f64 / 2.0 - i as f64, sign * binomial(m, i))
        })
        .collect()
}

/// `[k(x_i, x_j)]` as evaluated, never symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub points: Vec<Complex64>,
    pub entries: DMatrix<Complex64>,
    /// `max_{i,j} |entries(i,j) - conj(entries(j,i))|`
    pub hermitian_defect: f64,
}

impl GramMatrix {
    pub fn new(points: Vec<Complex64>, entries: DMatrix<Complex64>) -> Self {
        let hermitian_defect = hermitian_defect(&entries);
        GramMatrix {
            points,
            entries,
            hermitian_defect,
        }
    }

    /// A Gram matrix with no generating points (e.g. a matrix built by hand).
    pub fn from_entries(entries: DMatrix<Complex64>) -> Self {
        Self::new(Vec::new(), entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

pub fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols().min(m.nrows()) {
            d = d.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    d
}
