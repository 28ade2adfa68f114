//! Monodromy of flat connections and two small cohomology computations:
//! the discrepancy of a 1-form on the circle and the `C/Z` class of
//! `z^alpha`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::algebra::GroupElement;
use crate::error::{Error, Result};
use crate::formlang::{partial, ScalarExpr};
use crate::forms::{curvature, ConnectionForm};
use crate::holonomy::{ordered_map, path_holonomy};
use crate::lattice::{substitute_t, Curve, PathSpec, ENDPOINT_TOL};

/// Default bound on the sampled curvature below which a connection counts as flat.
pub const DEFAULT_FLAT_TOL: f64 = 1e-8;

/// Curvature samples taken along each generating loop.
const FLATNESS_SAMPLES: usize = 64;

/// Images of named loops under the holonomy of a flat connection.
#[derive(Clone, Debug)]
pub struct MonodromyRep {
    pub base: Vec<f64>,
    pub generators: Vec<(String, PathSpec)>,
    pub images: BTreeMap<String, GroupElement>,
    /// Largest curvature norm seen while certifying flatness.
    pub flatness_residual: f64,
}

/// Certifies flatness along the loops, then computes each loop's holonomy.
pub fn monodromy_representation(
    a: &ConnectionForm,
    base: &[f64],
    loops: &[(String, PathSpec)],
    n: usize,
    flat_tol: f64,
) -> Result<MonodromyRep> {
    for (name, path) in loops {
        if path.dim() != base.len() || path.dim() != a.dim() {
            return Err(Error::Dimension(format!("loop `{name}` lives in a different chart")));
        }
        for (what, p) in [("start", path.start()), ("end", path.end())] {
            let gap = p.iter().zip(base).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            if gap > ENDPOINT_TOL {
                return Err(Error::InvalidArgument(format!(
                    "loop `{name}` does not {what} at the base point (gap {gap:e})"
                )));
            }
        }
    }
    let f = curvature(a);
    let mut residual = 0.0f64;
    for (_, path) in loops {
        let samples = ordered_map(FLATNESS_SAMPLES, |k| {
            f.max_norm(&path.point((k as f64 + 0.5) / FLATNESS_SAMPLES as f64)?)
        })?;
        residual = samples.into_iter().fold(residual, f64::max);
    }
    if residual.is_nan() || residual > flat_tol {
        return Err(Error::NotIntegrable {
            residual,
            tolerance: flat_tol,
        });
    }
    let values = ordered_map(loops.len(), |k| path_holonomy(a, &loops[k].1, n))?;
    Ok(MonodromyRep {
        base: base.to_vec(),
        generators: loops.to_vec(),
        images: loops.iter().map(|(name, _)| name.clone()).zip(values).collect(),
        flatness_residual: residual,
    })
}

/// Conjugation-invariant data of a group element.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugacyInvariants {
    pub trace: Complex64,
    pub det: Complex64,
    /// Sorted by real, then imaginary part.
    pub eigenvalues: Vec<Complex64>,
}

impl ConjugacyInvariants {
    /// Largest difference between corresponding invariants.
    pub fn distance(&self, other: &Self) -> f64 {
        let eig = if self.eigenvalues.len() == other.eigenvalues.len() {
            self.eigenvalues
                .iter()
                .zip(&other.eigenvalues)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        (self.trace - other.trace)
            .norm()
            .max((self.det - other.det).norm())
            .max(eig)
    }
}

pub fn conjugacy_invariants(g: &GroupElement) -> ConjugacyInvariants {
    ConjugacyInvariants {
        trace: g.trace(),
        det: g.determinant(),
        eigenvalues: g.eigenvalues(),
    }
}

fn parse_t(text: &str) -> Result<ScalarExpr> {
    Ok(crate::formlang::parse(&substitute_t(text), 1)?)
}

/// One term of a 1-form `w(t) dt` on the circle `R/Z`.
#[derive(Clone, Debug)]
pub enum CircleTerm {
    /// Contributes `w(t)`.
    Density(ScalarExpr),
    /// Contributes `f'(t)`, the differential of a 0-form.
    Differential(ScalarExpr),
}

/// A 1-form on the circle, as a sum of terms in the variable `x1 = t`.
#[derive(Clone, Debug, Default)]
pub struct CircleForm {
    pub terms: Vec<CircleTerm>,
}

impl CircleForm {
    /// Parses a density written in `t` (or `x1`).
    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::density(parse_t(text)?))
    }

    /// Parses a 0-form `f` in `t` and returns `self + df`.
    pub fn plus_parsed_differential(self, text: &str) -> Result<Self> {
        Ok(self.plus_differential(parse_t(text)?))
    }

    pub fn density(e: ScalarExpr) -> Self {
        Self {
            terms: vec![CircleTerm::Density(e)],
        }
    }

    /// `self + df`: the action of the 0-form `f`.
    pub fn plus_differential(mut self, f: ScalarExpr) -> Self {
        self.terms.push(CircleTerm::Differential(f));
        self
    }

    pub fn plus(mut self, other: &CircleForm) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let mut total = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let (e, v) = match term {
                CircleTerm::Density(e) => (e, e.eval_real(&[t])),
                CircleTerm::Differential(f) => (f, partial(f, &[t], 0)),
            };
            if e.arity() != 1 {
                return Err(Error::Dimension(format!(
                    "circle form term `{e}` must be a function of t alone"
                )));
            }
            total += v.map_err(|err| Error::eval(err, &[t]))?;
        }
        if total.im.abs() > 1e-12 * total.re.abs().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "circle form is not real at t = {t} (value {total})"
            )));
        }
        Ok(total.re)
    }
}

/// `Delta = integral of w over one period`, by the composite midpoint rule
/// with `n` nodes. This is the constant jump of any primitive of `w` after
/// one turn, and depends only on the class of `w` modulo differentials.
pub fn discrepancy_s1(w: &CircleForm, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("discrepancy needs at least one node".into()));
    }
    let gap = (w.eval(0.0)? - w.eval(1.0)?).abs();
    if gap > ENDPOINT_TOL {
        return Err(Error::NotPeriodic { gap });
    }
    let h = 1.0 / n as f64;
    let values = ordered_map(n, |k| w.eval((k as f64 + 0.5) * h))?;
    Ok(values.iter().sum::<f64>() * h)
}

/// The class of `z^alpha` in `C/Z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaClass {
    /// `alpha` shifted by an integer so that its real part lies in `[0, 1)`.
    pub representative: Complex64,
    /// `exp(2 pi i alpha)`.
    pub monodromy: Complex64,
}

pub fn alpha_class(alpha: Complex64) -> AlphaClass {
    let mut re = alpha.re - alpha.re.floor();
    if re >= 1.0 {
        re = 0.0;
    }
    AlphaClass {
        representative: Complex64::new(re, alpha.im),
        monodromy: (Complex64::new(0.0, TAU) * alpha).exp(),
    }
}

/// Whether `alpha` and `beta` define the same class. Requires both equal
/// monodromy (to `1e-12` relative) and an integer difference.
pub fn same_alpha_class(alpha: Complex64, beta: Complex64) -> bool {
    let (ma, mb) = (alpha_class(alpha).monodromy, alpha_class(beta).monodromy);
    let scale = ma.norm().max(mb.norm()).max(1.0);
    let d = alpha - beta;
    (ma - mb).norm() <= 1e-12 * scale && (d.re - d.re.round()).abs() <= 1e-12 && d.im.abs() <= 1e-12
}
