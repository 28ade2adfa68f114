//! Multiplicative integrals.
//!
//! Every ordered product here multiplies later factors on the left, so the
//! holonomy of a composite path is `Hol(second) * Hol(first)`. Independent
//! factors may be computed on several threads; products are always
//! assembled in a fixed order, so results do not depend on thread count.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::algebra::{group_distance, mat_exp, mat_log, AlgebraElement, GroupElement};
use crate::error::{Error, Result};
use crate::forms::{ConnectionForm, FormFlag, TwoForm};
use crate::lattice::{
    cube_boundary_sequence_d2, lattice_2d, sample_path, Curve, EntryKind, FaceSweep, Segment, Sweep, SweepRow,
};

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on,
/// keeping results in index order.
pub(crate) fn ordered_map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Ordered product `f[k-1] * ... * f[1] * f[0]`.
fn left_product(n: usize, factors: impl IntoIterator<Item = GroupElement>) -> GroupElement {
    factors.into_iter().fold(GroupElement::identity(n), |acc, f| &f * &acc)
}

/// Where each path segment samples the connection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Quadrature {
    /// Parameter midpoint; second order.
    #[default]
    Midpoint,
    /// Segment start; first order.
    LeftEndpoint,
}

fn check_dims(what: &str, form: usize, chart: usize) -> Result<()> {
    if form == chart {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what}: form lives on a {form}-dimensional chart, geometry on a {chart}-dimensional one"
        )))
    }
}

/// Holonomy of `a` along `gamma` over a uniform partition into `n` segments.
pub fn path_holonomy<C: Curve + ?Sized>(a: &ConnectionForm, gamma: &C, n: usize) -> Result<GroupElement> {
    path_holonomy_with(a, gamma, n, Quadrature::Midpoint)
}

pub fn path_holonomy_with<C: Curve + ?Sized>(
    a: &ConnectionForm,
    gamma: &C,
    n: usize,
    quadrature: Quadrature,
) -> Result<GroupElement> {
    check_dims("path holonomy", a.dim(), gamma.dim())?;
    let steps = sample_path(gamma, n)?;
    let factors = ordered_map(steps.len(), |i| {
        let s = &steps[i];
        let at = match quadrature {
            Quadrature::Midpoint => &s.midpoint,
            Quadrature::LeftEndpoint => &s.start,
        };
        Ok(mat_exp(&a.contract(at, &s.delta)?)?)
    })?;
    Ok(left_product(a.n(), factors))
}

fn segment_factor(a: &ConnectionForm, from: &[f64], to: &[f64]) -> Result<GroupElement> {
    let mid: Vec<f64> = from.iter().zip(to).map(|(x, y)| 0.5 * (x + y)).collect();
    let delta: Vec<f64> = from.iter().zip(to).map(|(x, y)| y - x).collect();
    Ok(mat_exp(&a.contract(&mid, &delta)?)?)
}

/// Multiplicative integral of a 2-flag `(w, A)` over the lattice
/// approximation of a homotopy.
///
/// Rows of cells (fixed `t2`) are multiplied with later rows on the left.
/// Within a row each cell contributes the lasso `R P^-1 exp(W) P R^-1`:
/// `W` is `w` at the cell centre contracted with half the bivector of the
/// cell's diagonals, `P` transports from the cell's lowest vertex to its
/// centre, and `R` transports along the row's lower edges from that vertex
/// to the row's end. For `w = curvature(A)` on a flagged homotopy the
/// result tends to `Hol(gamma(1)) Hol(gamma(0))^-1`.
pub fn surface_holonomy<S: Sweep + ?Sized>(flag: &FormFlag, h: &S, n1: usize, n2: usize) -> Result<GroupElement> {
    let FormFlag::Degree2 { top, lower } = flag else {
        return Err(Error::InvalidArgument(
            "surface holonomy needs a flag of degree 2".into(),
        ));
    };
    check_dims("surface holonomy", flag.dim(), h.dim())?;
    let lat = lattice_2d(h, n1, n2)?;
    let n = flag.n();
    let rows = ordered_map(n2, |b| row_value(top, lower, &lat, b))?;
    Ok(left_product(n, rows))
}

fn row_value(top: &TwoForm, a: &ConnectionForm, lat: &crate::lattice::Lattice2d, b: usize) -> Result<GroupElement> {
    let n = a.n();
    let n1 = lat.n1;
    // tails[k] transports from vertex (k, b) to the row end along the lower edges
    let mut tails = vec![GroupElement::identity(n); n1 + 1];
    for k in (0..n1).rev() {
        let from = lat.vertex(k, b);
        let to = lat.vertex(k + 1, b);
        let delta: Vec<f64> = to.iter().zip(from).map(|(y, x)| y - x).collect();
        let edge = mat_exp(&a.contract(lat.row_midpoint(k, b), &delta)?)?;
        tails[k] = &tails[k + 1] * &edge;
    }
    let mut row = GroupElement::identity(n);
    for (k, tail) in tails.iter().enumerate().take(n1) {
        let cell = lat.cell(k, b);
        let [v0, v1, v2, v3] = cell.vertices;
        let d1: Vec<f64> = v2.iter().zip(v0).map(|(y, x)| y - x).collect();
        let d2: Vec<f64> = v3.iter().zip(v1).map(|(y, x)| y - x).collect();
        let w = &top.contract(cell.center, &d1, &d2)? * 0.5;
        if w.norm() == 0.0 {
            continue;
        }
        let p = segment_factor(a, v0, cell.center)?;
        let lasso = tail * &(&(&p.inverse()? * &mat_exp(&w)?) * &p);
        let factor = &lasso * &tail.inverse()?;
        row = &factor * &row;
    }
    Ok(row)
}

/// Product over the twelve-entry boundary sequence of a small cube.
///
/// Face entries use [`surface_holonomy`] on the face sweep at `nsub x nsub`
/// (rounded up to even) and are turned into loops at their base corner;
/// edges use [`path_holonomy`] with `nsub` segments.
pub fn cube_boundary_holonomy(
    flag: &FormFlag,
    center: &[f64],
    eps: f64,
    axes: (usize, usize, usize),
    nsub: usize,
) -> Result<GroupElement> {
    if flag.degree() != 2 {
        return Err(Error::InvalidArgument(
            "cube boundary holonomy needs a flag of degree 2".into(),
        ));
    }
    check_dims("cube boundary holonomy", flag.dim(), center.len())?;
    if flag.dim() < 3 {
        return Err(Error::Dimension(
            "cube boundary holonomy needs at least 3 coordinates".into(),
        ));
    }
    let nsub = nsub.max(2).next_multiple_of(2);
    let seq = cube_boundary_sequence_d2(center, eps, axes)?;
    let a = flag.connection();
    let values = ordered_map(seq.entries.len(), |k| {
        let e = &seq.entries[k];
        match e.kind {
            EntryKind::Edge => path_holonomy(
                a,
                &Segment {
                    from: e.start.clone(),
                    to: e.end.clone(),
                },
                nsub,
            ),
            EntryKind::Face => {
                let sweep = FaceSweep {
                    s: e.start.clone(),
                    p: e.p.clone(),
                    q: e.q.clone(),
                };
                let y = surface_holonomy(flag, &sweep, nsub, nsub)?;
                let upper = path_holonomy(a, &SweepRow { sweep: &sweep, t2: 1.0 }, nsub)?;
                let x = &(&upper.inverse()? * &y) * &upper;
                if e.orientation < 0 {
                    Ok(x.inverse()?)
                } else {
                    Ok(x)
                }
            }
        }
    })?;
    Ok(left_product(flag.n(), values))
}

/// `log(holonomy around an eps x eps square centred at x) / eps^2`.
///
/// The square lies in the `(i, j)` coordinate plane and is traversed along
/// `+e_j, +e_i, -e_j, -e_i` from its lowest corner, then conjugated back to
/// `x` along the straight segment from `x` to that corner. Each side uses
/// `n` segments. The estimate tends to `F_ij(x)`.
pub fn loop_curvature_estimate(
    a: &ConnectionForm,
    x: &[f64],
    i: usize,
    j: usize,
    eps: f64,
    n: usize,
) -> Result<AlgebraElement> {
    let m = a.dim();
    check_dims("loop curvature", m, x.len())?;
    if i == j || i >= m || j >= m {
        return Err(Error::InvalidArgument(format!(
            "loop plane needs two distinct axes below {m}, got ({}, {})",
            i + 1,
            j + 1
        )));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!("loop size must be positive, got {eps}")));
    }
    let shift = |p: &[f64], k: usize, d: f64| {
        let mut q = p.to_vec();
        q[k] += d;
        q
    };
    let c0 = shift(&shift(x, i, -eps / 2.0), j, -eps / 2.0);
    let c1 = shift(&c0, j, eps);
    let c2 = shift(&c1, i, eps);
    let c3 = shift(&c2, j, -eps);
    let corners = [&c0, &c1, &c2, &c3, &c0];
    let sides = ordered_map(4, |k| {
        path_holonomy(
            a,
            &Segment {
                from: corners[k].clone(),
                to: corners[k + 1].clone(),
            },
            n,
        )
    })?;
    let square = left_product(a.n(), sides);
    let lead = path_holonomy(
        a,
        &Segment {
            from: x.to_vec(),
            to: c0.clone(),
        },
        n,
    )?;
    let based = &(&lead.inverse()? * &square) * &lead;
    Ok(&mat_log(&based)? * (1.0 / (eps * eps)))
}

/// A word in named generators and their inverses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Word(pub Vec<(String, i32)>);

impl FromStr for Word {
    type Err = Error;

    /// Whitespace-separated letters such as `a b a^-1 b^-1`.
    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for token in s.split_whitespace() {
            let (name, exp) = match token.split_once('^') {
                Some((name, e)) => {
                    let exp = match e {
                        "1" | "+1" => 1,
                        "-1" => -1,
                        _ => {
                            return Err(Error::InvalidArgument(format!(
                                "letter `{token}`: exponent must be 1 or -1"
                            )))
                        }
                    };
                    (name, exp)
                }
                None => (token, 1),
            };
            if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(Error::InvalidArgument(format!(
                    "letter `{token}` has an invalid generator name"
                )));
            }
            letters.push((name.to_string(), exp));
        }
        Ok(Word(letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (name, exp)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{name}")?;
            if *exp < 0 {
                write!(f, "^-1")?;
            }
        }
        Ok(())
    }
}

/// Value of a word: letters multiply left to right, so `a b` is `a * b`
/// and the rightmost letter acts first.
pub fn word_holonomy(assignments: &BTreeMap<String, GroupElement>, w: &Word) -> Result<GroupElement> {
    let mut values = Vec::with_capacity(w.0.len());
    for (name, exp) in &w.0 {
        let g = assignments
            .get(name)
            .ok_or_else(|| Error::UnassignedGenerator(name.clone()))?;
        values.push(if *exp < 0 { g.inverse()? } else { g.clone() });
    }
    let Some(first) = values.first() else {
        let n = assignments.values().next().map_or(1, GroupElement::dim);
        return Ok(GroupElement::identity(n));
    };
    let mut acc = first.clone();
    for v in &values[1..] {
        if v.dim() != acc.dim() {
            return Err(Error::Dimension("generators have different sizes".into()));
        }
        acc = &acc * v;
    }
    Ok(acc)
}

/// Values that can be differenced and extrapolated.
pub trait Extrapolate: Clone + Send + Sync {
    fn distance(&self, other: &Self) -> f64;
    /// `self + (self - coarse) * factor`.
    fn extrapolate(&self, coarse: &Self, factor: f64) -> Self;
}

impl Extrapolate for f64 {
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
    fn extrapolate(&self, coarse: &Self, factor: f64) -> Self {
        self + (self - coarse) * factor
    }
}

impl Extrapolate for Complex64 {
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
    fn extrapolate(&self, coarse: &Self, factor: f64) -> Self {
        self + (self - coarse) * factor
    }
}

impl Extrapolate for AlgebraElement {
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
    fn extrapolate(&self, coarse: &Self, factor: f64) -> Self {
        self + &(&(self - coarse) * factor)
    }
}

impl Extrapolate for GroupElement {
    fn distance(&self, other: &Self) -> f64 {
        group_distance(self, other)
    }
    fn extrapolate(&self, coarse: &Self, factor: f64) -> Self {
        let (f, c) = (self.matrix(), coarse.matrix());
        GroupElement::from_matrix_unchecked(f + (f - c) * Complex64::new(factor, 0.0))
    }
}

/// Values at increasing resolutions and what they say about the limit.
#[derive(Clone, Debug)]
pub struct ConvergenceReport<V> {
    pub levels: Vec<(usize, V)>,
    /// Distance of each level's value from the finest one.
    pub residuals: Vec<f64>,
    /// From the last three levels; infinite when the last two agree exactly.
    pub estimated_order: f64,
    pub saturated: bool,
    pub extrapolant: V,
}

impl<V: Extrapolate> ConvergenceReport<V> {
    /// Distance of each level's value from `exact`.
    pub fn errors_against(&self, exact: &V) -> Vec<f64> {
        self.levels.iter().map(|(_, v)| v.distance(exact)).collect()
    }

    /// Differences between consecutive levels.
    pub fn successive_differences(&self) -> Vec<f64> {
        self.levels.windows(2).map(|w| w[1].1.distance(&w[0].1)).collect()
    }
}

/// Evaluates `f` at each resolution (concurrently when enabled) and reports
/// the observed order and a Richardson extrapolant.
pub fn refine<V, F>(f: F, levels: &[usize]) -> Result<ConvergenceReport<V>>
where
    V: Extrapolate,
    F: Fn(usize) -> Result<V> + Sync + Send,
{
    if levels.len() < 3 {
        return Err(Error::InvalidArgument("refinement needs at least three levels".into()));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) || levels[0] == 0 {
        return Err(Error::InvalidArgument(format!(
            "refinement levels must be positive and strictly increasing, got {levels:?}"
        )));
    }
    let values = ordered_map(levels.len(), |k| f(levels[k]))?;
    let last = values.len() - 1;
    let residuals = values.iter().map(|v| v.distance(&values[last])).collect();
    let (v1, v2, v3) = (&values[last - 2], &values[last - 1], &values[last]);
    let (d12, d23) = (v1.distance(v2), v2.distance(v3));
    let (n1, n2, n3) = (levels[last - 2] as f64, levels[last - 1] as f64, levels[last] as f64);
    let (estimated_order, saturated, extrapolant) = if d23 == 0.0 {
        (f64::INFINITY, true, v3.clone())
    } else {
        let p = (d12 / d23).ln() / (n2 / n1).ln();
        let r = n3 / n2;
        let extrapolant = if p.is_finite() && p > 0.0 {
            v3.extrapolate(v2, 1.0 / (r.powf(p) - 1.0))
        } else {
            v3.clone()
        };
        (p, false, extrapolant)
    };
    Ok(ConvergenceReport {
        levels: levels.iter().copied().zip(values).collect(),
        residuals,
        estimated_order,
        saturated,
        extrapolant,
    })
}

/// Distance between the holonomies along two paths with common endpoints.
pub fn homotopy_invariance_check<C1, C2>(a: &ConnectionForm, gamma1: &C1, gamma2: &C2, n: usize) -> Result<f64>
where
    C1: Curve + ?Sized,
    C2: Curve + ?Sized,
{
    for t in [0.0, 1.0] {
        let (p, q) = (gamma1.point(t)?, gamma2.point(t)?);
        let gap = p.iter().zip(&q).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        if p.len() != q.len() || gap > crate::lattice::ENDPOINT_TOL {
            return Err(Error::InvalidArgument(format!(
                "paths do not share their endpoint at t = {t} (gap {gap:e})"
            )));
        }
    }
    let h1 = path_holonomy(a, gamma1, n)?;
    let h2 = path_holonomy(a, gamma2, n)?;
    Ok(group_distance(&h1, &h2))
}
