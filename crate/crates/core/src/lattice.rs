//! Paths, homotopies and their lattice approximations.
//!
//! Parameter conventions: a path is `t -> x(t)`, `t in [0, 1]`. A homotopy
//! `h(t1, t2)` is read as the family of paths `gamma_{t2} = h(., t2)`, so
//! `gamma(0)` and `gamma(1)` are its bottom and top edges. A flagged
//! homotopy keeps its left and right edges fixed at `sigma0 = h(0, .)` and
//! `sigma1 = h(1, .)`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::formlang::{parse, ScalarExpr};

/// Endpoint agreement required of flags and closed loops.
pub const ENDPOINT_TOL: f64 = 1e-9;

/// A parametrized curve in an `m`-dimensional chart.
pub trait Curve: Sync {
    fn dim(&self) -> usize;
    fn point(&self, t: f64) -> Result<Vec<f64>>;
}

/// A two-parameter map into an `m`-dimensional chart.
pub trait Sweep: Sync {
    fn dim(&self) -> usize;
    fn point(&self, t1: f64, t2: f64) -> Result<Vec<f64>>;
}

fn eval_coords(coords: &[ScalarExpr], params: &[f64]) -> Result<Vec<f64>> {
    coords
        .iter()
        .map(|e| {
            let z = e.eval_real(params).map_err(|err| crate::Error::eval(err, params))?;
            if z.im != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "coordinate `{e}` is not real at parameters {params:?} (imaginary part {:e})",
                    z.im
                )));
            }
            Ok(z.re)
        })
        .collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// An expression-backed path with coordinates in the single variable `x1 = t`.
#[derive(Clone, Debug)]
pub struct PathSpec {
    coords: Vec<ScalarExpr>,
    start: Vec<f64>,
    end: Vec<f64>,
}

impl PathSpec {
    pub fn new(coords: Vec<ScalarExpr>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Dimension("path needs at least one coordinate".into()));
        }
        if let Some(e) = coords.iter().find(|e| e.arity() != 1) {
            return Err(Error::Dimension(format!(
                "path coordinate `{e}` has arity {}, expected 1",
                e.arity()
            )));
        }
        let start = eval_coords(&coords, &[0.0])?;
        let end = eval_coords(&coords, &[1.0])?;
        Ok(Self { coords, start, end })
    }

    /// Coordinates as expressions in `t`, written `t` or `x1`.
    pub fn parse<S: AsRef<str>>(coords: &[S]) -> Result<Self> {
        let exprs = coords
            .iter()
            .map(|s| parse(&substitute_t(s.as_ref()), 1))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(exprs)
    }

    /// Straight segment from `a` to `b`.
    pub fn segment(a: &[f64], b: &[f64]) -> Self {
        assert_eq!(a.len(), b.len());
        let t = ScalarExpr::var(0, 1);
        let coords = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| ScalarExpr::real(x, 1).add(&ScalarExpr::real(y - x, 1).mul(&t)))
            .collect();
        Self::new(coords).expect("affine coordinates are finite")
    }

    pub fn coords(&self) -> &[ScalarExpr] {
        &self.coords
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn end(&self) -> &[f64] {
        &self.end
    }

    pub fn is_closed(&self) -> bool {
        distance(&self.start, &self.end) <= ENDPOINT_TOL
    }
}

impl Curve for PathSpec {
    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn point(&self, t: f64) -> Result<Vec<f64>> {
        eval_coords(&self.coords, &[t])
    }
}

/// Replaces the identifiers `t`, `t1`, `t2` by `x1`, `x1`, `x2`, leaving
/// longer identifiers such as `sqrt` alone.
pub(crate) fn substitute_t(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if c.is_ascii_alphabetic() || c == '_' {
            let len = rest
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                .unwrap_or(rest.len());
            out.push_str(match &rest[..len] {
                "t" | "t1" => "x1",
                "t2" => "x2",
                word => word,
            });
            rest = &rest[len..];
        } else {
            out.push(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    out
}

/// An expression-backed homotopy with coordinates in `x1 = t1`, `x2 = t2`.
#[derive(Clone, Debug)]
pub struct HomotopySpec {
    coords: Vec<ScalarExpr>,
}

impl HomotopySpec {
    pub fn new(coords: Vec<ScalarExpr>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Dimension("homotopy needs at least one coordinate".into()));
        }
        if let Some(e) = coords.iter().find(|e| e.arity() != 2) {
            return Err(Error::Dimension(format!(
                "homotopy coordinate `{e}` has arity {}, expected 2",
                e.arity()
            )));
        }
        Ok(Self { coords })
    }

    /// Coordinates as expressions in `t1, t2` (or `x1, x2`).
    pub fn parse<S: AsRef<str>>(coords: &[S]) -> Result<Self> {
        let exprs = coords
            .iter()
            .map(|s| parse(&substitute_t(s.as_ref()), 2))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(exprs)
    }

    /// `gamma(t2) = h(., t2)`.
    pub fn path_at(&self, t2: f64) -> Result<PathSpec> {
        PathSpec::new(self.coords.iter().map(|e| e.restrict(1, t2)).collect())
    }

    /// `h(t1, .)`.
    pub fn side_at(&self, t1: f64) -> Result<PathSpec> {
        PathSpec::new(self.coords.iter().map(|e| e.restrict(0, t1)).collect())
    }

    /// Checks that both sides are constant and returns the flag data.
    pub fn flagging(&self) -> Result<Flagging> {
        let lower = self.path_at(0.0)?;
        let upper = self.path_at(1.0)?;
        let flag = Flagging::new(lower, upper)?;
        for (t1, corner) in [(0.0, &flag.sigma0), (1.0, &flag.sigma1)] {
            for k in 0..=16 {
                let p = self.point(t1, k as f64 / 16.0)?;
                let gap = distance(&p, corner);
                if gap > ENDPOINT_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "homotopy side t1 = {t1} moves by {gap:e}; a flagged homotopy keeps it fixed"
                    )));
                }
            }
        }
        Ok(flag)
    }
}

impl Sweep for HomotopySpec {
    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn point(&self, t1: f64, t2: f64) -> Result<Vec<f64>> {
        eval_coords(&self.coords, &[t1, t2])
    }
}

/// Boundary data of a flagged 2-disk: two corners joined by two paths.
#[derive(Clone, Debug)]
pub struct Flagging {
    pub sigma0: Vec<f64>,
    pub sigma1: Vec<f64>,
    pub lower: PathSpec,
    pub upper: PathSpec,
}

impl Flagging {
    pub fn new(lower: PathSpec, upper: PathSpec) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::Dimension("flag paths live in different charts".into()));
        }
        for (what, a, b) in [
            ("start", lower.start(), upper.start()),
            ("end", lower.end(), upper.end()),
        ] {
            let gap = distance(a, b);
            if gap > ENDPOINT_TOL {
                return Err(Error::InvalidArgument(format!(
                    "flag paths differ at their {what} by {gap:e}"
                )));
            }
        }
        Ok(Self {
            sigma0: lower.start().to_vec(),
            sigma1: lower.end().to_vec(),
            lower,
            upper,
        })
    }
}

/// A [`Sweep`] read along one value of `t2`.
pub struct SweepRow<'a, S: ?Sized> {
    pub sweep: &'a S,
    pub t2: f64,
}

impl<S: Sweep + ?Sized> Curve for SweepRow<'_, S> {
    fn dim(&self) -> usize {
        self.sweep.dim()
    }

    fn point(&self, t: f64) -> Result<Vec<f64>> {
        self.sweep.point(t, self.t2)
    }
}

/// Straight segment without expression overhead.
#[derive(Clone, Debug)]
pub struct Segment {
    pub from: Vec<f64>,
    pub to: Vec<f64>,
}

impl Curve for Segment {
    fn dim(&self) -> usize {
        self.from.len()
    }

    fn point(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.from.iter().zip(&self.to).map(|(a, b)| a + t * (b - a)).collect())
    }
}

/// One step of a sampled path.
#[derive(Clone, Debug, PartialEq)]
pub struct PathStep {
    pub midpoint: Vec<f64>,
    pub start: Vec<f64>,
    pub delta: Vec<f64>,
}

/// Uniform partition of `[0, 1]` into `n` segments; each step carries the
/// point at its parameter midpoint, its starting point and its
/// displacement.
pub fn sample_path<C: Curve + ?Sized>(gamma: &C, n: usize) -> Result<Vec<PathStep>> {
    if n == 0 {
        return Err(Error::InvalidArgument("path needs at least one segment".into()));
    }
    let mut steps = Vec::with_capacity(n);
    let mut prev = gamma.point(0.0)?;
    for i in 0..n {
        let next = gamma.point((i + 1) as f64 / n as f64)?;
        let midpoint = gamma.point((i as f64 + 0.5) / n as f64)?;
        let delta = next.iter().zip(&prev).map(|(b, a)| b - a).collect();
        steps.push(PathStep {
            midpoint,
            start: std::mem::replace(&mut prev, next),
            delta,
        });
    }
    Ok(steps)
}

/// Lattice approximation of a swept disk.
///
/// Vertex `(a, b)` sits at parameters `(a / n1, b / n2)`. Alongside vertices
/// the lattice stores the images of the midpoints of row edges and of cell
/// centres.
#[derive(Clone, Debug)]
pub struct Lattice2d {
    pub n1: usize,
    pub n2: usize,
    vertices: Vec<Vec<f64>>,
    row_midpoints: Vec<Vec<f64>>,
    centers: Vec<Vec<f64>>,
}

/// One cell of a [`Lattice2d`].
#[derive(Clone, Debug)]
pub struct Cell<'a> {
    /// `(a, b)`, `(a+1, b)`, `(a+1, b+1)`, `(a, b+1)`.
    pub vertices: [&'a [f64]; 4],
    /// Edge vectors out of the lowest vertex along `t1` and `t2`.
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub center: &'a [f64],
}

pub fn lattice_2d<S: Sweep + ?Sized>(h: &S, n1: usize, n2: usize) -> Result<Lattice2d> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidArgument(
            "lattice needs at least one cell per direction".into(),
        ));
    }
    let (f1, f2) = (n1 as f64, n2 as f64);
    let mut vertices = Vec::with_capacity((n1 + 1) * (n2 + 1));
    for b in 0..=n2 {
        for a in 0..=n1 {
            vertices.push(h.point(a as f64 / f1, b as f64 / f2)?);
        }
    }
    let mut row_midpoints = Vec::with_capacity(n1 * (n2 + 1));
    for b in 0..=n2 {
        for a in 0..n1 {
            row_midpoints.push(h.point((a as f64 + 0.5) / f1, b as f64 / f2)?);
        }
    }
    let mut centers = Vec::with_capacity(n1 * n2);
    for b in 0..n2 {
        for a in 0..n1 {
            centers.push(h.point((a as f64 + 0.5) / f1, (b as f64 + 0.5) / f2)?);
        }
    }
    Ok(Lattice2d {
        n1,
        n2,
        vertices,
        row_midpoints,
        centers,
    })
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl Lattice2d {
    pub fn vertex(&self, a: usize, b: usize) -> &[f64] {
        &self.vertices[b * (self.n1 + 1) + a]
    }

    /// Image of the midpoint of the row edge from `(a, b)` to `(a+1, b)`.
    pub fn row_midpoint(&self, a: usize, b: usize) -> &[f64] {
        &self.row_midpoints[b * self.n1 + a]
    }

    pub fn cell(&self, a: usize, b: usize) -> Cell<'_> {
        assert!(a < self.n1 && b < self.n2);
        let v0 = self.vertex(a, b);
        let v1 = self.vertex(a + 1, b);
        let v2 = self.vertex(a + 1, b + 1);
        let v3 = self.vertex(a, b + 1);
        Cell {
            vertices: [v0, v1, v2, v3],
            e1: sub(v1, v0),
            e2: sub(v3, v0),
            center: &self.centers[b * self.n1 + a],
        }
    }
}

/// Position of one cube coordinate in a cell name such as `e1*0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Zero,
    One,
    Free,
}

/// A cell of the unit 3-cube, named by its coordinate slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CubeCell(pub [Slot; 3]);

impl CubeCell {
    pub fn dimension(&self) -> usize {
        self.0.iter().filter(|s| **s == Slot::Free).count()
    }

    /// Codimension-one faces of this cell.
    pub fn boundary(&self) -> Vec<CubeCell> {
        let mut out = Vec::new();
        for (k, s) in self.0.iter().enumerate() {
            if *s == Slot::Free {
                for fixed in [Slot::Zero, Slot::One] {
                    let mut slots = self.0;
                    slots[k] = fixed;
                    out.push(CubeCell(slots));
                }
            }
        }
        out
    }

    pub fn all_of_dimension(d: usize) -> Vec<CubeCell> {
        let slots = [Slot::Zero, Slot::One, Slot::Free];
        let mut out = Vec::new();
        for a in slots {
            for b in slots {
                for c in slots {
                    let cell = CubeCell([a, b, c]);
                    if cell.dimension() == d {
                        out.push(cell);
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for CubeCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ['v', 'e', 'f', 'c'][self.dimension()];
        write!(f, "{prefix}")?;
        for s in self.0 {
            let ch = match s {
                Slot::Zero => '0',
                Slot::One => '1',
                Slot::Free => '*',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl FromStr for CubeCell {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("`{s}` is not a cube cell name"));
        let mut chars = s.chars();
        let prefix = chars.next().ok_or_else(bad)?;
        let mut slots = [Slot::Zero; 3];
        for slot in &mut slots {
            *slot = match chars.next().ok_or_else(bad)? {
                '0' => Slot::Zero,
                '1' => Slot::One,
                '*' => Slot::Free,
                _ => return Err(bad()),
            };
        }
        let cell = CubeCell(slots);
        if chars.next().is_some() || ['v', 'e', 'f', 'c'].get(cell.dimension()) != Some(&prefix) {
            return Err(bad());
        }
        Ok(cell)
    }
}

/// Cells of the flagged 3-disk.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlagCell {
    Sigma0,
    Sigma1,
    Sigma0Edge,
    Sigma1Edge,
    Sigma0Face,
    Sigma1Face,
}

#[derive(Clone, Debug, PartialEq)]
pub enum KappaTable {
    /// `d = 3`: each listed cube cell and its image.
    Cells(Vec<(CubeCell, FlagCell)>),
    /// `d = 2`: chains of edges sweeping from the lower to the upper
    /// boundary path of one flag face, and the face crossed at each step.
    Chains {
        chains: Vec<Vec<CubeCell>>,
        steps: Vec<CubeCell>,
    },
}

fn cells(names: &[&str]) -> Vec<CubeCell> {
    names.iter().map(|s| s.parse().expect("static cell name")).collect()
}

/// The cellular map from a cube onto a flagged disk, as a table (`d = 3`)
/// or as a sweeping sequence of chains (`d = 2`).
pub fn kappa_tables(d: usize) -> Result<KappaTable> {
    match d {
        3 => {
            let groups: [(&[&str], FlagCell); 6] = [
                (&["v000"], FlagCell::Sigma0),
                (&["v111"], FlagCell::Sigma1),
                (&["e*00", "e10*", "e1*1"], FlagCell::Sigma0Edge),
                (&["e*11", "e01*", "e0*0"], FlagCell::Sigma1Edge),
                (&["f**0", "f1**", "f*1*"], FlagCell::Sigma0Face),
                (&["f**1", "f0**", "f*0*"], FlagCell::Sigma1Face),
            ];
            Ok(KappaTable::Cells(
                groups
                    .iter()
                    .flat_map(|(names, image)| cells(names).into_iter().map(move |c| (c, *image)))
                    .collect(),
            ))
        }
        2 => {
            let chains: Vec<Vec<CubeCell>> = [
                ["e*00", "e10*", "e1*1"],
                ["e*00", "e1*0", "e11*"],
                ["e0*0", "e*10", "e11*"],
                ["e0*0", "e01*", "e*11"],
            ]
            .iter()
            .map(|c| cells(c))
            .collect();
            let steps = chains
                .windows(2)
                .map(|w| swept_face(&w[0], &w[1]).expect("consecutive chains differ by one face"))
                .collect();
            Ok(KappaTable::Chains { chains, steps })
        }
        _ => Err(Error::InvalidArgument(format!(
            "kappa tables exist for d = 2 and d = 3, not {d}"
        ))),
    }
}

/// The unique 2-face whose boundary is the symmetric difference of two
/// edge chains, if there is one.
pub fn swept_face(from: &[CubeCell], to: &[CubeCell]) -> Option<CubeCell> {
    let a: BTreeSet<_> = from.iter().copied().collect();
    let b: BTreeSet<_> = to.iter().copied().collect();
    let diff: BTreeSet<_> = a.symmetric_difference(&b).copied().collect();
    CubeCell::all_of_dimension(2)
        .into_iter()
        .find(|f| f.boundary().into_iter().collect::<BTreeSet<_>>() == diff)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryKind {
    Face,
    Edge,
}

/// One entry of a cube boundary sequence.
///
/// A face entry is a loop based at `start` that runs around the face
/// spanned by `p` and `q`: first along `q`, then `p`, then back. It carries
/// the face's `orientation` relative to the outward normal. An edge entry
/// runs straight from `start` to `end`.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceEntry {
    pub cell: CubeCell,
    pub kind: EntryKind,
    pub orientation: i8,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

/// Ordered boundary of a small cube: faces interleaved with connecting edges.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceSequence {
    pub entries: Vec<FaceEntry>,
    /// `true` when every entry is traversed backwards and in reverse order.
    pub reversed: bool,
}

impl FaceSequence {
    pub fn reversed(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .rev()
            .map(|e| {
                let mut e = e.clone();
                e.orientation = -e.orientation;
                std::mem::swap(&mut e.start, &mut e.end);
                e
            })
            .collect();
        Self {
            entries,
            reversed: !self.reversed,
        }
    }

    /// True when each entry starts where the previous one ended.
    pub fn is_composable(&self) -> bool {
        self.entries.windows(2).all(|w| w[0].end == w[1].start)
            && self.entries.first().map(|e| &e.start) == self.entries.last().map(|e| &e.end)
    }
}

/// The twelve-entry boundary sequence of the cube with side `eps` along
/// `axes = (u, v, w)`, anchored at `center - eps/2` in those axes.
pub fn cube_boundary_sequence_d2(center: &[f64], eps: f64, axes: (usize, usize, usize)) -> Result<FaceSequence> {
    let m = center.len();
    let (iu, iv, iw) = axes;
    if iu >= m || iv >= m || iw >= m {
        return Err(Error::Dimension(format!(
            "cube axes {axes:?} outside a {m}-dimensional chart"
        )));
    }
    if iu == iv || iv == iw || iu == iw {
        return Err(Error::InvalidArgument(format!("cube axes {axes:?} are not distinct")));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!("cube side must be positive, got {eps}")));
    }
    let mut origin = center.to_vec();
    for k in [iu, iv, iw] {
        origin[k] -= eps / 2.0;
    }
    let axis = |k: usize| {
        let mut e = vec![0.0; m];
        e[k] = eps;
        e
    };
    let (u, v, w) = (axis(iu), axis(iv), axis(iw));
    let at = |offset: &[f64]| -> Vec<f64> { origin.iter().zip(offset).map(|(a, b)| a + b).collect() };
    let zero = vec![0.0; m];

    let face = |name: &str, corner: &[f64], p: &[f64], q: &[f64], orientation: i8| FaceEntry {
        cell: name.parse().expect("static cell name"),
        kind: EntryKind::Face,
        orientation,
        start: at(corner),
        end: at(corner),
        p: p.to_vec(),
        q: q.to_vec(),
    };
    let edge = |name: &str, from: &[f64], to: &[f64]| FaceEntry {
        cell: name.parse().expect("static cell name"),
        kind: EntryKind::Edge,
        orientation: 1,
        start: at(from),
        end: at(to),
        p: sub(to, from),
        q: vec![0.0; m],
    };

    let entries = vec![
        face("f**0", &zero, &u, &v, -1),
        edge("e*00", &zero, &u),
        face("f1**", &u, &v, &w, 1),
        edge("e*00", &u, &zero),
        face("f*0*", &zero, &u, &w, 1),
        edge("e00*", &zero, &w),
        face("f**1", &w, &u, &v, 1),
        edge("e00*", &w, &zero),
        face("f0**", &zero, &v, &w, -1),
        edge("e0*0", &zero, &v),
        face("f*1*", &v, &u, &w, -1),
        edge("e0*0", &v, &zero),
    ];
    Ok(FaceSequence {
        entries,
        reversed: false,
    })
}

/// The piecewise-linear sweep across the parallelogram at `s` spanned by
/// `p` and `q`: from the path `p` then `q` (at `t2 = 0`) to the path `q`
/// then `p` (at `t2 = 1`), with both corners fixed.
#[derive(Clone, Debug)]
pub struct FaceSweep {
    pub s: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl Sweep for FaceSweep {
    fn dim(&self) -> usize {
        self.s.len()
    }

    fn point(&self, t1: f64, t2: f64) -> Result<Vec<f64>> {
        let bend = t1.min(1.0 - t1) * (1.0 - 2.0 * t2);
        Ok((0..self.s.len())
            .map(|k| self.s[k] + t1 * (self.p[k] + self.q[k]) + bend * (self.p[k] - self.q[k]))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_segment_steps() {
        let g = PathSpec::parse(&["t"]).unwrap();
        let steps = sample_path(&g, 4).unwrap();
        assert_eq!(steps.len(), 4);
        for s in &steps {
            assert_eq!(s.delta, vec![0.25]);
        }
        assert_eq!(steps[1].midpoint, vec![0.375]);
    }

    #[test]
    fn circle_closes_and_displacements_telescope() {
        let g = PathSpec::parse(&["cos(2*pi*t)", "sin(2*pi*t)"]).unwrap();
        assert!(distance(g.start(), g.end()) <= 1e-12);
        assert!(g.is_closed());
        let arc = PathSpec::parse(&["t^2", "exp(t)"]).unwrap();
        let steps = sample_path(&arc, 7).unwrap();
        for k in 0..2 {
            let total: f64 = steps.iter().map(|s| s.delta[k]).sum();
            assert!((total - (arc.end()[k] - arc.start()[k])).abs() < 1e-15);
        }
    }

    #[test]
    fn t_substitution_leaves_functions_alone() {
        assert_eq!(substitute_t("sqrt(t) + t2*t1"), "sqrt(x1) + x2*x1");
        assert!(PathSpec::parse(&["y"]).is_err());
    }

    #[test]
    fn affine_lattice_cells_are_congruent() {
        let h = HomotopySpec::parse(&["2*t1 + t2", "t2 - t1"]).unwrap();
        let lat = lattice_2d(&h, 3, 2).unwrap();
        let c0 = lat.cell(0, 0);
        for a in 0..3 {
            for b in 0..2 {
                let c = lat.cell(a, b);
                assert!(distance(&c.e1, &c0.e1) < 1e-15 && distance(&c.e2, &c0.e2) < 1e-15);
            }
        }
        assert_eq!(lat.vertex(2, 1), h.point(2.0 / 3.0, 0.5).unwrap().as_slice());
    }

    #[test]
    fn degenerate_lattice_has_zero_area() {
        let h = HomotopySpec::parse(&["t1", "t1^2"]).unwrap();
        let lat = lattice_2d(&h, 4, 4).unwrap();
        let c = lat.cell(1, 2);
        assert_eq!(c.e2, vec![0.0, 0.0]);
    }

    #[test]
    fn lattice_refinement_nests() {
        let h = HomotopySpec::parse(&["t1 + 0.3*sin(pi*t1)*t2", "t2*cos(t1)"]).unwrap();
        let coarse = lattice_2d(&h, 5, 3).unwrap();
        let fine = lattice_2d(&h, 10, 6).unwrap();
        for a in 0..=5 {
            for b in 0..=3 {
                assert_eq!(coarse.vertex(a, b), fine.vertex(2 * a, 2 * b));
            }
        }
    }

    #[test]
    fn flagging_requires_fixed_sides() {
        let good = HomotopySpec::parse(&["t1", "sin(pi*t1)*(2*t2 - 1)"]).unwrap();
        let flag = good.flagging().unwrap();
        assert_eq!(flag.sigma0, vec![0.0, 0.0]);
        assert!(distance(&flag.sigma1, &[1.0, 0.0]) < 1e-15);
        let bad = HomotopySpec::parse(&["t1", "t2"]).unwrap();
        assert!(bad.flagging().is_err());
    }

    #[test]
    fn cube_sequence_structure() {
        let seq = cube_boundary_sequence_d2(&[0.1, 0.2, 0.3, 0.0], 0.25, (0, 1, 2)).unwrap();
        assert_eq!(seq.entries.len(), 12);
        for (k, e) in seq.entries.iter().enumerate() {
            let expected = if k % 2 == 0 { EntryKind::Face } else { EntryKind::Edge };
            assert_eq!(e.kind, expected);
        }
        assert!(seq.is_composable());
        assert_eq!(seq.entries[0].start, vec![0.1 - 0.125, 0.2 - 0.125, 0.3 - 0.125, 0.0]);
        let back = seq.reversed();
        assert!(back.is_composable());
        assert_eq!(back.entries[0].cell, seq.entries[11].cell);
        assert_eq!(back.reversed(), seq);
        assert!(cube_boundary_sequence_d2(&[0.0; 3], 0.1, (0, 1, 3)).is_err());
        assert!(cube_boundary_sequence_d2(&[0.0; 3], 0.1, (0, 1, 1)).is_err());
    }

    #[test]
    fn every_cube_face_appears_once_with_outward_orientation() {
        let seq = cube_boundary_sequence_d2(&[0.0; 3], 1.0, (0, 1, 2)).unwrap();
        let faces: Vec<_> = seq.entries.iter().filter(|e| e.kind == EntryKind::Face).collect();
        let names: BTreeSet<_> = faces.iter().map(|e| e.cell).collect();
        assert_eq!(names.len(), 6);
        for f in faces {
            // outward normal of the face, compared with p x q
            let centre: Vec<f64> = (0..3).map(|k| f.start[k] + 0.5 * (f.p[k] + f.q[k])).collect();
            let normal: Vec<f64> = centre
                .iter()
                .map(|x| x.signum() * (x.abs() > 0.25) as i32 as f64)
                .collect();
            let cross = [
                f.p[1] * f.q[2] - f.p[2] * f.q[1],
                f.p[2] * f.q[0] - f.p[0] * f.q[2],
                f.p[0] * f.q[1] - f.p[1] * f.q[0],
            ];
            let dot: f64 = cross.iter().zip(&normal).map(|(a, b)| a * b).sum();
            assert_eq!(dot.signum() as i8, f.orientation, "{}", f.cell);
        }
    }

    #[test]
    fn kappa_d3_table() {
        let KappaTable::Cells(table) = kappa_tables(3).unwrap() else {
            panic!()
        };
        let image = |name: &str| {
            let c: CubeCell = name.parse().unwrap();
            table.iter().find(|(k, _)| *k == c).map(|(_, v)| *v)
        };
        for name in ["e*00", "e10*", "e1*1"] {
            assert_eq!(image(name), Some(FlagCell::Sigma0Edge));
        }
        let faces: Vec<_> = table
            .iter()
            .filter(|(c, _)| c.dimension() == 2)
            .map(|(c, _)| *c)
            .collect();
        assert_eq!(faces.len(), 6);
        let unique: BTreeSet<_> = faces.iter().collect();
        assert_eq!(unique.len(), 6);
        assert_eq!(unique.len(), CubeCell::all_of_dimension(2).len());
    }

    #[test]
    fn kappa_d3_images_cover_the_boundary() {
        let KappaTable::Cells(table) = kappa_tables(3).unwrap() else {
            panic!()
        };
        let face = |img| -> BTreeSet<CubeCell> { table.iter().filter(|(_, i)| *i == img).map(|(c, _)| *c).collect() };
        let lower = face(FlagCell::Sigma0Face);
        let upper = face(FlagCell::Sigma1Face);
        assert!(lower.is_disjoint(&upper));
        // the two hemispheres meet along the six edges of the flag's equator
        let edges = |s: &BTreeSet<CubeCell>| -> BTreeSet<CubeCell> { s.iter().flat_map(|f| f.boundary()).collect() };
        let shared: BTreeSet<_> = edges(&lower).intersection(&edges(&upper)).copied().collect();
        let equator: BTreeSet<_> = table
            .iter()
            .filter(|(_, i)| matches!(i, FlagCell::Sigma0Edge | FlagCell::Sigma1Edge))
            .map(|(c, _)| *c)
            .collect();
        assert_eq!(shared, equator);
    }

    #[test]
    fn kappa_d2_chains() {
        let KappaTable::Chains { chains, steps } = kappa_tables(2).unwrap() else {
            panic!()
        };
        assert_eq!(chains.len(), 4);
        let names: Vec<String> = steps.iter().map(|c| c.to_string()).collect();
        assert_eq!(names, ["f1**", "f**0", "f*1*"]);
        assert!(kappa_tables(4).is_err());
    }

    #[test]
    fn cell_names_round_trip() {
        for d in 0..=3 {
            for c in CubeCell::all_of_dimension(d) {
                assert_eq!(c.to_string().parse::<CubeCell>().unwrap(), c);
            }
        }
        assert!("e000".parse::<CubeCell>().is_err());
        assert!("f*0".parse::<CubeCell>().is_err());
    }

    #[test]
    fn face_sweep_boundaries() {
        let fs = FaceSweep {
            s: vec![0.0, 0.0],
            p: vec![1.0, 0.0],
            q: vec![0.0, 1.0],
        };
        assert_eq!(fs.point(0.5, 0.0).unwrap(), vec![1.0, 0.0]);
        assert_eq!(fs.point(0.5, 1.0).unwrap(), vec![0.0, 1.0]);
        assert_eq!(fs.point(0.0, 0.3).unwrap(), vec![0.0, 0.0]);
        assert_eq!(fs.point(1.0, 0.7).unwrap(), vec![1.0, 1.0]);
    }
}
