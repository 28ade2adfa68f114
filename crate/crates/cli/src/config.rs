//! JSON experiment definitions and their translation into library objects.
//!
//! Matrices are arrays of rows of expression strings. Constants (expected
//! values, word generators, `alpha`) use the same language with no
//! variables, so `"exp(2*pi*i*0.3)"` is a valid entry.

use std::collections::BTreeMap;

use flagint::algebra::{AlgebraElement, GroupElement};
use flagint::formlang::parse;
use flagint::forms::{
    gauge_transform_connection, preset_alpha_connection, preset_cr_connection, random_polynomial_connection,
    random_polynomial_gauge, ConnectionForm, ExprMatrix, FormFlag, GaugeFunction, TwoForm,
};
use flagint::lattice::{HomotopySpec, PathSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use schemars::JsonSchema;
use serde::Deserialize;

use crate::Failure;

pub type Matrix = Vec<Vec<String>>;

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    IntegratePath(IntegratePath),
    IntegrateSurface(IntegrateSurface),
    CurvatureEstimate(CurvatureEstimate),
    CheckFlat(CheckFlat),
    CheckBianchi(CheckBianchi),
    CubeBoundary(CubeBoundary),
    Monodromy(Monodromy),
    Word(WordExperiment),
    DiscrepancyS1(DiscrepancyS1),
    AlphaClass(AlphaClassExperiment),
    Converge(Converge),
}

impl ExperimentConfig {
    pub fn description(&self) -> Option<&str> {
        match self {
            Self::IntegratePath(c) => c.description.as_deref(),
            Self::IntegrateSurface(c) => c.description.as_deref(),
            Self::CurvatureEstimate(c) => c.description.as_deref(),
            Self::CheckFlat(c) => c.description.as_deref(),
            Self::CheckBianchi(c) => c.description.as_deref(),
            Self::CubeBoundary(c) => c.description.as_deref(),
            Self::Monodromy(c) => c.description.as_deref(),
            Self::Word(c) => c.description.as_deref(),
            Self::DiscrepancyS1(c) => c.description.as_deref(),
            Self::AlphaClass(c) => c.description.as_deref(),
            Self::Converge(c) => c.description.as_deref(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConnectionSpec {
    /// One matrix per coordinate, entries in `x1..xm`.
    Expr { components: Vec<Matrix> },
    /// `alpha dz / z` on the punctured plane.
    Alpha { alpha: String },
    /// The Cauchy-Riemann connection of `f(x1, x2)`.
    CauchyRiemann { f: String },
    RandomPolynomial {
        seed: u64,
        dim: usize,
        n: usize,
        degree: u32,
        scale: f64,
    },
    /// `g(base)`.
    Gauge {
        gauge: GaugeSpec,
        base: Box<ConnectionSpec>,
    },
}

#[derive(Clone, Debug, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GaugeSpec {
    Expr {
        dim: usize,
        entries: Matrix,
    },
    RandomPolynomial {
        seed: u64,
        dim: usize,
        n: usize,
        scale: f64,
    },
}

#[derive(Clone, Debug, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct TwoFormComponent {
    /// 1-based axes.
    pub i: usize,
    pub j: usize,
    pub matrix: Matrix,
}

#[derive(Clone, Debug, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FlagSpec {
    /// `(F(A), A)`.
    Curvature { connection: ConnectionSpec },
    /// `(w, A)` with `w` given componentwise; missing components are zero.
    Explicit {
        dim: usize,
        n: usize,
        top: Vec<TwoFormComponent>,
        connection: ConnectionSpec,
    },
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    Midpoint,
    LeftEndpoint,
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PathCheck {
    /// Distance to a known value.
    Expected { value: Matrix, tolerance: f64 },
    /// `Hol_{g(A)} = g(end) Hol_A g(start)^-1`.
    GaugeCovariance { gauge: GaugeSpec, tolerance: f64 },
    /// Distance to the holonomy along another path with the same ends.
    OtherPath {
        path: Vec<String>,
        #[serde(default)]
        expected_distance: f64,
        tolerance: f64,
    },
    /// Product of the holonomies along two pieces of the path.
    Split {
        first: Vec<String>,
        second: Vec<String>,
        n_first: usize,
        n_second: usize,
        tolerance: f64,
    },
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct IntegratePath {
    pub description: Option<String>,
    pub connection: ConnectionSpec,
    /// Coordinates in `t`.
    pub path: Vec<String>,
    pub n: usize,
    pub quadrature: Option<Quadrature>,
    #[serde(default)]
    pub checks: Vec<PathCheck>,
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SurfaceCheck {
    Expected {
        value: Matrix,
        tolerance: f64,
    },
    /// `Hol(gamma(1)) Hol(gamma(0))^-1` at `reference_n` segments.
    Boundary {
        reference_n: usize,
        tolerance: f64,
    },
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct IntegrateSurface {
    pub description: Option<String>,
    pub flag: FlagSpec,
    /// Coordinates in `t1, t2`.
    pub homotopy: Vec<String>,
    pub n1: usize,
    pub n2: usize,
    #[serde(default)]
    pub checks: Vec<SurfaceCheck>,
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CurvatureEstimate {
    pub description: Option<String>,
    pub connection: ConnectionSpec,
    pub point: Vec<f64>,
    /// 1-based plane axes.
    pub axes: [usize; 2],
    pub eps: f64,
    /// Segments per side of the square.
    pub n: usize,
    /// Divisors `k` of `eps` for Richardson extrapolation.
    pub levels: Option<Vec<usize>>,
    /// Defaults to the analytic curvature at `point`.
    pub expected: Option<Matrix>,
    #[serde(default = "tol_1e6")]
    pub tolerance: f64,
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points: Vec<usize>,
}

#[derive(Debug, Default, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    #[default]
    Flat,
    Curved,
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FlatCase {
    pub label: Option<String>,
    pub connection: ConnectionSpec,
    #[serde(default)]
    pub expect: Expectation,
    /// Upper bound when flat, lower bound when curved.
    #[serde(default = "tol_1e10")]
    pub tolerance: f64,
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CheckFlat {
    pub description: Option<String>,
    pub grid: Grid,
    pub cases: Vec<FlatCase>,
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PointsSpec {
    Explicit {
        points: Vec<Vec<f64>>,
    },
    Random {
        count: usize,
        seed: u64,
        low: f64,
        high: f64,
    },
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CheckBianchi {
    pub description: Option<String>,
    pub connections: Vec<ConnectionSpec>,
    pub points: PointsSpec,
    #[serde(default = "tol_1e10")]
    pub tolerance: f64,
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CubeBoundary {
    pub description: Option<String>,
    pub flags: Vec<FlagSpec>,
    pub center: Vec<f64>,
    /// Decreasing cube sides.
    pub eps: Vec<f64>,
    #[serde(default = "default_axes")]
    pub axes: [usize; 3],
    #[serde(default = "default_nsub")]
    pub nsub: usize,
    /// Lower bound on the fitted log-log slope of `|log|` against `eps`.
    pub min_slope: Option<f64>,
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Monodromy {
    pub description: Option<String>,
    pub connection: ConnectionSpec,
    pub base: Vec<f64>,
    /// Closed paths in `t` through `base`.
    pub loops: BTreeMap<String, Vec<String>>,
    pub n: usize,
    #[serde(default = "tol_1e8")]
    pub flat_tolerance: f64,
    #[serde(default)]
    pub expected: BTreeMap<String, Matrix>,
    #[serde(default = "tol_1e8")]
    pub tolerance: f64,
    /// Words in the loop names to evaluate in the representation.
    #[serde(default)]
    pub words: Vec<String>,
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RandomUnimodular {
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct WordExperiment {
    pub description: Option<String>,
    /// Named group elements.
    pub generators: Option<BTreeMap<String, Matrix>>,
    /// Replaces `generators` with `count` random integer pairs `a`, `b` of determinant 1.
    pub random_unimodular: Option<RandomUnimodular>,
    pub words: Vec<String>,
    /// Require all words to have equal traces within `tolerance`.
    #[serde(default)]
    pub equal_traces: bool,
    #[serde(default = "tol_1e12")]
    pub tolerance: f64,
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct CircleCase {
    /// Density in `t`, periodic with period 1.
    pub form: String,
    /// A periodic 0-form `f`; the case also evaluates `form + df`.
    pub differential: Option<String>,
    pub expected: Option<f64>,
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DiscrepancyS1 {
    pub description: Option<String>,
    pub cases: Vec<CircleCase>,
    #[serde(default = "default_circle_nodes")]
    pub n: usize,
    #[serde(default = "tol_1e10")]
    pub tolerance: f64,
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct AlphaClassExperiment {
    pub description: Option<String>,
    pub alpha: String,
    #[serde(default)]
    pub compare_with: Vec<String>,
    /// Whether every comparison should land in the same class.
    pub expect_same: Option<bool>,
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Quantity {
    /// Path holonomy with `N` segments.
    Path {
        connection: ConnectionSpec,
        path: Vec<String>,
    },
    /// Surface holonomy on an `N x N` lattice.
    Surface { flag: FlagSpec, homotopy: Vec<String> },
    /// Loop curvature estimate with side `eps / N`.
    CurvatureLoop {
        connection: ConnectionSpec,
        point: Vec<f64>,
        axes: [usize; 2],
        eps: f64,
        n: usize,
    },
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Reference {
    /// A known value.
    Value { value: Matrix },
    /// For surfaces: `Hol(gamma(1)) Hol(gamma(0))^-1` at `n` segments.
    Boundary { n: usize },
}

#[derive(Debug, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Converge {
    pub description: Option<String>,
    pub quantity: Quantity,
    /// Strictly increasing resolutions, at least three.
    pub levels: Vec<usize>,
    /// Residuals are measured against this when given, else against the finest level.
    pub reference: Option<Reference>,
    /// Lower bound on every observed order between consecutive levels.
    pub min_order: Option<f64>,
    /// Upper bound on the residual at the finest level.
    pub max_final_residual: Option<f64>,
}

fn tol_1e6() -> f64 {
    1e-6
}
fn tol_1e8() -> f64 {
    1e-8
}
fn tol_1e10() -> f64 {
    1e-10
}
fn tol_1e12() -> f64 {
    1e-12
}
fn default_axes() -> [usize; 3] {
    [1, 2, 3]
}
fn default_nsub() -> usize {
    8
}
fn default_circle_nodes() -> usize {
    256
}

pub fn complex(text: &str) -> Result<Complex64, Failure> {
    let e = parse(text, 0)?;
    e.eval_real(&[])
        .map_err(|err| Failure::Domain(format!("cannot evaluate constant `{text}`: {err}")))
}

fn complex_rows(m: &Matrix) -> Result<Vec<Vec<Complex64>>, Failure> {
    m.iter().map(|row| row.iter().map(|s| complex(s)).collect()).collect()
}

pub fn group(m: &Matrix) -> Result<GroupElement, Failure> {
    Ok(GroupElement::from_rows(&complex_rows(m)?)?)
}

pub fn algebra(m: &Matrix) -> Result<AlgebraElement, Failure> {
    Ok(AlgebraElement::from_rows(&complex_rows(m)?)?)
}

pub fn axis(k: usize, dim: usize) -> Result<usize, Failure> {
    if k == 0 || k > dim {
        return Err(Failure::Config(format!("axis {k} outside 1..={dim}")));
    }
    Ok(k - 1)
}

impl ConnectionSpec {
    pub fn build(&self) -> Result<ConnectionForm, Failure> {
        Ok(match self {
            Self::Expr { components } => ConnectionForm::parse(components)?,
            Self::Alpha { alpha } => preset_alpha_connection(complex(alpha)?),
            Self::CauchyRiemann { f } => preset_cr_connection(&parse(f, 2)?)?,
            Self::RandomPolynomial {
                seed,
                dim,
                n,
                degree,
                scale,
            } => {
                if *dim == 0 || *n == 0 {
                    return Err(Failure::Config("random connection needs positive dim and n".into()));
                }
                random_polynomial_connection(*seed, *dim, *n, *degree, *scale)
            }
            Self::Gauge { gauge, base } => gauge_transform_connection(&gauge.build()?, &base.build()?)?,
        })
    }
}

impl GaugeSpec {
    pub fn build(&self) -> Result<GaugeFunction, Failure> {
        Ok(match self {
            Self::Expr { dim, entries } => GaugeFunction::parse(entries, *dim)?,
            Self::RandomPolynomial { seed, dim, n, scale } => {
                if *dim == 0 || *n == 0 {
                    return Err(Failure::Config("random gauge needs positive dim and n".into()));
                }
                random_polynomial_gauge(*seed, *dim, *n, *scale)
            }
        })
    }
}

impl FlagSpec {
    pub fn build(&self) -> Result<FormFlag, Failure> {
        match self {
            Self::Curvature { connection } => Ok(FormFlag::curvature_flag(&connection.build()?)),
            Self::Explicit {
                dim,
                n,
                top,
                connection,
            } => {
                let comps = top
                    .iter()
                    .map(|c| {
                        Ok((
                            (axis(c.i, *dim)?, axis(c.j, *dim)?),
                            ExprMatrix::parse(&c.matrix, *dim)?,
                        ))
                    })
                    .collect::<Result<Vec<_>, Failure>>()?;
                let w = TwoForm::from_exprs(*dim, *n, comps)?;
                Ok(FormFlag::degree2(w, connection.build()?)?)
            }
        }
    }
}

pub fn path(coords: &[String]) -> Result<PathSpec, Failure> {
    Ok(PathSpec::parse(coords)?)
}

pub fn homotopy(coords: &[String]) -> Result<HomotopySpec, Failure> {
    Ok(HomotopySpec::parse(coords)?)
}

impl PointsSpec {
    pub fn build(&self, dim: usize) -> Result<Vec<Vec<f64>>, Failure> {
        match self {
            Self::Explicit { points } => {
                if let Some(p) = points.iter().find(|p| p.len() != dim) {
                    return Err(Failure::Config(format!("point {p:?} is not {dim}-dimensional")));
                }
                Ok(points.clone())
            }
            Self::Random { count, seed, low, high } => {
                if low.is_nan() || high.is_nan() || low >= high {
                    return Err(Failure::Config(format!("empty sampling box [{low}, {high})")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..*count)
                    .map(|_| (0..dim).map(|_| rng.random_range(*low..*high)).collect())
                    .collect())
            }
        }
    }
}

/// Pairs `(a, b)` of integer matrices of determinant 1, each a product of
/// four random elementary matrices. Integer entries keep word products exact.
pub fn random_unimodular_pairs(spec: &RandomUnimodular) -> Vec<(GroupElement, GroupElement)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut one = || {
        let mut m = [[1.0, 0.0], [0.0, 1.0]];
        for step in 0..4 {
            let k = rng.random_range(-3..=3) as f64;
            m = if step % 2 == 0 {
                [[m[0][0], m[0][0] * k + m[0][1]], [m[1][0], m[1][0] * k + m[1][1]]]
            } else {
                [[m[0][0] + m[0][1] * k, m[0][1]], [m[1][0] + m[1][1] * k, m[1][1]]]
            };
        }
        GroupElement::from_real_rows(&[m[0].to_vec(), m[1].to_vec()]).expect("2x2 with determinant 1")
    };
    (0..spec.count).map(|_| (one(), one())).collect()
}

/// Builds every object named in the config without running anything.
pub fn validate(config: &ExperimentConfig) -> Result<(), Failure> {
    match config {
        ExperimentConfig::IntegratePath(c) => {
            c.connection.build()?;
            path(&c.path)?;
            for check in &c.checks {
                match check {
                    PathCheck::Expected { value, .. } => drop(group(value)?),
                    PathCheck::GaugeCovariance { gauge, .. } => drop(gauge.build()?),
                    PathCheck::OtherPath { path: p, .. } => drop(path(p)?),
                    PathCheck::Split { first, second, .. } => {
                        path(first)?;
                        path(second)?;
                    }
                }
            }
        }
        ExperimentConfig::IntegrateSurface(c) => {
            c.flag.build()?;
            homotopy(&c.homotopy)?;
            for check in &c.checks {
                if let SurfaceCheck::Expected { value, .. } = check {
                    group(value)?;
                }
            }
        }
        ExperimentConfig::CurvatureEstimate(c) => {
            let a = c.connection.build()?;
            axis(c.axes[0], a.dim())?;
            axis(c.axes[1], a.dim())?;
            if let Some(m) = &c.expected {
                algebra(m)?;
            }
        }
        ExperimentConfig::CheckFlat(c) => {
            for case in &c.cases {
                case.connection.build()?;
            }
        }
        ExperimentConfig::CheckBianchi(c) => {
            for a in &c.connections {
                a.build()?;
            }
        }
        ExperimentConfig::CubeBoundary(c) => {
            for f in &c.flags {
                f.build()?;
            }
        }
        ExperimentConfig::Monodromy(c) => {
            c.connection.build()?;
            for p in c.loops.values() {
                path(p)?;
            }
            for (name, m) in &c.expected {
                if !c.loops.contains_key(name) {
                    return Err(Failure::Config(format!("expected value for unknown loop `{name}`")));
                }
                group(m)?;
            }
            for w in &c.words {
                crate::run::word(w)?;
            }
        }
        ExperimentConfig::Word(c) => {
            if let Some(gens) = &c.generators {
                for m in gens.values() {
                    group(m)?;
                }
            }
            for w in &c.words {
                crate::run::word(w)?;
            }
        }
        ExperimentConfig::DiscrepancyS1(c) => {
            for case in &c.cases {
                let f = flagint::cohomology::CircleForm::parse(&case.form)?;
                if let Some(d) = &case.differential {
                    f.plus_parsed_differential(d)?;
                }
            }
        }
        ExperimentConfig::AlphaClass(c) => {
            complex(&c.alpha)?;
            for b in &c.compare_with {
                complex(b)?;
            }
        }
        ExperimentConfig::Converge(c) => {
            match &c.quantity {
                Quantity::Path { connection, path: p } => {
                    connection.build()?;
                    path(p)?;
                }
                Quantity::Surface { flag, homotopy: h } => {
                    flag.build()?;
                    homotopy(h)?;
                }
                Quantity::CurvatureLoop { connection, .. } => drop(connection.build()?),
            }
            if let Some(Reference::Value { value }) = &c.reference {
                complex_rows(value)?;
            }
        }
    }
    Ok(())
}
