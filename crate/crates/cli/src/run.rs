use std::collections::BTreeMap;
use std::fmt::Display;
use std::time::Instant;

use flagint::algebra::{format_complex, group_distance, mat_log, GroupElement};
use flagint::cohomology::{
    alpha_class, conjugacy_invariants, discrepancy_s1, monodromy_representation, same_alpha_class, CircleForm,
};
use flagint::forms::{covariant_ext_derivative, curvature, gauge_transform_connection};
use flagint::holonomy::{
    cube_boundary_holonomy, loop_curvature_estimate, path_holonomy, path_holonomy_with, refine, surface_holonomy,
    word_holonomy, Extrapolate, Quadrature as Rule, Word,
};

use crate::config::*;
use crate::Failure;

/// One CSV row: `level,N,residual,estimated_order,wall_ms`.
pub struct CsvRow {
    pub level: usize,
    pub n: usize,
    pub residual: f64,
    pub estimated_order: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Clone, Copy)]
enum Rel {
    AtMost,
    AtLeast,
    Above,
}

#[derive(Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub rows: Vec<CsvRow>,
    pub failures: Vec<String>,
}

impl Report {
    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn check(&mut self, what: &str, value: f64, rel: Rel, bound: f64) {
        let (ok, sym) = match rel {
            Rel::AtMost => (value <= bound, "<="),
            Rel::AtLeast => (value >= bound, ">="),
            Rel::Above => (value > bound, ">"),
        };
        let mark = if ok { "ok" } else { "FAIL" };
        self.line(format!("check {what}: {value:.4e} {sym} {bound:.1e} [{mark}]"));
        if !ok {
            self.failures.push(what.to_string());
        }
    }
}

pub fn word(text: &str) -> Result<Word, Failure> {
    text.parse::<Word>().map_err(Failure::from)
}

pub fn run(config: &ExperimentConfig) -> Result<Report, Failure> {
    let mut r = Report::default();
    if let Some(d) = config.description() {
        r.line(d);
    }
    match config {
        ExperimentConfig::IntegratePath(c) => integrate_path(c, &mut r)?,
        ExperimentConfig::IntegrateSurface(c) => integrate_surface(c, &mut r)?,
        ExperimentConfig::CurvatureEstimate(c) => curvature_estimate(c, &mut r)?,
        ExperimentConfig::CheckFlat(c) => check_flat(c, &mut r)?,
        ExperimentConfig::CheckBianchi(c) => check_bianchi(c, &mut r)?,
        ExperimentConfig::CubeBoundary(c) => cube_boundary(c, &mut r)?,
        ExperimentConfig::Monodromy(c) => monodromy(c, &mut r)?,
        ExperimentConfig::Word(c) => words(c, &mut r)?,
        ExperimentConfig::DiscrepancyS1(c) => discrepancy(c, &mut r)?,
        ExperimentConfig::AlphaClass(c) => alpha(c, &mut r)?,
        ExperimentConfig::Converge(c) => converge(c, &mut r)?,
    }
    Ok(r)
}

fn integrate_path(c: &IntegratePath, r: &mut Report) -> Result<(), Failure> {
    let a = c.connection.build()?;
    let gamma = path(&c.path)?;
    let rule = match c.quadrature {
        Some(Quadrature::LeftEndpoint) => Rule::LeftEndpoint,
        _ => Rule::Midpoint,
    };
    let h = path_holonomy_with(&a, &gamma, c.n, rule)?;
    r.line(format!("holonomy (N = {}): {h}", c.n));
    for check in &c.checks {
        match check {
            PathCheck::Expected { value, tolerance } => {
                r.check(
                    "distance to expected",
                    group_distance(&h, &group(value)?),
                    Rel::AtMost,
                    *tolerance,
                );
            }
            PathCheck::GaugeCovariance { gauge, tolerance } => {
                let g = gauge.build()?;
                let lhs = path_holonomy_with(&gauge_transform_connection(&g, &a)?, &gamma, c.n, rule)?;
                let rhs = &(&g.eval(gamma.end())? * &h) * &g.eval(gamma.start())?.inverse()?;
                r.line(format!("gauged holonomy: {lhs}"));
                r.check("gauge covariance", group_distance(&lhs, &rhs), Rel::AtMost, *tolerance);
            }
            PathCheck::OtherPath {
                path: other,
                expected_distance,
                tolerance,
            } => {
                let other = path(other)?;
                let d = flagint::holonomy::homotopy_invariance_check(&a, &gamma, &other, c.n)?;
                r.line(format!("distance to other path: {d:.12}"));
                r.check(
                    "distance offset",
                    (d - expected_distance).abs(),
                    Rel::AtMost,
                    *tolerance,
                );
            }
            PathCheck::Split {
                first,
                second,
                n_first,
                n_second,
                tolerance,
            } => {
                let (p1, p2) = (path(first)?, path(second)?);
                let split =
                    &path_holonomy_with(&a, &p2, *n_second, rule)? * &path_holonomy_with(&a, &p1, *n_first, rule)?;
                r.check("split composition", group_distance(&h, &split), Rel::AtMost, *tolerance);
            }
        }
    }
    Ok(())
}

fn boundary_target(
    a: &flagint::forms::ConnectionForm,
    h: &flagint::lattice::HomotopySpec,
    n: usize,
) -> Result<GroupElement, Failure> {
    let upper = path_holonomy(a, &h.path_at(1.0)?, n)?;
    let lower = path_holonomy(a, &h.path_at(0.0)?, n)?;
    Ok(&upper * &lower.inverse()?)
}

fn integrate_surface(c: &IntegrateSurface, r: &mut Report) -> Result<(), Failure> {
    let flag = c.flag.build()?;
    let h = homotopy(&c.homotopy)?;
    let v = surface_holonomy(&flag, &h, c.n1, c.n2)?;
    r.line(format!("surface holonomy ({} x {}): {v}", c.n1, c.n2));
    for check in &c.checks {
        match check {
            SurfaceCheck::Expected { value, tolerance } => {
                r.check(
                    "distance to expected",
                    group_distance(&v, &group(value)?),
                    Rel::AtMost,
                    *tolerance,
                );
            }
            SurfaceCheck::Boundary { reference_n, tolerance } => {
                let target = boundary_target(flag.connection(), &h, *reference_n)?;
                r.line(format!("boundary holonomy: {target}"));
                r.check(
                    "distance to boundary holonomy",
                    group_distance(&v, &target),
                    Rel::AtMost,
                    *tolerance,
                );
            }
        }
    }
    Ok(())
}

fn curvature_estimate(c: &CurvatureEstimate, r: &mut Report) -> Result<(), Failure> {
    let a = c.connection.build()?;
    let (i, j) = (axis(c.axes[0], a.dim())?, axis(c.axes[1], a.dim())?);
    let expected = match &c.expected {
        Some(m) => algebra(m)?,
        None => curvature(&a).component(&c.point, i, j)?,
    };
    r.line(format!("reference F_{}{}: {expected}", c.axes[0], c.axes[1]));
    let value = match &c.levels {
        Some(levels) => {
            let report = refine(
                |k| loop_curvature_estimate(&a, &c.point, i, j, c.eps / k as f64, c.n),
                levels,
            )?;
            for (level, ((k, v), res)) in report.levels.iter().zip(&report.residuals).enumerate() {
                r.line(format!("eps/{k}: {v}"));
                r.rows.push(CsvRow {
                    level,
                    n: *k,
                    residual: *res,
                    estimated_order: None,
                    wall_ms: 0.0,
                });
            }
            r.line(format!("estimated order {:.4}", report.estimated_order));
            r.line(format!("extrapolant: {}", report.extrapolant));
            report.extrapolant
        }
        None => {
            let v = loop_curvature_estimate(&a, &c.point, i, j, c.eps, c.n)?;
            r.line(format!("estimate: {v}"));
            v
        }
    };
    r.check(
        "distance to reference",
        (&value - &expected).norm(),
        Rel::AtMost,
        c.tolerance,
    );
    Ok(())
}

fn grid_points(g: &Grid) -> Result<Vec<Vec<f64>>, Failure> {
    let d = g.points.len();
    if g.lower.len() != d || g.upper.len() != d || d == 0 {
        return Err(Failure::Config(
            "grid lower, upper and points need one entry per axis".into(),
        ));
    }
    if g.points.iter().any(|&n| n < 2) {
        return Err(Failure::Config("grid needs at least two points per axis".into()));
    }
    let mut out = vec![vec![]];
    for k in 0..d {
        let step = (g.upper[k] - g.lower[k]) / (g.points[k] - 1) as f64;
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                (0..g.points[k]).map(move |s| {
                    let mut q = p.clone();
                    q.push(g.lower[k] + step * s as f64);
                    q
                })
            })
            .collect();
    }
    Ok(out)
}

fn check_flat(c: &CheckFlat, r: &mut Report) -> Result<(), Failure> {
    let points = grid_points(&c.grid)?;
    r.line(format!("grid of {} points", points.len()));
    for (k, case) in c.cases.iter().enumerate() {
        let f = curvature(&case.connection.build()?);
        let mut worst = 0.0f64;
        for p in &points {
            worst = worst.max(f.max_norm(p)?);
        }
        let label = case.label.clone().unwrap_or_else(|| format!("case {}", k + 1));
        r.line(format!("{label}: max |F| = {worst:.6e}"));
        match case.expect {
            Expectation::Flat => r.check(&format!("{label} flat"), worst, Rel::AtMost, case.tolerance),
            Expectation::Curved => r.check(&format!("{label} curved"), worst, Rel::Above, case.tolerance),
        }
    }
    Ok(())
}

fn check_bianchi(c: &CheckBianchi, r: &mut Report) -> Result<(), Failure> {
    let mut worst = 0.0f64;
    for spec in &c.connections {
        let a = spec.build()?;
        let dc = covariant_ext_derivative(&curvature(&a), &a)?;
        let mut local = 0.0f64;
        for p in c.points.build(a.dim())? {
            local = local.max(dc.max_norm(&p)?);
        }
        r.line(format!("max |D F| = {local:.3e}"));
        worst = worst.max(local);
    }
    r.check("Bianchi identity", worst, Rel::AtMost, c.tolerance);
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn cube_boundary(c: &CubeBoundary, r: &mut Report) -> Result<(), Failure> {
    let dim = c.center.len();
    let axes = (axis(c.axes[0], dim)?, axis(c.axes[1], dim)?, axis(c.axes[2], dim)?);
    if c.eps.len() < 2 && c.min_slope.is_some() {
        return Err(Failure::Config("a slope needs at least two cube sizes".into()));
    }
    for (f, spec) in c.flags.iter().enumerate() {
        let flag = spec.build()?;
        let mut norms = Vec::with_capacity(c.eps.len());
        for (level, &eps) in c.eps.iter().enumerate() {
            let start = Instant::now();
            let v = cube_boundary_holonomy(&flag, &c.center, eps, axes, c.nsub)?;
            let norm = mat_log(&v)?.norm();
            let order = norms
                .last()
                .map(|&prev: &f64| (prev / norm).ln() / (c.eps[level - 1] / eps).ln());
            r.line(format!("flag {} eps {eps}: |log| = {norm:.6e}", f + 1));
            r.rows.push(CsvRow {
                level,
                n: c.nsub,
                residual: norm,
                estimated_order: order,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            });
            norms.push(norm);
        }
        if c.eps.len() >= 2 {
            let slope = loglog_slope(&c.eps, &norms);
            r.line(format!("flag {} fitted slope {slope:.4}", f + 1));
            if let Some(min) = c.min_slope {
                r.check(&format!("flag {} slope", f + 1), slope, Rel::AtLeast, min);
            }
        }
    }
    Ok(())
}

fn monodromy(c: &Monodromy, r: &mut Report) -> Result<(), Failure> {
    let a = c.connection.build()?;
    let loops = c
        .loops
        .iter()
        .map(|(name, p)| Ok((name.clone(), path(p)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    let rep = monodromy_representation(&a, &c.base, &loops, c.n, c.flat_tolerance)?;
    r.line(format!("flatness residual {:.3e}", rep.flatness_residual));
    for (name, g) in &rep.images {
        let inv = conjugacy_invariants(g);
        r.line(format!(
            "{name} -> {g}  (trace {}, det {})",
            format_complex(inv.trace),
            format_complex(inv.det)
        ));
    }
    for (name, m) in &c.expected {
        r.check(
            &format!("{name} distance to expected"),
            group_distance(&rep.images[name], &group(m)?),
            Rel::AtMost,
            c.tolerance,
        );
    }
    for w in &c.words {
        let v = word_holonomy(&rep.images, &word(w)?)?;
        r.line(format!("word {w} -> {v}"));
    }
    Ok(())
}

fn words(c: &WordExperiment, r: &mut Report) -> Result<(), Failure> {
    let parsed = c.words.iter().map(|w| word(w)).collect::<Result<Vec<_>, _>>()?;
    let envs: Vec<BTreeMap<String, GroupElement>> = match (&c.generators, &c.random_unimodular) {
        (Some(g), None) => vec![g
            .iter()
            .map(|(k, m)| Ok((k.clone(), group(m)?)))
            .collect::<Result<_, Failure>>()?],
        (None, Some(spec)) => random_unimodular_pairs(spec)
            .into_iter()
            .map(|(a, b)| [("a".to_string(), a), ("b".to_string(), b)].into())
            .collect(),
        _ => {
            return Err(Failure::Config(
                "give exactly one of `generators` and `random_unimodular`".into(),
            ))
        }
    };
    let mut worst = 0.0f64;
    for (k, env) in envs.iter().enumerate() {
        if envs.len() > 1 {
            r.line(format!("assignment {}: a = {}, b = {}", k + 1, env["a"], env["b"]));
        }
        let values = parsed
            .iter()
            .map(|w| word_holonomy(env, w))
            .collect::<Result<Vec<_>, _>>()?;
        for (w, v) in c.words.iter().zip(&values) {
            r.line(format!("  {w} -> {v}  trace {}", format_complex(v.trace())));
        }
        for v in &values[1.min(values.len())..] {
            worst = worst.max((v.trace() - values[0].trace()).norm());
        }
    }
    if c.equal_traces {
        r.check("trace spread", worst, Rel::AtMost, c.tolerance);
    }
    Ok(())
}

fn discrepancy(c: &DiscrepancyS1, r: &mut Report) -> Result<(), Failure> {
    for (k, case) in c.cases.iter().enumerate() {
        let w = CircleForm::parse(&case.form)?;
        let d = discrepancy_s1(&w, c.n)?;
        r.line(format!("case {}: Delta = {d:.15}", k + 1));
        if let Some(e) = case.expected {
            r.check(
                &format!("case {} distance to expected", k + 1),
                (d - e).abs(),
                Rel::AtMost,
                c.tolerance,
            );
        }
        if let Some(f) = &case.differential {
            let shifted = discrepancy_s1(&w.plus_parsed_differential(f)?, c.n)?;
            r.line(format!("case {}: Delta(w + df) = {shifted:.15}", k + 1));
            r.check(
                &format!("case {} gauge shift", k + 1),
                (shifted - d).abs(),
                Rel::AtMost,
                c.tolerance,
            );
        }
    }
    Ok(())
}

fn alpha(c: &AlphaClassExperiment, r: &mut Report) -> Result<(), Failure> {
    let a = complex(&c.alpha)?;
    let class = alpha_class(a);
    r.line(format!("representative {}", format_complex(class.representative)));
    r.line(format!("monodromy {}", format_complex(class.monodromy)));
    for other in &c.compare_with {
        let b = complex(other)?;
        let same = same_alpha_class(a, b);
        r.line(format!(
            "{other}: {}",
            if same { "same class" } else { "different class" }
        ));
        if let Some(expect) = c.expect_same {
            if expect != same {
                r.failures.push(format!("class of {other}"));
            }
        }
    }
    Ok(())
}

fn converge(c: &Converge, r: &mut Report) -> Result<(), Failure> {
    match &c.quantity {
        Quantity::Path { connection, path: p } => {
            let a = connection.build()?;
            let gamma = path(p)?;
            let reference = match &c.reference {
                Some(Reference::Value { value }) => Some(group(value)?),
                Some(Reference::Boundary { .. }) => {
                    return Err(Failure::Config("boundary reference needs a surface quantity".into()))
                }
                None => None,
            };
            levels_report(c, r, reference, |n| Ok(path_holonomy(&a, &gamma, n)?))
        }
        Quantity::Surface { flag, homotopy: h } => {
            let flag = flag.build()?;
            let h = homotopy(h)?;
            let reference = match &c.reference {
                Some(Reference::Value { value }) => Some(group(value)?),
                Some(Reference::Boundary { n }) => {
                    let target = boundary_target(flag.connection(), &h, *n)?;
                    r.line(format!("boundary holonomy (N = {n}): {target}"));
                    Some(target)
                }
                None => None,
            };
            levels_report(c, r, reference, |n| Ok(surface_holonomy(&flag, &h, n, n)?))
        }
        Quantity::CurvatureLoop {
            connection,
            point,
            axes,
            eps,
            n,
        } => {
            let a = connection.build()?;
            let (i, j) = (axis(axes[0], a.dim())?, axis(axes[1], a.dim())?);
            let reference = match &c.reference {
                Some(Reference::Value { value }) => Some(algebra(value)?),
                Some(Reference::Boundary { .. }) => {
                    return Err(Failure::Config("boundary reference needs a surface quantity".into()))
                }
                None => None,
            };
            levels_report(c, r, reference, |k| {
                Ok(loop_curvature_estimate(&a, point, i, j, eps / k as f64, *n)?)
            })
        }
    }
}

/// Evaluates every level in order, timing each, then reports residuals,
/// observed orders and the extrapolant.
fn levels_report<V, F>(c: &Converge, r: &mut Report, reference: Option<V>, f: F) -> Result<(), Failure>
where
    V: Extrapolate + Display,
    F: Fn(usize) -> Result<V, Failure>,
{
    let mut values = Vec::with_capacity(c.levels.len());
    let mut times = Vec::with_capacity(c.levels.len());
    for &n in &c.levels {
        let start = Instant::now();
        values.push(f(n)?);
        times.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let lookup: Vec<(usize, V)> = c.levels.iter().copied().zip(values.iter().cloned()).collect();
    let report = refine(
        |n| {
            Ok(lookup
                .iter()
                .find(|(k, _)| *k == n)
                .expect("level was evaluated")
                .1
                .clone())
        },
        &c.levels,
    )?;
    let residuals = match &reference {
        Some(v) => report.errors_against(v),
        None => report.residuals.clone(),
    };
    let mut min_order = f64::INFINITY;
    for (level, (n, v)) in report.levels.iter().enumerate() {
        let order = (level > 0 && reference.is_some())
            .then(|| (residuals[level - 1] / residuals[level]).ln() / (*n as f64 / c.levels[level - 1] as f64).ln());
        if let Some(p) = order {
            min_order = min_order.min(p);
        }
        r.line(format!("N = {n}: residual {:.6e}  value {v}", residuals[level]));
        r.rows.push(CsvRow {
            level,
            n: *n,
            residual: residuals[level],
            estimated_order: order,
            wall_ms: times[level],
        });
    }
    if report.saturated {
        r.line("last two levels agree exactly; order reported as infinite");
    }
    r.line(format!(
        "estimated order (last three levels) {:.4}",
        report.estimated_order
    ));
    r.line(format!("extrapolant: {}", report.extrapolant));
    if let Some(v) = &reference {
        r.line(format!("extrapolant residual {:.6e}", report.extrapolant.distance(v)));
    }
    if let Some(min) = c.min_order {
        let observed = if reference.is_some() {
            min_order
        } else {
            report.estimated_order
        };
        r.check("observed order", observed, Rel::AtLeast, min);
    }
    if let Some(max) = c.max_final_residual {
        let last = if reference.is_some() {
            *residuals.last().expect("at least three levels")
        } else {
            report.successive_differences().last().copied().unwrap_or(0.0)
        };
        r.check("final residual", last, Rel::AtMost, max);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_enumerates_every_point() {
        let g = Grid {
            lower: vec![-1.0, 0.0],
            upper: vec![1.0, 1.0],
            points: vec![3, 2],
        };
        let pts = grid_points(&g).unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], vec![-1.0, 0.0]);
        assert_eq!(pts[5], vec![1.0, 1.0]);
        let bad = Grid {
            lower: vec![0.0],
            upper: vec![1.0],
            points: vec![1],
        };
        assert!(grid_points(&bad).is_err());
    }

    #[test]
    fn slope_of_a_power_law() {
        let xs = [0.4, 0.2, 0.1];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(4)).collect();
        assert!((loglog_slope(&xs, &ys) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn failed_check_is_recorded() {
        let mut r = Report::default();
        r.check("small", 0.5, Rel::AtMost, 1.0);
        r.check("big", 0.5, Rel::Above, 1.0);
        assert_eq!(r.failures, vec!["big".to_string()]);
    }
}
