//! Three operations for the static page in `www/`: the monodromy of
//! `alpha dz / z`, a curvature map of a Cauchy-Riemann connection, and the
//! convergence of surface holonomy to the boundary loop.

use flagint::algebra::group_distance;
use flagint::formlang::parse;
use flagint::forms::{
    curvature, preset_alpha_connection, preset_cr_connection, random_polynomial_connection, FormFlag,
};
use flagint::holonomy::{path_holonomy, surface_holonomy};
use flagint::lattice::{HomotopySpec, PathSpec};
use num_complex::Complex64;
use wasm_bindgen::prelude::*;

fn js(e: flagint::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `[re, im]` of the holonomy around the unit circle, then of `exp(2 pi i alpha)`.
pub fn alpha_loop_values(re: f64, im: f64, n: usize) -> flagint::Result<[f64; 4]> {
    let alpha = Complex64::new(re, im);
    let circle = PathSpec::parse(&["cos(2*pi*t)", "sin(2*pi*t)"])?;
    let h = path_holonomy(&preset_alpha_connection(alpha), &circle, n.max(1))?.entry(0, 0);
    let exact = (Complex64::new(0.0, std::f64::consts::TAU) * alpha).exp();
    Ok([h.re, h.im, exact.re, exact.im])
}

/// Row-major `size x size` samples of `|F_12|` over `[-1, 1]^2`.
pub fn cr_curvature_values(f: &str, size: usize) -> flagint::Result<Vec<f64>> {
    let a = preset_cr_connection(&parse(f, 2)?)?;
    let curv = curvature(&a);
    let size = size.max(2);
    let step = 2.0 / (size - 1) as f64;
    let mut out = Vec::with_capacity(size * size);
    for row in 0..size {
        for col in 0..size {
            let p = [-1.0 + step * col as f64, 1.0 - step * row as f64];
            out.push(curv.component(&p, 0, 1)?.norm());
        }
    }
    Ok(out)
}

/// Distances from the surface holonomy at `N = 4, 8, ..., 2^levels + 1` to
/// the boundary loop, for a random quadratic connection.
pub fn stokes_errors(seed: u64, levels: usize) -> flagint::Result<Vec<f64>> {
    let a = random_polynomial_connection(seed, 2, 2, 2, 0.5);
    let h = HomotopySpec::parse(&["t1", "0.5*sin(pi*t1)*(2*t2 - 1)"])?;
    let target = &path_holonomy(&a, &h.path_at(1.0)?, 8192)? * &path_holonomy(&a, &h.path_at(0.0)?, 8192)?.inverse()?;
    let flag = FormFlag::curvature_flag(&a);
    (0..levels.clamp(1, 7))
        .map(|k| {
            let n = 4 << k;
            Ok(group_distance(&surface_holonomy(&flag, &h, n, n)?, &target))
        })
        .collect()
}

#[wasm_bindgen]
pub fn alpha_loop(re: f64, im: f64, n: usize) -> Result<Vec<f64>, JsError> {
    alpha_loop_values(re, im, n).map(Vec::from).map_err(js)
}

#[wasm_bindgen]
pub fn cr_curvature(f: &str, size: usize) -> Result<Vec<f64>, JsError> {
    cr_curvature_values(f, size).map_err(js)
}

#[wasm_bindgen]
pub fn stokes_convergence(seed: u32, levels: usize) -> Result<Vec<f64>, JsError> {
    stokes_errors(seed as u64, levels).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_loop_matches_closed_form() {
        let [hr, hi, er, ei] = alpha_loop_values(0.3, 0.7, 4096).unwrap();
        assert!(Complex64::new(hr - er, hi - ei).norm() < 1e-8);
    }

    #[test]
    fn holomorphic_map_is_zero() {
        assert!(cr_curvature_values("(x1 + i*x2)^2", 9)
            .unwrap()
            .iter()
            .all(|&v| v < 1e-12));
        let conj = cr_curvature_values("x1 - i*x2", 9).unwrap();
        assert!(conj.iter().all(|&v| (v - 2.0 * 2f64.sqrt()).abs() < 1e-12));
        assert!(cr_curvature_values("x3", 4).is_err());
    }

    #[test]
    fn stokes_errors_shrink() {
        let e = stokes_errors(606, 4).unwrap();
        assert_eq!(e.len(), 4);
        assert!(e.windows(2).all(|w| w[1] < w[0] / 3.0), "{e:?}");
    }
}
