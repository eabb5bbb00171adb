//! Grid-seeded simplex minimization of `|f_m|` over a rectangle of the λ-plane.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DispersionForm, DispersionProblem};
use crate::error::{Error, Result};

/// Smallest accepted grid in each direction.
pub const MIN_GRID: usize = 16;
/// Simplex diameter, relative to `max(|λ|, 1)`, at which polishing stops.
const SIMPLEX_XTOL: f64 = 1e-10;
const SIMPLEX_MAX_ITER: usize = 5_000;
/// Roots closer than this (relative) are merged.
const DEDUP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl SearchBox {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Self {
        Self {
            re_min: re.0,
            re_max: re.1,
            im_min: im.0,
            im_max: im.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.re_min >= self.re_max || self.im_min >= self.im_max {
            return Err(Error::InvalidSearch(format!(
                "search box must satisfy re_min < re_max and im_min < im_max, got [{}, {}] x [{}, {}]",
                self.re_min, self.re_max, self.im_min, self.im_max
            )));
        }
        Ok(())
    }

    /// Mirror image under complex conjugation.
    pub fn conj(&self) -> Self {
        Self {
            re_min: self.re_min,
            re_max: self.re_max,
            im_min: -self.im_max,
            im_max: -self.im_min,
        }
    }

    /// Grid node `(i, j)` of an `nx × ny` lattice including the corners.
    pub fn node(&self, i: usize, j: usize, nx: usize, ny: usize) -> Complex64 {
        let t = |k: usize, n: usize| k as f64 / (n - 1) as f64;
        Complex64::new(
            self.re_min + (self.re_max - self.re_min) * t(i, nx),
            self.im_min + (self.im_max - self.im_min) * t(j, ny),
        )
    }

    fn contains_with_margin(&self, z: Complex64, dx: f64, dy: f64) -> bool {
        z.re >= self.re_min - dx
            && z.re <= self.re_max + dx
            && z.im >= self.im_min - dy
            && z.im <= self.im_max + dy
    }
}

/// One root of `f_m`, in the shape used by the JSON roots export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub m: usize,
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub abs_fm: f64,
}

impl Root {
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.lambda_re, self.lambda_im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSearch {
    pub roots: Vec<Root>,
    /// Form of `f_m` minimized over the whole box.
    pub form: DispersionForm,
    pub seeds: usize,
    /// Median `|f_m|` over the grid; acceptance is relative to it.
    pub median_abs_fm: f64,
    /// Set when no root was accepted, or a root lies near a cosh zero.
    pub diagnostic: Option<String>,
}

/// Derivative-free simplex minimization in the plane (standard reflection,
/// expansion, contraction and shrink coefficients 1, 2, ½, ½).
///
/// Stops when every vertex lies within `xtol·max(|best|, 1)` of the best one.
/// Non-finite objective values are treated as `+∞`.
pub fn nelder_mead<F>(
    mut f: F,
    start: [f64; 2],
    step: [f64; 2],
    xtol: f64,
    max_iter: usize,
) -> ([f64; 2], f64)
where
    F: FnMut([f64; 2]) -> f64,
{
    let mut eval = |p: [f64; 2]| {
        let v = f(p);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex = [
        start,
        [start[0] + step[0], start[1]],
        [start[0], start[1] + step[1]],
    ];
    let mut values = simplex.map(&mut eval);
    let lerp =
        |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];

    for _ in 0..max_iter {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|k| simplex[k]);
        values = order.map(|k| values[k]);

        let best = simplex[0];
        let diameter = simplex[1..]
            .iter()
            .map(|p| (p[0] - best[0]).hypot(p[1] - best[1]))
            .fold(0.0, f64::max);
        if diameter <= xtol * best[0].hypot(best[1]).max(1.0) {
            break;
        }

        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let worst = simplex[2];
        let reflected = lerp(centroid, worst, -1.0);
        let fr = eval(reflected);
        if fr < values[0] {
            let expanded = lerp(centroid, worst, -2.0);
            let fe = eval(expanded);
            (simplex[2], values[2]) = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < values[1] {
            (simplex[2], values[2]) = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < values[2] {
                let p = lerp(centroid, worst, -0.5);
                (p, eval(p))
            } else {
                let p = lerp(centroid, worst, 0.5);
                (p, eval(p))
            };
            if fc < values[2].min(fr) {
                (simplex[2], values[2]) = (contracted, fc);
            } else {
                for k in 1..3 {
                    simplex[k] = lerp(simplex[0], simplex[k], 0.5);
                    values[k] = eval(simplex[k]);
                }
            }
        }
    }
    let k = (0..3)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    (simplex[k], values[k])
}

/// Roots of `f_m` in `search`: evaluates `|f_m|` on an `nx × ny` grid,
/// polishes every strict local minimum with [`nelder_mead`], and accepts
/// points with `|f_m| ≤ tol · median(|f_m|)`. The result is deduplicated and
/// sorted by `|Im λ|`.
///
/// If the overflow-safe scaled form is needed anywhere in the box it is used
/// throughout, so grid values are comparable.
pub fn find_roots(
    problem: &DispersionProblem,
    search: &SearchBox,
    grid: (usize, usize),
    tol: f64,
) -> Result<RootSearch> {
    search.validate()?;
    let (nx, ny) = grid;
    if nx < MIN_GRID || ny < MIN_GRID {
        return Err(Error::InvalidSearch(format!(
            "grid must be at least {MIN_GRID}x{MIN_GRID}, got {nx}x{ny}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidSearch(format!(
            "tolerance must be positive, got {tol}"
        )));
    }

    let nodes: Vec<Complex64> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| search.node(i, j, nx, ny))
        .collect();
    let form = box_form(problem, &nodes);
    let abs_f = |z: Complex64| {
        problem
            .evaluate_in(z, form)
            .map(|v| v.value.norm())
            .unwrap_or(f64::INFINITY)
    };
    let values: Vec<f64> = nodes.par_iter().map(|&z| abs_f(z)).collect();

    let mut finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::InvalidSearch(
            "f_m is not finite anywhere on the grid".into(),
        ));
    }
    finite.sort_by(f64::total_cmp);
    let median = finite[finite.len() / 2];

    let seeds: Vec<usize> = (0..values.len())
        .filter(|&k| is_strict_local_min(&values, k, nx, ny))
        .collect();
    let dx = (search.re_max - search.re_min) / (nx - 1) as f64;
    let dy = (search.im_max - search.im_min) / (ny - 1) as f64;

    let polished: Vec<(Complex64, f64)> = seeds
        .par_iter()
        .map(|&k| {
            let z0 = nodes[k];
            let (p, v) = nelder_mead(
                |p| abs_f(Complex64::new(p[0], p[1])),
                [z0.re, z0.im],
                [dx, dy],
                SIMPLEX_XTOL,
                SIMPLEX_MAX_ITER,
            );
            (Complex64::new(p[0], p[1]), v)
        })
        .collect();

    let mut roots: Vec<Root> = Vec::new();
    let mut near_cosh_zero = false;
    for (z, v) in polished {
        if !(v <= tol * median) || !search.contains_with_margin(z, dx, dy) {
            continue;
        }
        if roots
            .iter()
            .any(|r| (r.lambda() - z).norm() <= DEDUP_TOL * z.norm().max(r.lambda().norm()))
        {
            continue;
        }
        near_cosh_zero |= problem
            .evaluate_in(z, form)
            .map(|e| e.near_cosh_zero)
            .unwrap_or(false);
        roots.push(Root {
            m: problem.m,
            lambda_re: z.re,
            lambda_im: z.im,
            abs_fm: v,
        });
    }
    roots.sort_by(|a, b| {
        a.lambda_im
            .abs()
            .total_cmp(&b.lambda_im.abs())
            .then(a.lambda_re.total_cmp(&b.lambda_re))
    });

    let diagnostic = if roots.is_empty() {
        Some(format!(
            "no roots of f_{} in the search box ({} seeds examined)",
            problem.m,
            seeds.len()
        ))
    } else if near_cosh_zero {
        Some(
            "a root lies near a zero of a cosh factor; the scaled form may be unreliable there"
                .into(),
        )
    } else {
        None
    };
    Ok(RootSearch {
        roots,
        form,
        seeds: seeds.len(),
        median_abs_fm: median,
        diagnostic,
    })
}

/// Plain form unless some node needs the scaled one.
pub(crate) fn box_form(problem: &DispersionProblem, nodes: &[Complex64]) -> DispersionForm {
    let scaled = nodes
        .par_iter()
        .any(|&z| matches!(problem.form_at(z), Ok(DispersionForm::Scaled)));
    if scaled {
        DispersionForm::Scaled
    } else {
        DispersionForm::Plain
    }
}

fn is_strict_local_min(values: &[f64], k: usize, nx: usize, ny: usize) -> bool {
    let v = values[k];
    if !v.is_finite() {
        return false;
    }
    let (i, j) = ((k % nx) as isize, (k / nx) as isize);
    for dj in -1..=1isize {
        for di in -1..=1isize {
            if di == 0 && dj == 0 {
                continue;
            }
            let (ii, jj) = (i + di, j + dj);
            if ii < 0 || jj < 0 || ii >= nx as isize || jj >= ny as isize {
                continue;
            }
            // Ties go to the lower index: a box symmetric about a root's
            // real part puts equal values on both sides of it.
            let n = jj as usize * nx + ii as usize;
            if values[n] < v || (values[n] == v && n < k) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{FluidProperties, MaterialConfig};
    use crate::mesh::GeometryConfig;
    use std::f64::consts::PI;

    fn two_fluid(m: usize, nu1: f64, nu2: f64) -> DispersionProblem {
        DispersionProblem::new(
            m,
            GeometryConfig::new(1.0, 2.0, 1.25).unwrap(),
            MaterialConfig::water_air(nu1, nu2),
        )
        .unwrap()
    }

    #[test]
    fn simplex_finds_a_quadratic_minimum() {
        let (p, v) = nelder_mead(
            |p| (p[0] - 3.0).powi(2) + 10.0 * (p[1] + 1.0).powi(2),
            [0.0, 0.0],
            [1.0, 1.0],
            1e-12,
            10_000,
        );
        assert!((p[0] - 3.0).abs() < 1e-9 && (p[1] + 1.0).abs() < 1e-9);
        assert!(v < 1e-16);
    }

    #[test]
    fn simplex_handles_a_cone() {
        // |z − z0| has a kink at the minimum, like |f| at a simple root.
        let (p, _) = nelder_mead(
            |p| (p[0] - 0.3).hypot(p[1] - 1400.0),
            [0.0, 1390.0],
            [0.1, 5.0],
            1e-10,
            10_000,
        );
        assert!((p[0] - 0.3).abs() < 1e-6 && (p[1] - 1400.0).abs() < 1e-6);
    }

    #[test]
    fn inviscid_m0_root() {
        let search = SearchBox::new((-1.0, 1.0), (1200.0, 1600.0));
        let out = find_roots(&two_fluid(0, 0.0, 0.0), &search, (16, 64), 1e-6).unwrap();
        assert_eq!(out.roots.len(), 1);
        let z = out.roots[0].lambda();
        assert!((z.im - 1423.87).abs() < 0.005 && z.re.abs() < 1e-6, "{z}");
        assert!(out.diagnostic.is_none());
    }

    #[test]
    fn inviscid_m1_root() {
        let search = SearchBox::new((-1.0, 1.0), (900.0, 1200.0));
        let out = find_roots(&two_fluid(1, 0.0, 0.0), &search, (16, 64), 1e-6).unwrap();
        assert_eq!(out.roots.len(), 1);
        assert!((out.roots[0].lambda_im - 1068.36).abs() < 0.005);
    }

    #[test]
    fn homogeneous_standing_waves() {
        // Water on both sides, m = 0: roots at iω with ω = ckπ/B.
        let water = MaterialConfig::homogeneous(FluidProperties::water(0.0));
        let p =
            DispersionProblem::new(0, GeometryConfig::new(1.0, 2.0, 1.25).unwrap(), water).unwrap();
        let search = SearchBox::new((-1.0, 1.0), (100.0, 9000.0));
        let out = find_roots(&p, &search, (16, 400), 1e-6).unwrap();
        let expected: Vec<f64> = (1..)
            .map(|k| 1430.0 * PI * k as f64 / 2.0)
            .take_while(|&w| w < 9000.0)
            .collect();
        assert_eq!(out.roots.len(), expected.len());
        for (r, w) in out.roots.iter().zip(&expected) {
            assert!((r.lambda_im - w).abs() < 1e-6 * w, "{} vs {w}", r.lambda_im);
        }
    }

    #[test]
    fn empty_box_reports_a_diagnostic() {
        let search = SearchBox::new((-1.0, 1.0), (1100.0, 1300.0));
        let out = find_roots(&two_fluid(1, 0.0, 0.0), &search, (16, 32), 1e-6).unwrap();
        assert!(out.roots.is_empty());
        assert!(out.diagnostic.is_some());
    }

    #[test]
    fn rejects_bad_boxes() {
        let p = two_fluid(0, 0.0, 0.0);
        assert!(find_roots(&p, &SearchBox::new((1.0, -1.0), (0.0, 1.0)), (16, 16), 1e-6).is_err());
        assert!(find_roots(&p, &SearchBox::new((-1.0, 1.0), (0.0, 1.0)), (8, 16), 1e-6).is_err());
        assert!(find_roots(&p, &SearchBox::new((-1.0, 1.0), (0.0, 1.0)), (16, 16), 0.0).is_err());
    }
}
