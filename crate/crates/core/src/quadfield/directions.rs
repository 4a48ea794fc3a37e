//! Invariant directions `F(d) = ρ d` and strict idempotents `F(X) = X`.

use std::collections::HashMap;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::QuadraticField;
use crate::error::{Error, Result};
use crate::linalg::{binary_form_roots, tangent_basis, Mat3, Vec3};

/// Polished directions must reach this residual (times `max(1, c)`).
pub const DIRECTION_TOL: f64 = 1e-9;
/// Minima of `‖X × F(X)‖` above this (times `max(1, c)`) are not directions.
pub const REJECT_TOL: f64 = 1e-7;
/// `|ρ|` below this (times `max(1, c)`) is a zero of the field.
pub const ZERO_RHO: f64 = 1e-7;
pub const IDEMPOTENT_TOL: f64 = 1e-8;
/// A quadratic map on the projective plane has at most seven isolated
/// invariant directions.
pub const MAX_ISOLATED: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectionKind {
    Zero,
    IdempotentRay,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantDirection {
    /// Unit vector; planar fields have a zero third component.
    pub d: [f64; 3],
    pub rho: f64,
    pub kind: DirectionKind,
    /// `‖F(d) − ρ d‖`.
    pub residual: f64,
}

impl InvariantDirection {
    pub fn vector(&self) -> Vec3 {
        Vec3::from(self.d)
    }

    /// `d / ρ` for idempotent rays.
    pub fn strict_idempotent(&self) -> Option<Vec3> {
        match self.kind {
            DirectionKind::IdempotentRay => Some(self.vector() / self.rho),
            DirectionKind::Zero => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionOptions {
    /// Icosahedral grid frequency; the grid has `10 n² + 2` points.
    pub frequency: usize,
    /// Grid minima with `‖X × F(X)‖ > coarse · c` are not refined.
    pub coarse: f64,
    pub max_directions: usize,
}

impl Default for DirectionOptions {
    fn default() -> Self {
        Self {
            frequency: 45,
            coarse: 0.3,
            max_directions: 256,
        }
    }
}

impl DirectionOptions {
    /// Options with roughly `points` grid points.
    pub fn with_points(points: usize) -> Self {
        let n = (((points.max(12) - 2) as f64) / 10.0).sqrt().round().max(1.0) as usize;
        Self {
            frequency: n,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    pub directions: Vec<InvariantDirection>,
    /// More than [`MAX_ISOLATED`] directions were found: the invariant set
    /// contains a curve, and the list is a sample of it.
    pub non_isolated: bool,
}

impl DirectionSet {
    pub fn idempotents(&self) -> Vec<Vec3> {
        self.directions
            .iter()
            .filter_map(|d| d.strict_idempotent())
            .collect()
    }
}

struct Grid {
    points: Vec<Vec3>,
    neighbors: Vec<Vec<usize>>,
}

fn build_grid(n: usize) -> Grid {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let verts: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let faces = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let mut index: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let mut points = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let key = |p: &Vec3| {
        (
            (p.x * 1e9).round() as i64,
            (p.y * 1e9).round() as i64,
            (p.z * 1e9).round() as i64,
        )
    };
    for f in faces {
        let (a, b, c) = (verts[f[0]], verts[f[1]], verts[f[2]]);
        let mut local = vec![vec![0usize; n + 1]; n + 1];
        for i in 0..=n {
            for j in 0..=(n - i) {
                let k = n - i - j;
                let p = (a * i as f64 + b * j as f64 + c * k as f64).normalize();
                let id = *index.entry(key(&p)).or_insert_with(|| {
                    points.push(p);
                    points.len() - 1
                });
                local[i][j] = id;
            }
        }
        for i in 0..=n {
            for j in 0..=(n - i) {
                if i + j < n {
                    edges.push((local[i][j], local[i + 1][j]));
                    edges.push((local[i][j], local[i][j + 1]));
                    edges.push((local[i + 1][j], local[i][j + 1]));
                }
            }
        }
    }
    let mut neighbors = vec![Vec::new(); points.len()];
    for (u, v) in edges {
        if u != v {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
    }
    for nb in neighbors.iter_mut() {
        nb.sort_unstable();
        nb.dedup();
    }
    Grid { points, neighbors }
}

fn grid(n: usize) -> std::sync::Arc<Grid> {
    static DEFAULT: OnceLock<std::sync::Arc<Grid>> = OnceLock::new();
    if n == DirectionOptions::default().frequency {
        DEFAULT.get_or_init(|| std::sync::Arc::new(build_grid(n))).clone()
    } else {
        std::sync::Arc::new(build_grid(n))
    }
}

fn canonical(d: Vec3) -> Vec3 {
    // sign convention: the first component with |d_i| > 1e-8 is positive
    for i in 0..3 {
        if d[i].abs() > 1e-8 {
            return if d[i] < 0.0 { -d } else { d };
        }
    }
    d
}

fn misfit(f: &QuadraticField, x: &Vec3) -> Vec3 {
    x.cross(&f.evaluate(x))
}

/// Levenberg–Marquardt on `X × F(X) = 0` in a tangent chart of the sphere.
fn refine(f: &QuadraticField, start: &Vec3) -> (Vec3, f64) {
    let mut x = start.normalize();
    let mut r = misfit(f, &x);
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    for _ in 0..200 {
        if cost == 0.0 {
            break;
        }
        let (t1, t2) = tangent_basis(&x);
        let fx = f.evaluate(&x);
        let jf = f.jacobian(&x);
        let col = |t: &Vec3| t.cross(&fx) + x.cross(&(jf * t));
        let c1 = col(&t1);
        let c2 = col(&t2);
        let (a11, a12, a22) = (c1.dot(&c1), c1.dot(&c2), c2.dot(&c2));
        let (g1, g2) = (c1.dot(&r), c2.dot(&r));
        let mut improved = false;
        for _ in 0..30 {
            let d11 = a11 + mu * (a11.max(1e-300));
            let d22 = a22 + mu * (a22.max(1e-300));
            let det = d11 * d22 - a12 * a12;
            if det == 0.0 || !det.is_finite() {
                mu *= 10.0;
                continue;
            }
            let s1 = -(d22 * g1 - a12 * g2) / det;
            let s2 = -(d11 * g2 - a12 * g1) / det;
            let cand = (x + t1 * s1 + t2 * s2).normalize();
            let rc = misfit(f, &cand);
            let cc = rc.norm_squared();
            if cc < cost {
                let step = (s1 * s1 + s2 * s2).sqrt();
                x = cand;
                r = rc;
                cost = cc;
                mu = (mu * 0.1).max(1e-15);
                improved = true;
                if step < 1e-15 {
                    return (x, cost.sqrt());
                }
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (x, cost.sqrt())
}

fn make_direction(f: &QuadraticField, d: Vec3, zero_cut: f64) -> InvariantDirection {
    let d = canonical(d.normalize());
    let fd = f.evaluate(&d);
    let rho = d.dot(&fd);
    let residual = (fd - d * rho).norm();
    let kind = if rho.abs() < zero_cut {
        DirectionKind::Zero
    } else {
        DirectionKind::IdempotentRay
    };
    InvariantDirection {
        d: [d[0], d[1], d[2]],
        rho,
        kind,
        residual,
    }
}

fn angular_distance(a: &Vec3, b: &Vec3) -> f64 {
    let c = a.dot(b).abs().min(1.0);
    let s = a.cross(b).norm();
    s.atan2(c)
}

fn dedup_sorted(mut cands: Vec<Vec3>, cap: usize) -> (Vec<Vec3>, bool) {
    cands.sort_by(|a, b| {
        a[0].total_cmp(&b[0])
            .then(a[1].total_cmp(&b[1]))
            .then(a[2].total_cmp(&b[2]))
    });
    let mut kept: Vec<Vec3> = Vec::new();
    let mut overflow = false;
    for c in cands {
        if kept.iter().any(|k| angular_distance(k, &c) < 1e-6) {
            continue;
        }
        if kept.len() >= cap {
            overflow = true;
            break;
        }
        kept.push(c);
    }
    (kept, overflow)
}

pub fn invariant_directions(f: &QuadraticField) -> Result<Vec<InvariantDirection>> {
    Ok(invariant_direction_set(f, &DirectionOptions::default())?.directions)
}

pub fn invariant_direction_set(f: &QuadraticField, opts: &DirectionOptions) -> Result<DirectionSet> {
    let c = f.max_coefficient();
    let unit = c.max(1.0);
    let zero_cut = ZERO_RHO * unit;
    if f.dim() == 2 {
        return planar_directions(f, zero_cut, opts);
    }
    if c == 0.0 {
        let dirs = [Vec3::x(), Vec3::y(), Vec3::z()]
            .iter()
            .map(|d| make_direction(f, *d, zero_cut))
            .collect();
        return Ok(DirectionSet {
            directions: dirs,
            non_isolated: true,
        });
    }
    let g = grid(opts.frequency);
    let vals: Vec<f64> = g.points.par_iter().map(|p| misfit(f, p).norm()).collect();
    let coarse = opts.coarse * c;
    let starts: Vec<usize> = (0..g.points.len())
        .filter(|&i| {
            let p = &g.points[i];
            canonical(*p) == *p
                && vals[i] <= coarse
                && g.neighbors[i].iter().all(|&j| vals[i] <= vals[j])
        })
        .collect();
    let refined: Vec<(Vec3, f64)> = starts
        .par_iter()
        .map(|&i| refine(f, &g.points[i]))
        .collect();
    let mut cands = Vec::new();
    for (x, res) in refined {
        if res <= DIRECTION_TOL * unit {
            cands.push(canonical(x));
        } else if res < REJECT_TOL * unit {
            return Err(Error::ResidualTooHigh(res));
        }
    }
    let (kept, overflow) = dedup_sorted(cands, opts.max_directions);
    let non_isolated = overflow || kept.len() > MAX_ISOLATED;
    let directions = kept
        .into_iter()
        .map(|d| make_direction(f, d, zero_cut))
        .collect();
    Ok(DirectionSet {
        directions,
        non_isolated,
    })
}

fn planar_directions(f: &QuadraticField, zero_cut: f64, opts: &DirectionOptions) -> Result<DirectionSet> {
    // x F2 - y F1 = b11 x³ + (2 b12 - a11) x² y + (b22 - 2 a12) x y² - a22 y³
    let a = |j: usize, k: usize| f.coefficient(0, j, k);
    let b = |j: usize, k: usize| f.coefficient(1, j, k);
    let cubic = [
        b(0, 0),
        2.0 * b(0, 1) - a(0, 0),
        b(1, 1) - 2.0 * a(0, 1),
        -a(1, 1),
    ];
    let scale = cubic.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let unit = f.max_coefficient().max(1.0);
    if scale <= 1e-14 * unit {
        // every direction is invariant: F(X) = ℓ(X) X
        let m = opts.max_directions.clamp(1, 8);
        let dirs = (0..m)
            .map(|k| {
                let th = std::f64::consts::PI * k as f64 / m as f64;
                make_direction(f, Vec3::new(th.cos(), th.sin(), 0.0), zero_cut)
            })
            .collect();
        return Ok(DirectionSet {
            directions: dirs,
            non_isolated: true,
        });
    }
    let mut dirs = Vec::new();
    for [x, y] in binary_form_roots(&cubic) {
        let d = make_direction(f, Vec3::new(x, y, 0.0), zero_cut);
        if d.residual > DIRECTION_TOL * unit {
            return Err(Error::ResidualTooHigh(d.residual));
        }
        dirs.push(d);
    }
    dirs.sort_by(|p, q| {
        p.d[0]
            .total_cmp(&q.d[0])
            .then(p.d[1].total_cmp(&q.d[1]))
    });
    Ok(DirectionSet {
        directions: dirs,
        non_isolated: false,
    })
}

/// Newton on `F(X) − X` from `x0`. Returns the polished point and its
/// residual.
pub fn polish_idempotent(f: &QuadraticField, x0: &Vec3) -> (Vec3, f64) {
    let n = f.dim();
    let mut x = *x0;
    let resid = |x: &Vec3| (f.evaluate(x) - x).norm();
    let mut r = resid(&x);
    for _ in 0..20 {
        let mut j = f.jacobian(&x) - Mat3::identity();
        if n == 2 {
            j[(2, 2)] = 1.0;
        }
        let g = f.evaluate(&x) - x;
        let Some(step) = j.lu().solve(&g) else { break };
        let cand = x - step;
        let rc = resid(&cand);
        if !(rc < r) {
            break;
        }
        x = cand;
        r = rc;
        if r == 0.0 {
            break;
        }
    }
    (x, r)
}

/// Strict idempotents, one per idempotent ray. An empty list is numerical
/// evidence that the field has no idempotents.
pub fn find_idempotents(f: &QuadraticField) -> Result<Vec<Vec3>> {
    let set = invariant_direction_set(f, &DirectionOptions::default())?;
    Ok(idempotents_of(f, &set))
}

pub(crate) fn idempotents_of(f: &QuadraticField, set: &DirectionSet) -> Vec<Vec3> {
    set.directions
        .iter()
        .filter_map(|d| d.strict_idempotent())
        .map(|x| {
            let (p, r) = polish_idempotent(f, &x);
            if r <= IDEMPOTENT_TOL * p.norm_squared().max(1.0) {
                p
            } else {
                x
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example4() -> QuadraticField {
        QuadraticField::from_terms(3, &[(0, 1, 2, 0.5), (1, 0, 2, 1.5), (2, 0, 1, 2.0)]).unwrap()
    }

    fn example5() -> QuadraticField {
        QuadraticField::from_terms(3, &[(0, 1, 2, 1.0), (1, 0, 1, 1.0), (2, 0, 2, 3.0)]).unwrap()
    }

    #[test]
    fn grid_size_and_connectivity() {
        let g = build_grid(4);
        assert_eq!(g.points.len(), 10 * 16 + 2);
        assert!(g.neighbors.iter().all(|n| n.len() == 5 || n.len() == 6));
    }

    #[test]
    fn example4_idempotents() {
        let f = example4();
        let ids = find_idempotents(&f).unwrap();
        assert_eq!(ids.len(), 4);
        let s = 3.0_f64.sqrt();
        for x in &ids {
            assert!((f.evaluate(x) - x).norm() <= 1e-8);
            assert!((x[0].abs() - 1.0 / s).abs() < 1e-9);
            assert!((x[1].abs() - 1.0).abs() < 1e-9);
            assert!((x[2].abs() - 2.0 / s).abs() < 1e-9);
        }
        assert!(ids
            .iter()
            .any(|x| (x - Vec3::new(1.0 / s, 1.0, 2.0 / s)).norm() < 1e-9));
    }

    #[test]
    fn example5_has_only_zeros() {
        let set = invariant_direction_set(&example5(), &DirectionOptions::default()).unwrap();
        assert!(!set.directions.is_empty());
        assert!(set
            .directions
            .iter()
            .all(|d| d.kind == DirectionKind::Zero));
        assert!(set
            .directions
            .iter()
            .any(|d| (d.vector() - Vec3::x()).norm() < 1e-9));
        assert!(find_idempotents(&example5()).unwrap().is_empty());
    }

    #[test]
    fn squares_field() {
        let f = QuadraticField::from_terms(3, &[(0, 0, 0, 1.0), (1, 1, 1, 1.0), (2, 2, 2, 1.0)])
            .unwrap();
        let dirs = invariant_directions(&f).unwrap();
        assert_eq!(dirs.len(), 7);
        let s = 3.0_f64.sqrt();
        assert!(dirs.iter().any(|d| {
            (d.vector() - Vec3::new(1.0, 1.0, 1.0) / s).norm() < 1e-9
                && (d.rho - 1.0 / s).abs() < 1e-9
                && d.kind == DirectionKind::IdempotentRay
        }));
    }

    #[test]
    fn zero_field_has_no_idempotents() {
        let f = QuadraticField::zero(3);
        assert!(!invariant_directions(&f).unwrap().is_empty());
        assert!(find_idempotents(&f).unwrap().is_empty());
    }

    #[test]
    fn planar_witness() {
        let f = QuadraticField::from_terms(2, &[(0, 1, 1, 1.0), (1, 0, 0, 1.0)]).unwrap();
        let ids = find_idempotents(&f).unwrap();
        assert!(ids.iter().any(|x| (x - Vec3::new(1.0, 1.0, 0.0)).norm() < 1e-12));
    }
}
