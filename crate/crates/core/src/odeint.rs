//! Adaptive Dormand–Prince 5(4) integration of quadratic fields with
//! finite-time blow-up detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::quadfield::QuadraticField;

/// Log-log slope of `d‖x‖/dt` against `‖x‖` at or above which growth counts as
/// superlinear. Rays of a quadratic field give 2, exponential growth gives 1.
pub const SUPERLINEAR_SLOPE: f64 = 1.25;
pub const MIN_TAIL_SAMPLES: usize = 10;
/// Local error targets are this fraction of `atol + rtol |x|`, so that the
/// accumulated drift of conserved quantities stays near the requested
/// tolerances over long horizons.
const TOL_FACTOR: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Relative to `max(1, ‖x0‖)`.
    pub norm_cap: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            norm_cap: 1e8,
            h_min: 1e-14,
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorOptions {
    fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0
            && self.rtol.is_finite()
            && self.atol >= 0.0
            && self.atol.is_finite()
            && self.norm_cap > 1.0
            && self.h_min > 0.0
            && self.max_steps > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::BadOptions(format!("{self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum TrajectoryStatus {
    ReachedHorizon { t: f64 },
    BlowUp { t_star: f64, norm: f64 },
    StepUnderflow { t: f64 },
}

impl TrajectoryStatus {
    pub fn name(&self) -> &'static str {
        match self {
            TrajectoryStatus::ReachedHorizon { .. } => "ReachedHorizon",
            TrajectoryStatus::BlowUp { .. } => "BlowUp",
            TrajectoryStatus::StepUnderflow { .. } => "StepUnderflow",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Increasing times starting at 0. For backward runs the physical time is
    /// `-times[i]`.
    pub times: Vec<f64>,
    pub states: Vec<Vec3>,
    derivs: Vec<Vec3>,
    pub status: TrajectoryStatus,
    /// `max |Q(x(t)) − Q(x0)|` for each monitored form.
    pub drift: Vec<f64>,
    pub backward: bool,
    pub dim: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupEstimate {
    pub t_star: f64,
    /// RMS residual of the affine fit of `1/‖x‖`.
    pub residual: f64,
    pub samples: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> Vec3 {
        *self.states.last().expect("trajectory has a state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has a time")
    }

    pub fn is_blowup(&self) -> bool {
        matches!(self.status, TrajectoryStatus::BlowUp { .. })
    }

    pub fn max_norm(&self) -> f64 {
        self.states.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Physical time of knot `i` (negative for backward runs).
    pub fn physical_time(&self, i: usize) -> f64 {
        if self.backward {
            -self.times[i]
        } else {
            self.times[i]
        }
    }

    /// Cubic Hermite interpolation between accepted steps, in integration
    /// time.
    pub fn sample(&self, t: f64) -> Option<Vec3> {
        if t < 0.0 || t > self.final_time() {
            return None;
        }
        let i = match self.times.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => return Some(self.states[i]),
            Err(i) => i,
        };
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (y0, y1) = (self.states[i - 1], self.states[i]);
        let (d0, d1) = (self.derivs[i - 1], self.derivs[i]);
        let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
        let h10 = s.powi(3) - 2.0 * s * s + s;
        let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
        let h11 = s.powi(3) - s * s;
        Some(y0 * h00 + d0 * (h10 * h) + y1 * h01 + d1 * (h11 * h))
    }
}

struct Tableau;

impl Tableau {
    const A2: [f64; 1] = [1.0 / 5.0];
    const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
    const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
    const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
    const A6: [f64; 5] = [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ];
    const B: [f64; 6] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ];
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
}

struct Stepper<'a> {
    f: &'a QuadraticField,
    sign: f64,
    opts: &'a IntegratorOptions,
    dim: usize,
}

impl Stepper<'_> {
    fn rhs(&self, x: &Vec3) -> Vec3 {
        self.f.evaluate(x) * self.sign
    }

    fn err_norm(&self, e: &Vec3, x: &Vec3, y: &Vec3) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..self.dim {
            let sc = TOL_FACTOR * (self.opts.atol + self.opts.rtol * x[i].abs().max(y[i].abs()));
            if sc > 0.0 {
                m = m.max((e[i] / sc).abs());
            }
        }
        m
    }

    /// One step: returns the 5th-order state, its derivative (FSAL) and the
    /// scaled error.
    fn step(&self, x: &Vec3, k1: &Vec3, h: f64) -> (Vec3, Vec3, f64) {
        let k2 = self.rhs(&(x + k1 * (h * Tableau::A2[0])));
        let k3 = self.rhs(&(x + (k1 * Tableau::A3[0] + k2 * Tableau::A3[1]) * h));
        let k4 = self.rhs(&(x + (k1 * Tableau::A4[0] + k2 * Tableau::A4[1] + k3 * Tableau::A4[2]) * h));
        let k5 = self.rhs(
            &(x + (k1 * Tableau::A5[0] + k2 * Tableau::A5[1] + k3 * Tableau::A5[2] + k4 * Tableau::A5[3]) * h),
        );
        let k6 = self.rhs(
            &(x + (k1 * Tableau::A6[0]
                + k2 * Tableau::A6[1]
                + k3 * Tableau::A6[2]
                + k4 * Tableau::A6[3]
                + k5 * Tableau::A6[4])
                * h),
        );
        let y = x + (k1 * Tableau::B[0]
            + k3 * Tableau::B[2]
            + k4 * Tableau::B[3]
            + k5 * Tableau::B[4]
            + k6 * Tableau::B[5])
            * h;
        let k7 = self.rhs(&y);
        let e = (k1 * Tableau::E[0]
            + k3 * Tableau::E[2]
            + k4 * Tableau::E[3]
            + k5 * Tableau::E[4]
            + k6 * Tableau::E[5]
            + k7 * Tableau::E[6])
            * h;
        let err = if y.iter().all(|v| v.is_finite()) {
            self.err_norm(&e, x, &y)
        } else {
            f64::INFINITY
        };
        (y, k7, err)
    }

    fn initial_step(&self, x0: &Vec3, f0: &Vec3) -> f64 {
        let sc = |x: &Vec3, v: &Vec3| {
            let mut s = 0.0;
            for i in 0..self.dim {
                let w = TOL_FACTOR * (self.opts.atol + self.opts.rtol * x[i].abs());
                let r = if w > 0.0 { v[i] / w } else { 0.0 };
                s += r * r;
            }
            (s / self.dim as f64).sqrt()
        };
        let d0 = sc(x0, x0);
        let d1 = sc(x0, f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let x1 = x0 + f0 * h0;
        let f1 = self.rhs(&x1);
        let d2 = sc(x0, &(f1 - f0)) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1)
    }
}

fn quad(s: &Mat3, x: &Vec3) -> f64 {
    x.dot(&(s * x))
}

pub fn integrate(
    f: &QuadraticField,
    x0: &Vec3,
    t_max: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    integrate_monitored(f, x0, t_max, opts, &[], false)
}

/// Integrates `ẋ = −F(x)` forward, i.e. the original field backward in time.
pub fn integrate_backward(
    f: &QuadraticField,
    x0: &Vec3,
    t_max: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    integrate_monitored(f, x0, t_max, opts, &[], true)
}

pub fn integrate_monitored(
    f: &QuadraticField,
    x0: &Vec3,
    t_max: f64,
    opts: &IntegratorOptions,
    monitored: &[Mat3],
    backward: bool,
) -> Result<Trajectory> {
    opts.validate()?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::BadOptions(format!("horizon must be positive, got {t_max}")));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::BadOptions("non-finite initial condition".into()));
    }
    let dim = f.dim();
    let mut x = *x0;
    if dim == 2 {
        x[2] = 0.0;
    }
    let st = Stepper {
        f,
        sign: if backward { -1.0 } else { 1.0 },
        opts,
        dim,
    };
    let cap = opts.norm_cap * x.norm().max(1.0);
    let q0: Vec<f64> = monitored.iter().map(|s| quad(s, &x)).collect();
    let mut drift = vec![0.0_f64; monitored.len()];
    let mut k1 = st.rhs(&x);
    let mut times = vec![0.0];
    let mut states = vec![x];
    let mut derivs = vec![k1];
    let mut t = 0.0;
    let mut h = st.initial_step(&x, &k1).min(t_max);
    let mut steps = 0usize;
    let status = loop {
        if t >= t_max {
            break TrajectoryStatus::ReachedHorizon { t };
        }
        if steps >= opts.max_steps {
            break TrajectoryStatus::StepUnderflow { t };
        }
        let last = t + h >= t_max;
        let h_try = if last { t_max - t } else { h };
        if h_try < opts.h_min && !last {
            break stopped(&states, &derivs, t);
        }
        let (y, k7, err) = st.step(&x, &k1, h_try);
        steps += 1;
        if err <= 1.0 {
            t = if last { t_max } else { t + h_try };
            x = y;
            k1 = k7;
            times.push(t);
            states.push(x);
            derivs.push(k1);
            for (d, (s, q)) in drift.iter_mut().zip(monitored.iter().zip(&q0)) {
                *d = (*d).max((quad(s, &x) - q).abs());
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = h_try * fac;
            if x.norm() >= cap {
                break stopped(&states, &derivs, t);
            }
        } else {
            let fac = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)
            } else {
                0.2
            };
            h = h_try * fac;
            if h < opts.h_min {
                break stopped(&states, &derivs, t);
            }
        }
    };
    let mut traj = Trajectory {
        times,
        states,
        derivs,
        status,
        drift,
        backward,
        dim,
    };
    if let TrajectoryStatus::BlowUp { t_star, norm } = traj.status {
        let t_star = estimate_blowup_time(&traj).map(|e| e.t_star).unwrap_or(t_star);
        traj.status = TrajectoryStatus::BlowUp { t_star, norm };
    }
    Ok(traj)
}

fn stopped(states: &[Vec3], derivs: &[Vec3], t: f64) -> TrajectoryStatus {
    let norm = states.last().map(|x| x.norm()).unwrap_or(0.0);
    if superlinear(states, derivs) {
        TrajectoryStatus::BlowUp { t_star: t, norm }
    } else {
        TrajectoryStatus::StepUnderflow { t }
    }
}

/// Least-squares slope of `ln(d‖x‖/dt)` against `ln‖x‖` over the last three
/// decades of norm growth.
pub fn growth_exponent(states: &[Vec3], derivs: &[Vec3]) -> Option<f64> {
    let last = states.last()?.norm();
    if last == 0.0 {
        return None;
    }
    let floor = last / 1e3;
    let mut pts = Vec::new();
    for (x, d) in states.iter().zip(derivs).rev() {
        let n = x.norm();
        if n < floor {
            break;
        }
        let rate = x.dot(d) / n;
        if rate > 0.0 {
            pts.push((n.ln(), rate.ln()));
        }
    }
    if pts.len() < 3 {
        return None;
    }
    let (lo, hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    if hi - lo < 1.0 {
        return None;
    }
    Some(fit(&pts).0)
}

fn superlinear(states: &[Vec3], derivs: &[Vec3]) -> bool {
    growth_exponent(states, derivs).is_some_and(|s| s >= SUPERLINEAR_SLOPE)
}

/// `(slope, intercept)` of the least-squares line through `pts`.
fn fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let m = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (m, my - m * mx)
}

/// Affine fit of `1/‖x(t)‖` over the final decade of norm growth; the root of
/// the fitted line estimates the blow-up time.
pub fn estimate_blowup_time(traj: &Trajectory) -> Result<BlowupEstimate> {
    if !traj.is_blowup() {
        return Err(Error::NoBlowUp);
    }
    let last = traj.final_state().norm();
    let floor = last / 10.0;
    let mut pts = Vec::new();
    for (t, x) in traj.times.iter().zip(&traj.states).rev() {
        let n = x.norm();
        if n < floor {
            break;
        }
        pts.push((*t, 1.0 / n));
    }
    if pts.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientTail(pts.len()));
    }
    let (m, b) = fit(&pts);
    if m >= 0.0 {
        return Err(Error::InsufficientTail(pts.len()));
    }
    let residual = (pts.iter().map(|p| (p.1 - (m * p.0 + b)).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    Ok(BlowupEstimate {
        t_star: -b / m,
        residual,
        samples: pts.len(),
    })
}

/// Maximum relative error of the stored knots against `exact`.
pub fn verify_against_closed_form(traj: &Trajectory, exact: impl Fn(f64) -> Vec3) -> f64 {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(t, x)| {
            let e = exact(*t);
            let scale = e.norm();
            if scale == 0.0 {
                x.norm()
            } else {
                (x - e).norm() / scale
            }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example5() -> QuadraticField {
        QuadraticField::from_terms(3, &[(0, 1, 2, 1.0), (1, 0, 1, 1.0), (2, 0, 2, 3.0)]).unwrap()
    }

    fn example5_exact(t: f64) -> Vec3 {
        let s = 1.0 - 2.0_f64.sqrt() * t;
        Vec3::new(std::f64::consts::FRAC_1_SQRT_2 / s, s.powf(-0.5), s.powf(-1.5))
    }

    #[test]
    fn example5_blows_up_at_inverse_sqrt2() {
        let x0 = Vec3::new(std::f64::consts::FRAC_1_SQRT_2, 1.0, 1.0);
        let tr = integrate(&example5(), &x0, 10.0, &IntegratorOptions::default()).unwrap();
        match tr.status {
            TrajectoryStatus::BlowUp { t_star, .. } => {
                assert!((t_star - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3)
            }
            ref s => panic!("unexpected status {s:?}"),
        }
        let head = integrate(&example5(), &x0, 0.6, &IntegratorOptions::default()).unwrap();
        assert!(verify_against_closed_form(&head, example5_exact) <= 1e-6);
    }

    #[test]
    fn zero_field_is_constant() {
        let x0 = Vec3::new(0.3, -1.0, 2.0);
        let tr = integrate(&QuadraticField::zero(3), &x0, 10.0, &IntegratorOptions::default()).unwrap();
        assert!(matches!(tr.status, TrajectoryStatus::ReachedHorizon { t } if t == 10.0));
        assert!(tr.states.iter().all(|s| *s == x0));
    }

    #[test]
    fn riccati_blows_up_at_one() {
        let f = QuadraticField::from_terms(3, &[(0, 0, 0, 1.0)]).unwrap();
        let tr = integrate(&f, &Vec3::x(), 5.0, &IntegratorOptions::default()).unwrap();
        let est = estimate_blowup_time(&tr).unwrap();
        assert!((est.t_star - 1.0).abs() < 1e-3);
        assert!(est.samples >= MIN_TAIL_SAMPLES);
    }

    #[test]
    fn linear_growth_is_not_blowup() {
        // x1' = x2 x3 with x2, x3 constant grows linearly
        let f = QuadraticField::from_terms(3, &[(0, 1, 2, 1.0)]).unwrap();
        let opts = IntegratorOptions {
            norm_cap: 1e3,
            ..Default::default()
        };
        let tr = integrate(&f, &Vec3::new(0.0, 1.0, 1.0), 1e4, &opts).unwrap();
        assert!(!tr.is_blowup());
        assert!(matches!(estimate_blowup_time(&tr), Err(Error::NoBlowUp)));
    }

    #[test]
    fn backward_run_reverses_time() {
        let f = QuadraticField::from_terms(3, &[(0, 1, 2, -2.0), (1, 0, 2, 1.0), (2, 0, 1, -1.0)])
            .unwrap();
        let x0 = Vec3::new(0.6, 0.0, 0.8);
        let opts = IntegratorOptions::default();
        let fwd = integrate(&f, &x0, 5.0, &opts).unwrap();
        let back = integrate_backward(&f, &fwd.final_state(), 5.0, &opts).unwrap();
        assert!((back.final_state() - x0).norm() < 1e-7);
        assert!(back.physical_time(back.times.len() - 1) < 0.0);
    }

    #[test]
    fn dense_output_interpolates() {
        let x0 = Vec3::new(std::f64::consts::FRAC_1_SQRT_2, 1.0, 1.0);
        let tr = integrate(&example5(), &x0, 0.5, &IntegratorOptions::default()).unwrap();
        for k in 0..50 {
            let t = 0.5 * k as f64 / 50.0 + 0.0037;
            let x = tr.sample(t).unwrap();
            assert!((x - example5_exact(t)).norm() / example5_exact(t).norm() < 1e-6);
        }
    }

    #[test]
    fn bad_options_are_rejected() {
        let opts = IntegratorOptions {
            rtol: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            integrate(&QuadraticField::zero(3), &Vec3::x(), 1.0, &opts),
            Err(Error::BadOptions(_))
        ));
        assert!(matches!(
            integrate(&QuadraticField::zero(3), &Vec3::x(), -1.0, &IntegratorOptions::default()),
            Err(Error::BadOptions(_))
        ));
    }

    #[test]
    fn conserved_forms_drift_little() {
        let f = QuadraticField::from_terms(3, &[(0, 1, 2, -2.0), (1, 0, 2, 1.0), (2, 0, 1, -1.0)])
            .unwrap();
        let q1 = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        let q2 = Mat3::from_diagonal(&Vec3::new(0.0, 1.0, 1.0));
        let x0 = Vec3::new(0.48, 0.6, 0.64);
        let tr = integrate_monitored(&f, &x0, 1000.0, &IntegratorOptions::default(), &[q1, q2], false)
            .unwrap();
        assert!(matches!(tr.status, TrajectoryStatus::ReachedHorizon { .. }));
        assert!(tr.drift.iter().all(|d| *d <= 1e-8), "{:?}", tr.drift);
    }
}
